#include "lyapgap/products.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lyapgap/errors.hpp"
#include "lyapgap/svd.hpp"

namespace lyapgap {

ProductState ProductState::initial(int dim) {
  if (dim < 1) throw std::invalid_argument("product dimension must be >= 1");
  ProductState st;
  st.dim = dim;
  st.steps = 0;
  st.q = Mat::identity(dim);
  st.log_diag.assign(dim, 0.0);
  st.tri = Mat::identity(dim);
  return st;
}

ProductState advance(const ProductState& state, const Mat& a) {
  const int d = state.dim;
  if (!a.square() || a.rows != d)
    throw std::invalid_argument("advance: factor shape mismatch");
  if (!all_finite(a)) throw numeric_error("advance: factor has non-finite entries");

  QrResult qr;
  try {
    qr = qr_positive(a * state.q);
  } catch (const numeric_error&) {
    throw numeric_error("advance: factor numerically singular at step " +
                        std::to_string(state.steps + 1));
  }

  ProductState next;
  next.dim = d;
  next.steps = state.steps + 1;
  next.q = std::move(qr.q);
  next.log_diag = state.log_diag;
  for (int i = 0; i < d; ++i) next.log_diag[i] += std::log(qr.r(i, i));

  // tri' = (D_R D)^{-1} R D tri, using old log_diag for D. Exponents are
  // clamped at 700 so one badly ordered early step degrades accuracy instead
  // of overflowing.
  next.tri = Mat(d, d);
  for (int i = 0; i < d; ++i) {
    next.tri(i, i) = 1.0;
    for (int j = i + 1; j < d; ++j) {
      double acc = state.tri(i, j);  // k = i term: R_ii/R_ii * exp(0)
      for (int k = i + 1; k <= j; ++k) {
        const double ex = std::min(state.log_diag[k] - state.log_diag[i], 700.0);
        acc += qr.r(i, k) / qr.r(i, i) * std::exp(ex) * state.tri(k, j);
      }
      next.tri(i, j) = acc;
    }
  }
  if (!all_finite(next.tri))
    throw numeric_error("advance: triangular remainder overflowed at step " +
                        std::to_string(next.steps));
  return next;
}

std::vector<double> exponent_estimates(const ProductState& state) {
  if (state.steps < 1) throw std::invalid_argument("exponent_estimates: no steps taken");
  std::vector<double> v = state.log_diag;
  for (double& x : v) x /= static_cast<double>(state.steps);
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

std::vector<double> log_singular_estimates(const ProductState& state) {
  const int d = state.dim;
  // Row Gram-Schmidt of tri from the top: tri = L * Omega with L lower
  // triangular, positive diagonal. Two projection passes keep Omega
  // orthonormal to machine precision.
  Mat u(d, d);  // rows of Omega
  std::vector<double> log_l_diag(d);
  for (int i = 0; i < d; ++i) {
    std::vector<double> r(d);
    for (int j = 0; j < d; ++j) r[j] = state.tri(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int p = 0; p < i; ++p) {
        double c = 0.0;
        for (int j = 0; j < d; ++j) c += r[j] * u(p, j);
        for (int j = 0; j < d; ++j) r[j] -= c * u(p, j);
      }
    }
    const double nrm = norm2(r);
    if (!(nrm > 0.0))
      throw numeric_error("log_singular_estimates: triangular remainder lost rank");
    log_l_diag[i] = std::log(nrm);
    for (int j = 0; j < d; ++j) u(i, j) = r[j] / nrm;
  }
  std::vector<double> v(d);
  for (int i = 0; i < d; ++i) v[i] = state.log_diag[i] + log_l_diag[i];
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

std::vector<double> exact_product_svd(const std::vector<Mat>& factors) {
  if (factors.empty() || factors.size() > 64)
    throw std::invalid_argument("exact_product_svd supports 1..64 factors");
  const int d = factors.front().rows;
  for (const Mat& f : factors) {
    if (!f.square() || f.rows != d)
      throw std::invalid_argument("exact_product_svd: factor shape mismatch");
  }
  Mat p = Mat::identity(d);
  double log_scale = 0.0;
  for (const Mat& f : factors) {
    p = f * p;
    const double s = max_abs(p);
    if (!(s > 0.0) || !all_finite(p))
      throw numeric_error("exact_product_svd: product collapsed or overflowed");
    for (double& x : p.a) x /= s;
    log_scale += std::log(s);
  }
  const std::vector<double> sv = singular_values(p);
  std::vector<double> out(d);
  for (int k = 0; k < d; ++k) {
    if (!(sv[k] > 0.0)) throw numeric_error("exact_product_svd: singular product");
    out[k] = std::log(sv[k]) + log_scale;
  }
  return out;
}

BaseSequence::BaseSequence(std::string kind, int dim, std::vector<Mat> mats)
    : kind_(std::move(kind)), dim_(dim), mats_(std::move(mats)) {
  if (dim_ < 1) throw std::invalid_argument("base sequence dimension must be >= 1");
  if (mats_.empty()) throw std::invalid_argument("base sequence needs a matrix");
  for (const Mat& m : mats_) {
    if (!m.square() || m.rows != dim_)
      throw std::invalid_argument("base sequence: matrix shape mismatch");
    if (!all_finite(m))
      throw std::invalid_argument("base sequence: non-finite matrix");
    norm_bound_ = std::max(norm_bound_, operator_norm(m));
  }
}

BaseSequence BaseSequence::identity(int dim) {
  return BaseSequence("identity", dim, {Mat::identity(dim)});
}

BaseSequence BaseSequence::fixed(Mat a) {
  const int d = a.rows;
  return BaseSequence("fixed", d, {std::move(a)});
}

BaseSequence BaseSequence::cycle(std::vector<Mat> mats) {
  const int d = mats.empty() ? 0 : mats.front().rows;
  return BaseSequence("cycle", d, std::move(mats));
}

const Mat& BaseSequence::at(std::int64_t step) const {
  return mats_[static_cast<size_t>(step % static_cast<std::int64_t>(mats_.size()))];
}

GapTrace run_product(const BaseSequence& seq, const NoiseSpec& noise,
                     double eps, std::int64_t n, std::int64_t checkpoint_every,
                     std::uint64_t seed, std::int64_t trial) {
  if (n < 1) throw std::invalid_argument("run_product: n must be >= 1");
  if (seq.dim() != noise.dim())
    throw std::invalid_argument("run_product: base sequence and noise dimension differ");
  if (checkpoint_every < 0)
    throw std::invalid_argument("run_product: negative checkpoint stride");
  const int d = seq.dim();

  GapTrace trace;
  trace.dim = d;
  trace.seed = seed;
  trace.trial = trial;

  auto is_checkpoint = [&](std::int64_t i) {
    if (i == n) return true;
    if (checkpoint_every == 0) return (i & (i - 1)) == 0;  // powers of two
    return i % checkpoint_every == 0;
  };

  ProductState st = ProductState::initial(d);
  for (std::int64_t i = 1; i <= n; ++i) {
    RngStream step_rng(seed, static_cast<std::uint64_t>(trial),
                       static_cast<std::uint64_t>(i));
    const Mat e = sample_noise(noise, step_rng);
    const Mat b = perturb(seq.at(i - 1), eps, e);
    try {
      st = advance(st, b);
    } catch (const numeric_error& err) {
      throw numeric_error(std::string(err.what()) + " (seed " +
                          std::to_string(seed) + ", trial " +
                          std::to_string(trial) + ", eps " + std::to_string(eps) + ")");
    }
    if (is_checkpoint(i)) {
      GapCheckpoint cp;
      cp.n = i;
      cp.log_sk = log_singular_estimates(st);
      cp.gaps.resize(static_cast<size_t>(d) - 1);
      for (int k = 0; k + 1 < d; ++k) cp.gaps[k] = cp.log_sk[k] - cp.log_sk[k + 1];
      trace.checkpoints.push_back(std::move(cp));
    }
  }
  return trace;
}

void write_trace_csv(const GapTrace& trace, std::ostream& out) {
  out << "n,k,log_s_k_over_n,gap_k,seed\n";
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (const GapCheckpoint& cp : trace.checkpoints) {
    const double inv_n = 1.0 / static_cast<double>(cp.n);
    for (int k = 0; k < trace.dim; ++k) {
      out << cp.n << ',' << (k + 1) << ',' << fmt(cp.log_sk[k] * inv_n) << ',';
      if (k + 1 < trace.dim) out << fmt(cp.gaps[k] * inv_n);
      out << ',' << trace.seed << '\n';
    }
  }
}

}  // namespace lyapgap
