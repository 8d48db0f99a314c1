#include "lyapgap/flags.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lyapgap/errors.hpp"
#include "lyapgap/svd.hpp"

namespace lyapgap {

PartialFlag make_partial_flag(int k, const Subspace& lower, const Subspace& upper) {
  const int d = lower.ambient_dim;
  if (upper.ambient_dim != d)
    throw std::invalid_argument("partial flag: ambient dimension mismatch");
  if (k < 1 || k > d - 1) throw std::invalid_argument("partial flag: k out of range");
  if (lower.rank() != k - 1 || upper.rank() != k + 1)
    throw std::invalid_argument("partial flag: ranks must be k-1 and k+1");
  if (!contains(upper, lower))
    throw std::invalid_argument("partial flag: lower not contained in upper");
  return PartialFlag{d, k, lower, upper};
}

namespace {

Mat gaussian_matrix(int rows, int cols, RngStream& rng) {
  Mat g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = rng.normal();
  return g;
}

// Haar orthonormal d x k frame; redraw on Gram-Schmidt near-breakdown.
Mat haar_frame(int d, int k, RngStream& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Mat g = gaussian_matrix(d, k, rng);
    const Mat q = orthonormalize_columns(g, 1e-12);
    if (q.cols == k) return q;
  }
  throw numeric_error("haar_frame: repeated Gram-Schmidt breakdown");
}

}  // namespace

Subspace sample_grassmannian(int d, int k, RngStream& rng) {
  if (k < 0 || k > d) throw std::invalid_argument("sample_grassmannian: rank out of range");
  if (k == 0) return Subspace{d, Mat(d, 0)};
  return Subspace{d, haar_frame(d, k, rng)};
}

PartialFlag sample_partial_flag(int d, int k, RngStream& rng) {
  if (k < 1 || k > d - 1)
    throw std::invalid_argument("sample_partial_flag: k out of range");
  const Mat frame = haar_frame(d, k + 1, rng);
  const Subspace lower{d, columns(frame, 0, k - 1)};
  const Subspace upper{d, frame};
  return PartialFlag{d, k, lower, upper};
}

std::pair<std::vector<double>, std::vector<double>> miniflag_basis(const PartialFlag& flag) {
  const Mat u = complete_within(flag.lower, flag.upper);
  return {column(u, 0), column(u, 1)};
}

MiniflagPoint miniflag_point(const PartialFlag& flag, double theta) {
  const auto [u1, u2] = miniflag_basis(flag);
  std::vector<double> dir(u1.size());
  const double c = std::cos(theta), s = std::sin(theta);
  for (size_t i = 0; i < dir.size(); ++i) dir[i] = c * u1[i] + s * u2[i];
  Mat mid_frame(flag.ambient_dim, flag.k);
  for (int j = 0; j < flag.k - 1; ++j)
    set_column(mid_frame, j, column(flag.lower.frame, j));
  set_column(mid_frame, flag.k - 1, dir);
  return MiniflagPoint{flag, Subspace{flag.ambient_dim, mid_frame}};
}

double alpha(const Subspace& v) {
  const int l = v.rank();
  if (l == 0) return 1.0;
  // proj_{E_l} proj_V has the same nonzero singular values as the top l x l
  // block of the frame, so the full product of them is that block's values.
  Mat top(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) top(i, j) = v.frame(i, j);
  const std::vector<double> s = singular_values(top);
  double p = 1.0;
  for (double x : s) p *= x;
  return p;
}

double clamped_log(double x) {
  if (x < 1e-300) return -700.0;
  return std::log(x);
}

Mat miniflag_restriction(const Mat& b, const PartialFlag& flag) {
  return restricted_operator(b, flag.lower, flag.upper);
}

double restriction_log_gap(const Mat& b, const PartialFlag& flag) {
  const std::vector<double> s = singular_values(miniflag_restriction(b, flag));
  return clamped_log(s[0]) - clamped_log(s[1]);
}

GapAverage gap_average(const Mat& b, int k, long n_samples, RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("gap_average: need n_samples >= 1");
  const int d = b.rows;
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const PartialFlag flag = sample_partial_flag(d, k, rng);
    const double v = restriction_log_gap(b, flag);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / static_cast<double>(n_samples);
  const double var =
      std::max(0.0, sumsq / static_cast<double>(n_samples) - mean * mean);
  return GapAverage{mean, std::sqrt(var / static_cast<double>(n_samples)), n_samples};
}

bool gapcomp_check(const Mat& d, const MiniflagPoint& point) {
  if (!d.square()) throw std::invalid_argument("gapcomp_check: D must be square");
  const int n = d.rows;
  double offdiag = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(d(i, j)));
  if (offdiag > 1e-14 * std::max(1.0, max_abs(d)))
    throw std::invalid_argument("gapcomp_check: D must be diagonal");
  for (int i = 0; i < n; ++i) {
    if (!(d(i, i) > 0.0))
      throw std::invalid_argument("gapcomp_check: diagonal entries must be positive");
    if (i > 0 && d(i, i) > d(i - 1, i - 1))
      throw std::invalid_argument("gapcomp_check: diagonal must be non-increasing");
  }
  const int k = point.flag.k;
  const double bk = d(k - 1, k - 1), bk1 = d(k, k);

  const double a_lo = alpha(point.flag.lower);
  const double a_mid = alpha(point.mid);
  const double a_up = alpha(point.flag.upper);

  const std::vector<double> s = singular_values(miniflag_restriction(d, point.flag));
  const double log_ratio = clamped_log(s[0]) - clamped_log(s[1]);

  const double log_lhs = 2.0 * clamped_log(a_mid) + clamped_log(a_lo) + std::log(bk / bk1);
  const double log_rhs = std::log(bk / bk1) - 2.0 * clamped_log(a_lo) - clamped_log(a_up);
  const double slack = 1e-8;
  return log_lhs <= log_ratio + slack && log_ratio <= log_rhs + slack;
}

}  // namespace lyapgap
