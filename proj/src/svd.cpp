#include "lyapgap/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lyapgap/errors.hpp"

namespace lyapgap {
namespace {

// One-sided Jacobi on columns: rotate column pairs of w (and accumulate the
// same rotations into v) until all pairs are numerically orthogonal. On exit
// the column norms of w are the singular values. Requires rows >= cols.
void jacobi_orthogonalize(Mat& w, Mat& v) {
  const int n = w.cols;
  const double tol = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < w.rows; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          app += wp * wp;
          aqq += wq * wq;
          apq += wp * wq;
        }
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::abs(apq) <= tol * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < w.rows; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (int i = 0; i < v.rows; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
}

// Extend the accepted orthonormal columns to a full orthonormal basis,
// picking for each empty slot the identity direction with the largest
// residual outside the current span. Deterministic.
void complete_basis(Mat& u, int filled) {
  const int n = u.rows;
  for (int j = filled; j < n; ++j) {
    std::vector<double> best;
    double best_nrm = -1.0;
    for (int cand = 0; cand < n; ++cand) {
      std::vector<double> v(n, 0.0);
      v[cand] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i < j; ++i) {
          const std::vector<double> ui = column(u, i);
          const double c = dot(ui, v);
          for (int t = 0; t < n; ++t) v[t] -= c * ui[t];
        }
      const double nrm = norm2(v);
      if (nrm > best_nrm) {
        best_nrm = nrm;
        best = v;
      }
    }
    if (best_nrm <= 1e-6) throw numeric_error("orthogonal basis completion failed");
    for (double& t : best) t /= best_nrm;
    set_column(u, j, best);
  }
}

}  // namespace

SvdResult svd(const Mat& a) {
  if (!a.square()) throw std::invalid_argument("svd expects a square matrix");
  if (!all_finite(a)) throw std::invalid_argument("svd input has non-finite entries");
  const int n = a.rows;

  Mat w = a;
  Mat v = Mat::identity(n);
  jacobi_orthogonalize(w, v);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> norms(n);
  for (int j = 0; j < n; ++j) norms[j] = norm2(column(w, j));
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return norms[x] > norms[y]; });

  SvdResult out{Mat(n, n), std::vector<double>(n), Mat(n, n)};
  const double scale = *std::max_element(norms.begin(), norms.end());
  int filled = 0;
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    out.s[j] = norms[src];
    for (int i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    if (norms[src] > scale * 1e-280 && norms[src] > 0.0) {
      for (int i = 0; i < n; ++i) out.u(i, j) = w(i, src) / norms[src];
      filled = j + 1;
    }
  }
  if (filled < n) complete_basis(out.u, filled);
  return out;
}

std::vector<double> singular_values(const Mat& a) {
  if (!all_finite(a))
    throw std::invalid_argument("singular_values input has non-finite entries");
  Mat w = a.rows >= a.cols ? a : transpose(a);
  Mat v = Mat::identity(w.cols);
  jacobi_orthogonalize(w, v);
  std::vector<double> s(w.cols);
  for (int j = 0; j < w.cols; ++j) s[j] = norm2(column(w, j));
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}

double operator_norm(const Mat& a) { return singular_values(a).front(); }

double conorm(const Mat& a) {
  if (!a.square()) throw std::invalid_argument("conorm expects a square matrix");
  return singular_values(a).back();
}

double singular_product(const Mat& a, int i, int j) {
  const std::vector<double> s = singular_values(a);
  if (i < 1 || j < i || j > static_cast<int>(s.size()))
    throw std::invalid_argument("singular_product index range out of bounds");
  double p = 1.0;
  for (int k = i - 1; k < j; ++k) p *= s[k];
  return p;
}

}  // namespace lyapgap
