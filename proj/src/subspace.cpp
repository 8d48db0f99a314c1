#include "lyapgap/subspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lyapgap/errors.hpp"
#include "lyapgap/svd.hpp"

namespace lyapgap {

Subspace make_subspace(const Mat& frame) {
  for (int i = 0; i < frame.cols; ++i)
    for (int j = 0; j <= i; ++j) {
      const double g = dot(column(frame, i), column(frame, j));
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(g - want) > 1e-10)
        throw std::invalid_argument("subspace frame is not orthonormal");
    }
  return Subspace{frame.rows, frame};
}

Subspace span_of(const Mat& x, double tol) {
  return Subspace{x.rows, orthonormalize_columns(x, tol)};
}

bool contains(const Subspace& outer, const Subspace& inner, double tol) {
  if (outer.ambient_dim != inner.ambient_dim) return false;
  for (int j = 0; j < inner.rank(); ++j) {
    std::vector<double> v = column(inner.frame, j);
    const std::vector<double> coeff = matvec(transpose(outer.frame), v);
    const std::vector<double> proj = matvec(outer.frame, coeff);
    double res = 0.0;
    for (size_t t = 0; t < v.size(); ++t) res += (v[t] - proj[t]) * (v[t] - proj[t]);
    if (std::sqrt(res) > tol) return false;
  }
  return true;
}

Mat complete_within(const Subspace& inner, const Subspace& outer) {
  if (!contains(outer, inner))
    throw std::invalid_argument("complete_within: inner subspace not inside outer");
  const Mat stacked = hcat(inner.frame, outer.frame);
  const Mat all = orthonormalize_columns(stacked, 1e-8);
  if (all.cols != outer.rank())
    throw numeric_error("complete_within: completion rank mismatch");
  return columns(all, inner.rank(), all.cols);
}

Mat restricted_operator(const Mat& b, const Subspace& inner, const Subspace& outer) {
  if (!b.square() || b.rows != inner.ambient_dim || b.rows != outer.ambient_dim)
    throw std::invalid_argument("restricted_operator shape mismatch");
  if (!contains(outer, inner))
    throw std::invalid_argument("restricted_operator: inner not contained in outer");
  const std::vector<double> s = singular_values(b);
  if (!(s.back() >= 1e-12 * s.front()))
    throw numeric_error("restricted_operator: operator too close to singular");

  const Mat domain = complete_within(inner, outer);  // basis of V minus U

  const Subspace image_inner = span_of(b * inner.frame, 1e-12);
  const Subspace image_outer = span_of(b * outer.frame, 1e-12);
  if (image_inner.rank() != inner.rank() || image_outer.rank() != outer.rank())
    throw numeric_error("restricted_operator: image rank collapsed");
  const Mat codomain = complete_within(image_inner, image_outer);

  return transpose(codomain) * (b * domain);
}

namespace {

// next k-subset of {0..d-1} in lexicographic order; false when exhausted
bool next_subset(std::vector<int>& idx, int d) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < d - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::vector<int>> subsets_lex(int d, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  out.push_back(idx);
  while (next_subset(idx, d)) out.push_back(idx);
  return out;
}

}  // namespace

Mat exterior_power(const Mat& a, int k) {
  if (!a.square()) throw std::invalid_argument("exterior_power expects square input");
  const int d = a.rows;
  if (k < 1 || k > d) throw std::invalid_argument("exterior_power: k out of range");
  const auto subs = subsets_lex(d, k);
  const int m = static_cast<int>(subs.size());
  Mat out(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      Mat minor(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = a(subs[r][i], subs[c][j]);
      out(r, c) = determinant(minor);
    }
  return out;
}

Mat normalize_det(const Mat& a) {
  if (!a.square()) throw std::invalid_argument("normalize_det expects square input");
  const double det = determinant(a);
  if (det == 0.0 || !std::isfinite(det))
    throw numeric_error("normalize_det: matrix is singular");
  const double f = std::pow(std::abs(det), 1.0 / a.rows);
  return scaled(a, 1.0 / f);
}

double projective_jacobian(const Mat& a, double theta) {
  if (a.rows != 2 || a.cols != 2)
    throw std::invalid_argument("projective_jacobian expects a 2x2 matrix");
  const double det = determinant(a);
  if (det == 0.0) throw numeric_error("projective_jacobian: singular matrix");
  const double x = std::cos(theta), y = std::sin(theta);
  const double ax = a(0, 0) * x + a(0, 1) * y;
  const double ay = a(1, 0) * x + a(1, 1) * y;
  return std::abs(det) / (ax * ax + ay * ay);
}

}  // namespace lyapgap
