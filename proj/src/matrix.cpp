#include "lyapgap/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lyapgap/errors.hpp"

namespace lyapgap {

Mat::Mat(int r, int c, std::initializer_list<double> vals) : Mat(r, c) {
  if (static_cast<int>(vals.size()) != r * c)
    throw std::invalid_argument("matrix initializer size mismatch");
  std::copy(vals.begin(), vals.end(), a.begin());
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat operator*(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matrix product shape mismatch");
  Mat z(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
    }
  return z;
}

Mat operator+(const Mat& x, const Mat& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    throw std::invalid_argument("matrix sum shape mismatch");
  Mat z = x;
  for (size_t i = 0; i < z.a.size(); ++i) z.a[i] += y.a[i];
  return z;
}

Mat operator-(const Mat& x, const Mat& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    throw std::invalid_argument("matrix difference shape mismatch");
  Mat z = x;
  for (size_t i = 0; i < z.a.size(); ++i) z.a[i] -= y.a[i];
  return z;
}

Mat scaled(const Mat& x, double c) {
  Mat z = x;
  for (double& v : z.a) v *= c;
  return z;
}

Mat transpose(const Mat& x) {
  Mat z(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) z(j, i) = x(i, j);
  return z;
}

bool all_finite(const Mat& x) {
  for (double v : x.a)
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs(const Mat& x) {
  double m = 0.0;
  for (double v : x.a) m = std::max(m, std::abs(v));
  return m;
}

double frobenius_norm(const Mat& x) {
  double s = 0.0;
  for (double v : x.a) s += v * v;
  return std::sqrt(s);
}

std::vector<double> column(const Mat& x, int j) {
  std::vector<double> v(x.rows);
  for (int i = 0; i < x.rows; ++i) v[i] = x(i, j);
  return v;
}

void set_column(Mat& x, int j, const std::vector<double>& v) {
  for (int i = 0; i < x.rows; ++i) x(i, j) = v[i];
}

Mat columns(const Mat& x, int j0, int j1) {
  Mat z(x.rows, j1 - j0);
  for (int i = 0; i < x.rows; ++i)
    for (int j = j0; j < j1; ++j) z(i, j - j0) = x(i, j);
  return z;
}

Mat hcat(const Mat& x, const Mat& y) {
  if (x.rows != y.rows) throw std::invalid_argument("hcat row mismatch");
  Mat z(x.rows, x.cols + y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < x.cols; ++j) z(i, j) = x(i, j);
    for (int j = 0; j < y.cols; ++j) z(i, x.cols + j) = y(i, j);
  }
  return z;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

std::vector<double> matvec(const Mat& m, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != m.cols)
    throw std::invalid_argument("matvec shape mismatch");
  std::vector<double> out(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out[i] += m(i, j) * v[j];
  return out;
}

double determinant(const Mat& x) {
  if (!x.square()) throw std::invalid_argument("determinant needs a square matrix");
  const int n = x.rows;
  Mat lu = x;
  double det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (lu(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(lu(piv, j), lu(k, j));
      det = -det;
    }
    det *= lu(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
    }
  }
  return det;
}

QrResult qr_positive(const Mat& x, double breakdown) {
  const int n = x.cols;
  QrResult out{x, Mat(n, n)};
  for (int j = 0; j < n; ++j) {
    std::vector<double> v = column(out.q, j);
    for (int i = 0; i < j; ++i) {
      const double rij = dot(column(out.q, i), v);
      out.r(i, j) = rij;
      const std::vector<double> qi = column(out.q, i);
      for (size_t t = 0; t < v.size(); ++t) v[t] -= rij * qi[t];
    }
    // second pass picks up what cancellation lost
    for (int i = 0; i < j; ++i) {
      const std::vector<double> qi = column(out.q, i);
      const double c = dot(qi, v);
      out.r(i, j) += c;
      for (size_t t = 0; t < v.size(); ++t) v[t] -= c * qi[t];
    }
    const double rjj = norm2(v);
    if (rjj < breakdown)
      throw numeric_error("QR breakdown: diagonal entry below threshold at column " +
                          std::to_string(j));
    out.r(j, j) = rjj;
    for (double& t : v) t /= rjj;
    set_column(out.q, j, v);
  }
  return out;
}

Mat orthonormalize_columns(const Mat& x, double tol) {
  const double scale = std::max(max_abs(x), 1e-300);
  std::vector<std::vector<double>> basis;
  for (int j = 0; j < x.cols; ++j) {
    std::vector<double> v = column(x, j);
    for (const auto& b : basis) {
      const double c = dot(b, v);
      for (size_t t = 0; t < v.size(); ++t) v[t] -= c * b[t];
    }
    for (const auto& b : basis) {
      const double c = dot(b, v);
      for (size_t t = 0; t < v.size(); ++t) v[t] -= c * b[t];
    }
    const double nrm = norm2(v);
    if (nrm <= tol * scale) continue;
    for (double& t : v) t /= nrm;
    basis.push_back(v);
  }
  Mat out(x.rows, static_cast<int>(basis.size()));
  for (int j = 0; j < out.cols; ++j) set_column(out, j, basis[j]);
  return out;
}

}  // namespace lyapgap
