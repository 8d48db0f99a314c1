#pragma once

#include <initializer_list>
#include <vector>

namespace lyapgap {

/// Dense row-major matrix. Everything in this project is small (ambient
/// dimension at most 16, exterior powers up to 20x20), so there is no sparse
/// or blocked path anywhere.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  Mat(int r, int c, std::initializer_list<double> vals);

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Mat identity(int n);

  bool square() const { return rows == cols; }
};

Mat operator*(const Mat& x, const Mat& y);
Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat scaled(const Mat& x, double c);
Mat transpose(const Mat& x);

bool all_finite(const Mat& x);
double max_abs(const Mat& x);
double frobenius_norm(const Mat& x);

std::vector<double> column(const Mat& x, int j);
void set_column(Mat& x, int j, const std::vector<double>& v);
Mat columns(const Mat& x, int j0, int j1);  // [j0, j1)
Mat hcat(const Mat& x, const Mat& y);

double dot(const std::vector<double>& x, const std::vector<double>& y);
double norm2(const std::vector<double>& x);
std::vector<double> matvec(const Mat& m, const std::vector<double>& v);

/// Determinant by LU with partial pivoting. Exact sign, stable for the
/// matrix sizes used here.
double determinant(const Mat& x);

struct QrResult {
  Mat q;  // same shape as input, orthonormal columns
  Mat r;  // square upper triangular, positive diagonal
};

/// Thin QR by modified Gram-Schmidt with one re-orthogonalization pass.
/// The R diagonal is a residual norm, hence positive by construction.
/// A diagonal entry below `breakdown` throws numeric_error.
QrResult qr_positive(const Mat& x, double breakdown = 1e-300);

/// Orthonormalize the columns of x in order, dropping columns whose
/// residual falls below tol times the column norm scale. Deterministic.
Mat orthonormalize_columns(const Mat& x, double tol = 1e-12);

}  // namespace lyapgap
