#pragma once

#include <vector>

#include "lyapgap/matrix.hpp"

namespace lyapgap {

struct SvdResult {
  Mat u;                  // square orthogonal, same row count as input
  std::vector<double> s;  // non-increasing, non-negative
  Mat v;                  // square orthogonal, same column count as input
};

/// Full SVD of a square matrix by one-sided Jacobi rotations. Chosen for its
/// high relative accuracy on the tiny, sometimes extremely graded matrices
/// this project lives on; there is no LAPACK dependency to carry.
/// Rank-deficient inputs get their null directions completed so u and v are
/// always orthogonal.
SvdResult svd(const Mat& a);

/// Singular values only, for any rectangular shape, non-increasing.
std::vector<double> singular_values(const Mat& a);

double operator_norm(const Mat& a);

/// Smallest singular value (the conorm 1/||A^{-1}||).
double conorm(const Mat& a);

/// Product s_i ... s_j of singular values, 1-indexed inclusive.
double singular_product(const Mat& a, int i, int j);

}  // namespace lyapgap
