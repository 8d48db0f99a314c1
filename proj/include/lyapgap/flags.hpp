#pragma once

#include <utility>

#include "lyapgap/matrix.hpp"
#include "lyapgap/rng.hpp"
#include "lyapgap/subspace.hpp"

namespace lyapgap {

/// Nested pair (V_{k-1} inside V_{k+1}) around a center index k. The set of
/// k-dimensional subspaces wedged between them is a circle.
struct PartialFlag {
  int ambient_dim = 0;
  int k = 0;
  Subspace lower;  // rank k-1
  Subspace upper;  // rank k+1
};

/// A flag together with a choice of middle subspace (rank k).
struct MiniflagPoint {
  PartialFlag flag;
  Subspace mid;
};

PartialFlag make_partial_flag(int k, const Subspace& lower, const Subspace& upper);

/// Haar-distributed k-dimensional subspace of R^d: Gaussian matrix followed
/// by Gram-Schmidt; any near-dependent draw (below 1e-12) is redrawn.
Subspace sample_grassmannian(int d, int k, RngStream& rng);

/// Haar-distributed partial flag: a Haar orthonormal (k+1)-frame, whose
/// first k-1 columns span the lower subspace.
PartialFlag sample_partial_flag(int d, int k, RngStream& rng);

/// Deterministic orthonormal basis (u1, u2) of upper minus lower, fixing the
/// identification of the middle-subspace circle with angles in [0, pi).
std::pair<std::vector<double>, std::vector<double>> miniflag_basis(const PartialFlag& flag);

/// Middle subspace at angle theta: lower plus the line through
/// cos(theta) u1 + sin(theta) u2.
MiniflagPoint miniflag_point(const PartialFlag& flag, double theta);

/// alpha_l(V) = product of the top l singular values of proj_{E_l} proj_V,
/// with l = rank(V) and E_l the span of the first l coordinate directions.
/// alpha of the zero subspace is 1 (empty product).
double alpha(const Subspace& v);

/// log with the documented clamp: values below 1e-300 give -700 instead of
/// overflowing to -inf (the integrand is integrable, the tail contributes
/// nothing at sampling resolution).
double clamped_log(double x);

/// The 2x2 operator proj_{B(upper) minus B(lower)} . B . proj_{upper minus lower}.
Mat miniflag_restriction(const Mat& b, const PartialFlag& flag);

/// log(s1/s2) of the miniflag restriction.
double restriction_log_gap(const Mat& b, const PartialFlag& flag);

struct GapAverage {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n_samples = 0;
};

/// Monte Carlo average of restriction_log_gap over Haar partial flags.
GapAverage gap_average(const Mat& b, int k, long n_samples, RngStream& rng);

/// Two-sided bound for diagonal operators: with D = diag(b1 >= ... >= bd > 0)
/// and a miniflag point around k,
///   alpha_k^2 alpha_{k-1} (b_k/b_{k+1}) <= s1/s2(D|...) <= (b_k/b_{k+1}) / (alpha_{k-1}^2 alpha_{k+1})
/// checked in log space with slack 1e-8. The diagonal must be positive and
/// non-increasing (the bound is stated for that ordering).
bool gapcomp_check(const Mat& d, const MiniflagPoint& point);

}  // namespace lyapgap
