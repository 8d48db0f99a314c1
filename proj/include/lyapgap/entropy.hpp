#pragma once

#include <utility>
#include <vector>

#include "lyapgap/matrix.hpp"

namespace lyapgap {

/// Probability measure on the projective line, discretized as mass per arc:
/// bin b carries the mass of [b*pi/B, (b+1)*pi/B). Bins are non-negative and
/// sum to 1 within 1e-12.
struct CircleMeasure {
  std::vector<double> bins;

  int resolution() const { return static_cast<int>(bins.size()); }
};

/// Uniform measure at the given resolution.
CircleMeasure uniform_measure(int bins = 512);

/// Validating constructor for externally supplied masses.
CircleMeasure make_circle_measure(std::vector<double> bins);

/// Same measure at doubled resolution: each bin splits into two equal
/// halves. Exact (no interpolation guesswork), so quantities recomputed at
/// 2B differ from the B values only by genuine discretization effects.
CircleMeasure refine(const CircleMeasure& nu);

/// Finitely supported measure on projective maps: weighted invertible 2x2
/// matrices acting on the projective line. Weights are non-negative and sum
/// to 1 within 1e-12.
struct MapFamily {
  struct Member {
    double weight = 0.0;
    Mat map;  // 2x2, invertible
  };
  std::vector<Member> members;
};

MapFamily make_map_family(std::vector<std::pair<double, Mat>> members);

/// Family of the compositions f2 o f1, one member per pair, with product
/// weights.
MapFamily compose(const MapFamily& mu2, const MapFamily& mu1);

/// Weighted positive inverse-Jacobian values observed at one target point.
struct JacobianFamily {
  struct Atom {
    double weight = 0.0;
    double jacobian = 0.0;  // inverse Jacobian value, positive and finite
  };
  std::vector<Atom> atoms;
};

JacobianFamily make_jacobian_family(std::vector<std::pair<double, double>> atoms);

/// Kullback-Leibler divergence sum_b nu_b log(nu_b / nu_tilde_b), with
/// 0 log(0/x) = 0. Returns +infinity (the distinguished value, never an
/// overflow artifact) when nu charges a bin that nu_tilde misses. Always
/// >= 0.
double kl_divergence(const CircleMeasure& nu, const CircleMeasure& nu_tilde);

/// Image measure of nu under the projective action of the invertible map.
/// Computed by exact arc-preimage integration: each target bin receives the
/// mass of its preimage arc, read off the piecewise-linear CDF of nu.
/// Mass-preserving to machine precision. Throws numeric_error on a singular
/// map.
CircleMeasure pushforward(const Mat& map, const CircleMeasure& nu);

/// mu * nu = sum_f weight_f (f_* nu).
CircleMeasure convolve(const MapFamily& mu, const CircleMeasure& nu);

/// sum_f weight_f KL(f_* nu || nu_prime). Minimized over nu_prime exactly at
/// convolve(mu, nu).
double mean_relative_entropy(const MapFamily& mu, const CircleMeasure& nu,
                             const CircleMeasure& nu_prime);

/// mean_relative_entropy at its minimizer: sum_f weight_f
/// KL(f_* nu || mu * nu). Non-negative.
double furstenberg_entropy(const MapFamily& mu, const CircleMeasure& nu);

/// With Z = sum w_f j_f, returns sum_f w_f (j_f/Z) log(j_f/Z) >= 0.
/// Invariant under common scaling of the Jacobian values.
double pointwise_entropy(const JacobianFamily& fam);

/// Checks E[psi(X)] >= Var(X)/(2M) - 1e-10 for psi(x) = x log x, where X
/// takes value v_i with weight w_i (weights normalized internally). Requires
/// values in (0, M] and weighted mean 1 within 1e-8.
bool psi_variance_bound_check(const std::vector<std::pair<double, double>>& samples,
                              double bound);

/// Entropy of the one-parameter triangular family whose inverse Jacobian at
/// the fixed point is proportional to t, with t uniform on [a-r, a+r];
/// evaluated by 1024-point midpoint quadrature through pointwise_entropy.
/// Requires 0 < r < a. The value dominates (1/12)(r/a)^2 and depends only
/// on r/a.
double b22_family_entropy(double a, double r);

/// Checks that the mean log singular-value ratio of the family dominates its
/// Furstenberg entropy from the uniform measure, up to twice the estimated
/// discretization error (recomputation at doubled resolution).
bool distortion_vs_entropy_check(const MapFamily& mu);

}  // namespace lyapgap
