#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "lyapgap/matrix.hpp"
#include "lyapgap/rng.hpp"

namespace lyapgap {

// Family of additive noise laws on d x d real matrices. All built-in
// families are absolutely continuous with a known (possibly MC-normalized)
// density, so they can drive both sampling and density-based diagnostics.
enum class NoiseFamily {
  // iid entries uniform on [-half_width, half_width]. With half_width =
  // sqrt(3) the entries have mean zero and unit variance, and the law has
  // bounded support.
  UniformEntries,
  // Uniform (Lebesgue) on the operator-norm ball { ||E||_op <= radius }.
  UniformOperatorBall,
  // iid Gaussian entries with scale sigma, conditioned on
  // ||E||_op <= cutoff, renormalized. Continuous, bounded, compactly
  // supported.
  TruncatedGaussian,
};

class NoiseSpec {
 public:
  static NoiseSpec uniform_entries(int dim, double half_width);
  // Convenience: half_width = sqrt(3), unit entry variance.
  static NoiseSpec uniform_entries(int dim);
  static NoiseSpec uniform_operator_ball(int dim, double radius);
  static NoiseSpec truncated_gaussian(int dim, double sigma, double cutoff = 10.0);

  int dim() const { return dim_; }
  NoiseFamily family() const { return family_; }
  // Meaning depends on family: half_width, radius, or sigma.
  double scale() const { return scale_; }
  double cutoff() const { return cutoff_; }
  std::string family_name() const;

  // Every built-in family is absolutely continuous.
  bool has_density() const { return true; }

  // Normalization constant so that density integrates to 1. Analytic for
  // UniformEntries; estimated once by Monte Carlo (internal fixed stream)
  // and cached for the other families. Thread-safe.
  double log_normalizer() const;

  // Constant C such that density(E) <= C / ||E||_op^(d^2+1) for all E.
  // Trivial for compactly supported families: sup density * cutoff^(d^2+1).
  double tail_constant() const;

 private:
  NoiseSpec(int dim, NoiseFamily family, double scale, double cutoff);

  struct NormCache;

  int dim_ = 0;
  NoiseFamily family_ = NoiseFamily::UniformEntries;
  double scale_ = 0.0;
  double cutoff_ = 0.0;
  std::shared_ptr<NormCache> norm_;  // lazily filled, shared across copies
};

// Draw one matrix from the law. Rejection sampling where the support is an
// operator-norm ball; throws numeric_error if the acceptance rate is so low
// that a single draw exceeds an internal attempt budget (only reachable for
// UniformOperatorBall in high dimension).
Mat sample_noise(const NoiseSpec& spec, RngStream& rng);

// Density of the law at E, in Lebesgue measure on R^(d x d).
double density(const NoiseSpec& spec, const Mat& e);

// A + eps * E. Affine in both eps and E.
Mat perturb(const Mat& a, double eps, const Mat& e);

struct MomentReport {
  double gamma = 0.0;        // exponent used for norm/conorm moments
  double gamma_prime = 0.0;  // gamma / (2 - 2/d), used for the hat moment
  double norm_moment = 0.0;  // mean ||E||^gamma
  double conorm_moment = 0.0;   // mean ||(A + eps E)^{-1}||^gamma
  double hat_norm_moment = 0.0; // mean ||hat(A + eps E)||^gamma'
  std::int64_t n_samples = 0;   // samples actually used
  std::int64_t n_excluded = 0;  // singular samples dropped
  bool exclusion_warning = false;  // set when > 1% of draws were dropped
};

// Empirical moments of the noise norm and of the perturbed inverse, plus
// the det-normalized norm moment. Samples with s_d = 0 are excluded and
// counted; more than 1% exclusions sets exclusion_warning. Requires
// gamma > 0 and n >= 1000.
MomentReport moment_report(const NoiseSpec& spec, const Mat& a, double eps,
                           double gamma, std::int64_t n, RngStream& rng);

}  // namespace lyapgap
