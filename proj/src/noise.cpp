#include "lyapgap/noise.hpp"

#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lyapgap/errors.hpp"
#include "lyapgap/svd.hpp"

namespace lyapgap {

namespace {

constexpr std::int64_t kDrawBudget = 2'000'000;  // attempts per sample_noise call

// Cheap operator-norm classification against a threshold t, using
// ||E||_F / sqrt(d) <= ||E||_op <= ||E||_F to dodge the SVD when possible.
bool op_norm_at_most(const Mat& e, double t) {
  const double f = frobenius_norm(e);
  if (f <= t) return true;
  if (f > std::sqrt(static_cast<double>(e.rows)) * t) return false;
  return operator_norm(e) <= t;
}

Mat draw_uniform_cube(int d, double w, RngStream& rng) {
  Mat e(d, d);
  for (double& x : e.a) x = rng.uniform(-w, w);
  return e;
}

Mat draw_gaussian(int d, double sigma, RngStream& rng) {
  Mat e(d, d);
  for (double& x : e.a) x = sigma * rng.normal();
  return e;
}

}  // namespace

struct NoiseSpec::NormCache {
  std::once_flag flag;
  double log_norm = 0.0;
};

NoiseSpec::NoiseSpec(int dim, NoiseFamily family, double scale, double cutoff)
    : dim_(dim), family_(family), scale_(scale), cutoff_(cutoff),
      norm_(std::make_shared<NormCache>()) {
  if (dim < 1) throw std::invalid_argument("noise dimension must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("noise scale must be positive");
}

NoiseSpec NoiseSpec::uniform_entries(int dim, double half_width) {
  return NoiseSpec(dim, NoiseFamily::UniformEntries, half_width, 0.0);
}

NoiseSpec NoiseSpec::uniform_entries(int dim) {
  return uniform_entries(dim, std::sqrt(3.0));
}

NoiseSpec NoiseSpec::uniform_operator_ball(int dim, double radius) {
  return NoiseSpec(dim, NoiseFamily::UniformOperatorBall, radius, 0.0);
}

NoiseSpec NoiseSpec::truncated_gaussian(int dim, double sigma, double cutoff) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("gaussian cutoff must be positive");
  return NoiseSpec(dim, NoiseFamily::TruncatedGaussian, sigma, cutoff);
}

std::string NoiseSpec::family_name() const {
  switch (family_) {
    case NoiseFamily::UniformEntries: return "uniform-entries";
    case NoiseFamily::UniformOperatorBall: return "uniform-operator-ball";
    case NoiseFamily::TruncatedGaussian: return "truncated-gaussian";
  }
  return "unknown";
}

double NoiseSpec::log_normalizer() const {
  const double n2 = static_cast<double>(dim_) * dim_;
  std::call_once(norm_->flag, [this, n2] {
    switch (family_) {
      case NoiseFamily::UniformEntries:
        norm_->log_norm = n2 * std::log(2.0 * scale_);
        return;
      case NoiseFamily::UniformOperatorBall: {
        // Volume of the operator-norm ball, estimated as acceptance rate
        // from the bounding cube [-r, r]^(d^2). Fixed internal stream keeps
        // the constant reproducible across runs and threads.
        RngStream mc(0x6f70626131ull, static_cast<std::uint64_t>(dim_),
                     static_cast<std::uint64_t>(scale_ * 4096.0));
        std::int64_t draws = 0, hits = 0;
        while (hits < 200'000 && draws < 4'000'000) {
          ++draws;
          if (op_norm_at_most(draw_uniform_cube(dim_, scale_, mc), scale_)) ++hits;
        }
        if (hits == 0)
          throw numeric_error("operator-ball volume estimate got no acceptances");
        norm_->log_norm = std::log(static_cast<double>(hits) / draws) +
                          n2 * std::log(2.0 * scale_);
        return;
      }
      case NoiseFamily::TruncatedGaussian: {
        // Acceptance probability of the operator-norm truncation.
        RngStream mc(0x747267617573ull, static_cast<std::uint64_t>(dim_),
                     static_cast<std::uint64_t>(scale_ * 4096.0) ^
                         static_cast<std::uint64_t>(cutoff_ * 4096.0));
        std::int64_t draws = 200'000, hits = 0;
        for (std::int64_t i = 0; i < draws; ++i) {
          if (op_norm_at_most(draw_gaussian(dim_, scale_, mc), cutoff_)) ++hits;
        }
        if (hits == 0)
          throw numeric_error("gaussian truncation estimate got no acceptances");
        norm_->log_norm =
            0.5 * n2 * std::log(2.0 * std::numbers::pi * scale_ * scale_) +
            std::log(static_cast<double>(hits) / draws);
        return;
      }
    }
  });
  return norm_->log_norm;
}

double NoiseSpec::tail_constant() const {
  const double p = static_cast<double>(dim_) * dim_ + 1.0;
  // sup density * (support radius)^(d^2+1) dominates density(E) ||E||^(d^2+1).
  switch (family_) {
    case NoiseFamily::UniformEntries:
      return std::exp(p * std::log(dim_ * scale_) - log_normalizer());
    case NoiseFamily::UniformOperatorBall:
      return std::exp(p * std::log(scale_) - log_normalizer());
    case NoiseFamily::TruncatedGaussian:
      return std::exp(p * std::log(cutoff_) - log_normalizer());
  }
  throw std::logic_error("unreachable noise family");
}

Mat sample_noise(const NoiseSpec& spec, RngStream& rng) {
  const int d = spec.dim();
  switch (spec.family()) {
    case NoiseFamily::UniformEntries:
      return draw_uniform_cube(d, spec.scale(), rng);
    case NoiseFamily::UniformOperatorBall:
      for (std::int64_t i = 0; i < kDrawBudget; ++i) {
        Mat e = draw_uniform_cube(d, spec.scale(), rng);
        if (op_norm_at_most(e, spec.scale())) return e;
      }
      throw numeric_error("operator-ball rejection sampling exceeded budget");
    case NoiseFamily::TruncatedGaussian:
      for (std::int64_t i = 0; i < kDrawBudget; ++i) {
        Mat e = draw_gaussian(d, spec.scale(), rng);
        if (op_norm_at_most(e, spec.cutoff())) return e;
      }
      throw numeric_error("truncated-gaussian rejection sampling exceeded budget");
  }
  throw std::logic_error("unreachable noise family");
}

double density(const NoiseSpec& spec, const Mat& e) {
  if (!spec.has_density()) throw config_error("noise family has no density");
  if (e.rows != spec.dim() || e.cols != spec.dim())
    throw std::invalid_argument("density: matrix shape does not match spec");
  switch (spec.family()) {
    case NoiseFamily::UniformEntries:
      if (max_abs(e) > spec.scale()) return 0.0;
      return std::exp(-spec.log_normalizer());
    case NoiseFamily::UniformOperatorBall:
      if (!op_norm_at_most(e, spec.scale())) return 0.0;
      return std::exp(-spec.log_normalizer());
    case NoiseFamily::TruncatedGaussian: {
      if (!op_norm_at_most(e, spec.cutoff())) return 0.0;
      const double f = frobenius_norm(e);
      return std::exp(-0.5 * f * f / (spec.scale() * spec.scale()) -
                      spec.log_normalizer());
    }
  }
  throw std::logic_error("unreachable noise family");
}

Mat perturb(const Mat& a, double eps, const Mat& e) {
  if (a.rows != e.rows || a.cols != e.cols)
    throw std::invalid_argument("perturb: shape mismatch");
  return a + scaled(e, eps);
}

MomentReport moment_report(const NoiseSpec& spec, const Mat& a, double eps,
                           double gamma, std::int64_t n, RngStream& rng) {
  const int d = spec.dim();
  if (d < 2) throw std::invalid_argument("moment_report needs dimension >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("moment_report needs gamma > 0");
  if (n < 1000) throw std::invalid_argument("moment_report needs n >= 1000");
  if (a.rows != d || a.cols != d)
    throw std::invalid_argument("moment_report: base matrix shape mismatch");

  MomentReport rep;
  rep.gamma = gamma;
  rep.gamma_prime = gamma / (2.0 - 2.0 / d);

  double sum_norm = 0.0, sum_conorm = 0.0, sum_hat = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const Mat e = sample_noise(spec, rng);
    const Mat b = perturb(a, eps, e);
    const std::vector<double> s = singular_values(b);
    if (!(s.back() > 0.0)) {
      ++rep.n_excluded;
      continue;
    }
    sum_norm += std::pow(operator_norm(e), gamma);
    sum_conorm += std::pow(1.0 / s.back(), gamma);
    double mean_log = 0.0;
    for (double sv : s) mean_log += std::log(sv);
    mean_log /= d;
    sum_hat += std::exp(rep.gamma_prime * (std::log(s.front()) - mean_log));
    ++rep.n_samples;
  }
  if (rep.n_samples == 0) throw numeric_error("moment_report: every sample was singular");
  rep.norm_moment = sum_norm / rep.n_samples;
  rep.conorm_moment = sum_conorm / rep.n_samples;
  rep.hat_norm_moment = sum_hat / rep.n_samples;
  rep.exclusion_warning = rep.n_excluded * 100 > n;
  return rep;
}

}  // namespace lyapgap
