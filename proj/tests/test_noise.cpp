#include <cmath>
#include <vector>

#include "doctest.h"
#include "lyapgap/errors.hpp"
#include "lyapgap/matrix.hpp"
#include "lyapgap/noise.hpp"
#include "lyapgap/rng.hpp"
#include "lyapgap/svd.hpp"

using namespace lyapgap;

TEST_CASE("uniform entry noise has unit variance at the default width") {
  auto spec = NoiseSpec::uniform_entries(3);
  CHECK(spec.scale() == doctest::Approx(std::sqrt(3.0)));
  RngStream rng(100);
  double sum = 0.0, sumsq = 0.0;
  long count = 0;
  const double w = std::sqrt(3.0);
  for (int i = 0; i < 100000; ++i) {
    Mat e = sample_noise(spec, rng);
    for (double x : e.a) {
      CHECK(std::abs(x) <= w);
      sum += x;
      sumsq += x * x;
      ++count;
    }
  }
  CHECK(std::abs(sum / count) <= 0.02);
  CHECK(std::abs(sumsq / count - 1.0) <= 0.02);
}

TEST_CASE("uniform entry noise has identity entry covariance") {
  // E[E_ij E_kl] = delta_ik delta_jl
  auto spec = NoiseSpec::uniform_entries(2);
  RngStream rng(101);
  const int n = 100000;
  double cov[4][4] = {};
  for (int t = 0; t < n; ++t) {
    Mat e = sample_noise(spec, rng);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) cov[p][q] += e.a[p] * e.a[q];
  }
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const double want = (p == q) ? 1.0 : 0.0;
      CHECK(std::abs(cov[p][q] / n - want) <= 0.02);
    }
}

TEST_CASE("operator ball noise respects its support") {
  auto spec = NoiseSpec::uniform_operator_ball(3, 1.0);
  RngStream rng(102);
  for (int i = 0; i < 1000; ++i) {
    Mat e = sample_noise(spec, rng);
    CHECK(operator_norm(e) <= 1.0 + 1e-12);
  }
}

TEST_CASE("truncated gaussian noise respects its cutoff") {
  auto spec = NoiseSpec::truncated_gaussian(2, 1.0, 1.5);
  RngStream rng(103);
  for (int i = 0; i < 1000; ++i) {
    Mat e = sample_noise(spec, rng);
    CHECK(operator_norm(e) <= 1.5 + 1e-12);
  }
}

TEST_CASE("densities vanish off the support and peak at zero") {
  auto ball = NoiseSpec::uniform_operator_ball(2, 1.0);
  Mat big = scaled(Mat::identity(2), 2.0);
  CHECK(density(ball, big) == 0.0);

  auto gauss = NoiseSpec::truncated_gaussian(2, 0.5, 1.2);
  const double at_zero = density(gauss, Mat(2, 2));
  CHECK(at_zero > 0.0);
  RngStream rng(104);
  for (int i = 0; i < 200; ++i) {
    Mat e = sample_noise(gauss, rng);
    CHECK(density(gauss, e) <= at_zero * (1.0 + 1e-12));
    CHECK(density(gauss, e) > 0.0);
  }
}

TEST_CASE("operator ball density integrates to one") {
  // uniform box [-1,1]^4 covers the support (entries are bounded by the
  // operator norm), so a box average times its volume is the integral
  auto spec = NoiseSpec::uniform_operator_ball(2, 1.0);
  RngStream rng(123, 9, 9);
  const long n = 400000;
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    Mat e(2, 2);
    for (double& x : e.a) x = rng.uniform(-1.0, 1.0);
    acc += density(spec, e);
  }
  CHECK(std::abs(acc / n * 16.0 - 1.0) <= 0.01);
}

TEST_CASE("truncated gaussian density integrates to one") {
  // importance sample from the untruncated entrywise gaussian
  auto spec = NoiseSpec::truncated_gaussian(2, 0.5, 1.2);
  RngStream rng(321, 4, 4);
  const long n = 200000;
  const double sigma = 0.5;
  const double log_ref = -2.0 * std::log(2.0 * M_PI * sigma * sigma);
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    Mat e(2, 2);
    double q = 0.0;
    for (double& x : e.a) {
      x = sigma * rng.normal();
      q += x * x;
    }
    acc += density(spec, e) / std::exp(log_ref - q / (2.0 * sigma * sigma));
  }
  CHECK(std::abs(acc / n - 1.0) <= 0.01);
}

TEST_CASE("perturbation is affine in both arguments") {
  CHECK(max_abs(perturb(Mat::identity(3), 0.0, Mat(3, 3)) - Mat::identity(3)) == 0.0);

  Mat a(2, 2, {1.5, -0.5, 2.0, 0.25});
  CHECK(max_abs(perturb(a, 1.0, scaled(a, -1.0))) <= 1e-15);

  Mat d21(2, 2, {2, 0, 0, 1});
  Mat p = perturb(d21, 0.1, Mat::identity(2));
  CHECK(p(0, 0) == doctest::Approx(2.1));
  CHECK(p(1, 1) == doctest::Approx(1.1));
  CHECK(p(0, 1) == 0.0);

  RngStream rng(105);
  Mat e(3, 3);
  for (double& x : e.a) x = rng.normal();
  Mat base(3, 3);
  for (double& x : base.a) x = rng.normal();
  // linearity in eps
  Mat lhs = perturb(base, 0.7, e) - perturb(base, 0.3, e);
  Mat rhs = scaled(e, 0.4);
  CHECK(max_abs(lhs - rhs) <= 1e-12);
}

TEST_CASE("noise specs validate their parameters") {
  CHECK_THROWS_AS(NoiseSpec::uniform_entries(0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::uniform_entries(2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::uniform_operator_ball(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::truncated_gaussian(2, 1.0, -3.0), std::invalid_argument);
}

TEST_CASE("family names are stable identifiers") {
  CHECK(NoiseSpec::uniform_entries(2).family_name() == "uniform-entries");
  CHECK(NoiseSpec::uniform_operator_ball(2, 1.0).family_name() == "uniform-operator-ball");
  CHECK(NoiseSpec::truncated_gaussian(2, 1.0).family_name() == "truncated-gaussian");
}

TEST_CASE("tail constants dominate the density") {
  RngStream rng(106);
  for (auto spec : {NoiseSpec::uniform_entries(2), NoiseSpec::uniform_operator_ball(2, 1.0),
                    NoiseSpec::truncated_gaussian(2, 0.7, 2.0)}) {
    const double c = spec.tail_constant();
    CHECK(c > 0.0);
    for (int i = 0; i < 200; ++i) {
      Mat e = sample_noise(spec, rng);
      const double nrm = operator_norm(e);
      if (nrm <= 0.0) continue;
      CHECK(density(spec, e) <= c / std::pow(nrm, 5.0) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("moment report on the operator ball near the identity") {
  auto spec = NoiseSpec::uniform_operator_ball(2, 1.0);
  RngStream rng(9);
  auto rep = moment_report(spec, Mat::identity(2), 0.1, 1.0, 20000, rng);
  CHECK(rep.gamma == 1.0);
  CHECK(rep.gamma_prime == doctest::Approx(1.0));  // gamma / (2 - 2/d) with d = 2
  CHECK(rep.n_samples == 20000);
  CHECK(rep.n_excluded == 0);
  CHECK_FALSE(rep.exclusion_warning);
  // ||E|| <= 1 on the support
  CHECK(rep.norm_moment <= 1.0);
  CHECK(rep.norm_moment > 0.0);
  // Neumann bounds: 1/1.1 <= ||(I + 0.1 E)^-1|| <= 1/0.9
  CHECK(rep.conorm_moment >= 1.0 / 1.1);
  CHECK(rep.conorm_moment <= 1.0 / 0.9);
  // det-normalized operators have norm at least 1
  CHECK(rep.hat_norm_moment >= 1.0);
}

TEST_CASE("moment report requires a positive exponent and enough samples") {
  auto spec = NoiseSpec::uniform_entries(2);
  RngStream rng(107);
  CHECK_THROWS_AS((void)moment_report(spec, Mat::identity(2), 0.1, 0.0, 2000, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)moment_report(spec, Mat::identity(2), 0.1, 1.0, 10, rng),
                  std::invalid_argument);
}

TEST_CASE("det-normalized norm inequality holds sample by sample") {
  // ||B^|| and ||B^{-1}^|| are both at most (||B|| ||B^{-1}||)^((d-1)/d)
  RngStream rng(108);
  auto spec = NoiseSpec::uniform_entries(3);
  for (int i = 0; i < 500; ++i) {
    Mat b = perturb(Mat::identity(3), 0.2, sample_noise(spec, rng));
    auto s = singular_values(b);
    if (!(s.back() > 1e-12)) continue;
    double logdet = 0.0;
    for (double x : s) logdet += std::log(x);
    const double lhs_top = std::log(s.front()) - logdet / 3.0;
    const double lhs_bot = logdet / 3.0 - std::log(s.back());
    const double rhs = (2.0 / 3.0) * (std::log(s.front()) - std::log(s.back()));
    CHECK(lhs_top <= rhs + 1e-10);
    CHECK(lhs_bot <= rhs + 1e-10);
  }
}
