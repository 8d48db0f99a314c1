#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "doctest.h"
#include "lyapgap/entropy.hpp"
#include "lyapgap/errors.hpp"
#include "lyapgap/matrix.hpp"
#include "lyapgap/rng.hpp"
#include "lyapgap/subspace.hpp"
#include "lyapgap/svd.hpp"

using namespace lyapgap;

namespace {

Mat rotation2(double th) {
  return Mat(2, 2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)});
}

Mat random_invertible2(RngStream& rng) {
  Mat m(2, 2);
  do {
    for (double& x : m.a) x = rng.normal();
  } while (std::abs(determinant(m)) < 5e-2);
  return m;
}

MapFamily random_family(RngStream& rng, int n) {
  std::vector<double> w(n);
  double tot = 0.0;
  for (double& x : w) {
    x = rng.uniform(0.2, 1.0);
    tot += x;
  }
  std::vector<std::pair<double, Mat>> members;
  for (int i = 0; i < n; ++i) members.push_back({w[i] / tot, random_invertible2(rng)});
  return make_map_family(members);
}

// low-frequency density rendered by exact bin integrals, so that halving the
// bin width genuinely halves the discretization error
CircleMeasure smooth_measure(int bins, double a1, double p1, double a2, double p2) {
  auto anti = [&](double t) {
    return t / M_PI + a1 * std::sin(2 * t + p1) / (2 * M_PI) +
           a2 * std::sin(4 * t + p2) / (4 * M_PI);
  };
  std::vector<double> m(bins);
  double acc = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = M_PI * b / bins, hi = M_PI * (b + 1) / bins;
    m[b] = anti(hi) - anti(lo);
    acc += m[b];
  }
  m[0] += 1.0 - acc;
  return make_circle_measure(m);
}

CircleMeasure random_measure(int bins, RngStream& rng) {
  std::vector<double> m(bins);
  double tot = 0.0;
  for (double& x : m) {
    x = rng.uniform(0.05, 1.0);
    tot += x;
  }
  double acc = 0.0;
  for (double& x : m) {
    x /= tot;
    acc += x;
  }
  m[0] += 1.0 - acc;
  return make_circle_measure(m);
}

}  // namespace

TEST_CASE("circle measures validate mass and sign") {
  auto u = uniform_measure(512);
  CHECK(u.resolution() == 512);
  double tot = 0.0;
  for (double b : u.bins) tot += b;
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS((void)make_circle_measure({0.5, -0.1, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_circle_measure({0.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_circle_measure({}), std::invalid_argument);
}

TEST_CASE("refinement splits bins exactly") {
  RngStream rng(300);
  auto nu = random_measure(64, rng);
  auto fine = refine(nu);
  REQUIRE(fine.resolution() == 128);
  for (int b = 0; b < 64; ++b) {
    CHECK(fine.bins[2 * b] == doctest::Approx(nu.bins[b] / 2).epsilon(1e-15));
    CHECK(fine.bins[2 * b + 1] == doctest::Approx(nu.bins[b] / 2).epsilon(1e-15));
  }
}

TEST_CASE("kl divergence of a measure with itself is zero") {
  RngStream rng(301);
  auto nu = random_measure(128, rng);
  CHECK(kl_divergence(nu, nu) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("kl divergence of concentrated versus uniform is log of the bin count") {
  std::vector<double> conc(512, 0.0);
  conc[0] = 1.0;
  auto nu = make_circle_measure(conc);
  CHECK(kl_divergence(nu, uniform_measure(512)) ==
        doctest::Approx(std::log(512.0)).epsilon(1e-12));
}

TEST_CASE("kl divergence two-bin hand value") {
  auto nu = make_circle_measure({0.75, 0.25});
  auto nt = make_circle_measure({0.5, 0.5});
  CHECK(kl_divergence(nu, nt) == doctest::Approx(0.13081203594113698).epsilon(1e-12));
}

TEST_CASE("kl divergence is infinite exactly on support violations") {
  auto nu = make_circle_measure({0.5, 0.5, 0.0, 0.0});
  auto nt = make_circle_measure({0.0, 0.5, 0.5, 0.0});
  const double v = kl_divergence(nu, nt);
  CHECK(std::isinf(v));
  CHECK(v > 0);
  // the reverse direction is finite: nt charges nothing outside nu... it does
  // (bin 2), so both are infinite here
  CHECK(std::isinf(kl_divergence(nt, nu)));
  // but absolute continuity gives a finite value
  auto full = make_circle_measure({0.25, 0.25, 0.25, 0.25});
  CHECK(std::isfinite(kl_divergence(nu, full)));
}

TEST_CASE("kl divergence is non-negative on random pairs") {
  RngStream rng(302);
  for (int rep = 0; rep < 200; ++rep) {
    auto a = random_measure(64, rng);
    auto b = random_measure(64, rng);
    CHECK(kl_divergence(a, b) >= 0.0);
  }
}

TEST_CASE("pushforward by the identity and by rotations") {
  RngStream rng(303);
  auto nu = random_measure(256, rng);
  auto same = pushforward(Mat::identity(2), nu);
  for (int b = 0; b < 256; ++b)
    CHECK(same.bins[b] == doctest::Approx(nu.bins[b]).epsilon(1e-10));

  // rotating by one bin width shifts the histogram by one slot
  auto shifted = pushforward(rotation2(M_PI / 256), nu);
  for (int b = 0; b < 256; ++b)
    CHECK(shifted.bins[(b + 1) % 256] == doctest::Approx(nu.bins[b]).epsilon(1e-9));
}

TEST_CASE("pushforward conserves mass for arbitrary invertible maps") {
  RngStream rng(304);
  for (int rep = 0; rep < 100; ++rep) {
    auto nu = random_measure(128, rng);
    Mat m = random_invertible2(rng);
    if (rep % 2 == 0) m = scaled(m, -1.0);  // negative determinant path
    auto out = pushforward(m, nu);
    double tot = 0.0;
    for (double b : out.bins) {
      CHECK(b >= 0.0);
      tot += b;
    }
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)pushforward(Mat(2, 2), uniform_measure(16)), numeric_error);
}

TEST_CASE("pushforward of the uniform measure matches the jacobian") {
  // density of A_* uniform at A.x is 1 / J(x)
  Mat a(2, 2, {2, 0, 0, 1});
  auto out = pushforward(a, uniform_measure(512));
  // bin 0 contains the fixed point [1:0] where J = 1/2
  CHECK(out.bins[0] * 512 == doctest::Approx(2.0).epsilon(0.01));
  // bin at pi/2 contains [0:1] where J = 2
  CHECK(out.bins[256] * 512 == doctest::Approx(0.5).epsilon(0.01));

  Mat m(2, 2, {1.3, 0.4, -0.2, 0.9});
  auto push = pushforward(m, uniform_measure(2048));
  for (double theta : {0.1, 0.9, 1.7, 2.8}) {
    // image angle of theta under the projective action
    const double x = std::cos(theta), y = std::sin(theta);
    const double ix = m(0, 0) * x + m(0, 1) * y;
    const double iy = m(1, 0) * x + m(1, 1) * y;
    double phi = std::atan2(iy, ix);
    if (phi < 0) phi += M_PI;
    if (phi >= M_PI) phi -= M_PI;
    const int bin = std::min(2047, static_cast<int>(phi / M_PI * 2048));
    const double density_at_image = push.bins[bin] * 2048;
    CHECK(density_at_image ==
          doctest::Approx(1.0 / projective_jacobian(m, theta)).epsilon(0.02));
  }
}

TEST_CASE("map families validate their members") {
  CHECK_THROWS_AS((void)make_map_family({}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_map_family({{1.0, Mat(2, 2)}}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_map_family({{0.4, Mat::identity(2)}}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_map_family({{0.5, Mat::identity(2)}, {0.5, Mat::identity(3)}}),
                  std::invalid_argument);
}

TEST_CASE("convolution with one member is its pushforward") {
  RngStream rng(306);
  auto nu = random_measure(128, rng);
  Mat m = random_invertible2(rng);
  auto fam = make_map_family({{1.0, m}});
  auto conv = convolve(fam, nu);
  auto push = pushforward(m, nu);
  for (int b = 0; b < 128; ++b)
    CHECK(conv.bins[b] == doctest::Approx(push.bins[b]).epsilon(1e-12));
}

TEST_CASE("rotation families preserve the uniform measure") {
  auto fam = make_map_family({{0.5, rotation2(0.8)}, {0.5, rotation2(-0.8)}});
  auto out = convolve(fam, uniform_measure(256));
  for (double b : out.bins) CHECK(b == doctest::Approx(1.0 / 256).epsilon(1e-10));
}

TEST_CASE("convolution conserves mass") {
  RngStream rng(307);
  for (int rep = 0; rep < 20; ++rep) {
    auto fam = random_family(rng, 2 + rep % 4);
    auto nu = random_measure(64, rng);
    auto out = convolve(fam, nu);
    double tot = 0.0;
    for (double b : out.bins) tot += b;
    CHECK(std::abs(tot - 1.0) <= 1e-10);
  }
}

TEST_CASE("mean relative entropy is minimized at the convolution") {
  RngStream rng(308);
  for (int rep = 0; rep < 25; ++rep) {
    auto fam = random_family(rng, 2 + rep % 3);
    auto nu = random_measure(64, rng);
    const double at_min = mean_relative_entropy(fam, nu, convolve(fam, nu));
    CHECK(at_min == doctest::Approx(furstenberg_entropy(fam, nu)).epsilon(1e-12));
    for (int c = 0; c < 20; ++c) {
      auto cand = random_measure(64, rng);
      CHECK(mean_relative_entropy(fam, nu, cand) >= at_min - 1e-12);
    }
  }
}

TEST_CASE("identity-only families carry zero entropy") {
  RngStream rng(309);
  auto nu = random_measure(128, rng);
  auto fam = make_map_family({{1.0, Mat::identity(2)}});
  CHECK(mean_relative_entropy(fam, nu, nu) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(furstenberg_entropy(fam, nu) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("single-member and rotation families have zero furstenberg entropy") {
  RngStream rng(310);
  auto nu = random_measure(128, rng);
  auto one = make_map_family({{1.0, random_invertible2(rng)}});
  CHECK(furstenberg_entropy(one, nu) <= 1e-12);

  auto rots = make_map_family({{0.3, rotation2(0.4)}, {0.7, rotation2(1.9)}});
  CHECK(furstenberg_entropy(rots, uniform_measure(256)) <= 1e-12);
}

TEST_CASE("two-rotation family on uniform has zero mean relative entropy") {
  auto fam = make_map_family({{0.5, rotation2(0.6)}, {0.5, rotation2(-0.6)}});
  auto u = uniform_measure(256);
  CHECK(mean_relative_entropy(fam, u, u) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("entropy composes along convolution up to discretization error") {
  RngStream rng(31);
  auto mu1 = random_family(rng, 3);
  auto mu2 = random_family(rng, 2);
  double residual[2];
  int idx = 0;
  for (int bins : {512, 1024}) {
    auto nu = smooth_measure(bins, 0.4, 1.1, -0.25, 2.3);
    const double lhs = furstenberg_entropy(compose(mu2, mu1), nu);
    const double rhs = furstenberg_entropy(mu1, nu) + furstenberg_entropy(mu2, convolve(mu1, nu));
    residual[idx++] = std::abs(lhs - rhs);
  }
  CHECK(residual[0] <= 1e-4);
  CHECK(residual[1] < residual[0]);  // doubling the bins shrinks the defect

  // superadditivity follows: the composed family carries at least the
  // entropy of its first stage, up to the measured defect
  auto nu = smooth_measure(512, 0.4, 1.1, -0.25, 2.3);
  const double composed = furstenberg_entropy(compose(mu2, mu1), nu);
  const double first = furstenberg_entropy(mu1, nu);
  CHECK(composed >= first - residual[0] - 1e-12);
}

TEST_CASE("composed families multiply weights pairwise") {
  RngStream rng(311);
  auto mu1 = random_family(rng, 3);
  auto mu2 = random_family(rng, 2);
  auto both = compose(mu2, mu1);
  REQUIRE(both.members.size() == 6);
  double tot = 0.0;
  for (const auto& m : both.members) tot += m.weight;
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
  // staged convolution rebins between stages, so it matches the direct
  // composition exactly only when every pushforward is bin-exact; rotations
  // by whole bins are, and there staging commutes to machine precision
  auto nu = random_measure(64, rng);
  auto rots1 = make_map_family(
      {{0.5, rotation2(5 * M_PI / 64)}, {0.5, rotation2(-9 * M_PI / 64)}});
  auto rots2 = make_map_family(
      {{0.25, rotation2(2 * M_PI / 64)}, {0.75, rotation2(17 * M_PI / 64)}});
  auto staged = convolve(rots2, convolve(rots1, nu));
  auto direct = convolve(compose(rots2, rots1), nu);
  for (int b = 0; b < 64; ++b)
    CHECK(direct.bins[b] == doctest::Approx(staged.bins[b]).epsilon(1e-8));

  // for general families both routes still conserve mass exactly
  double staged_mass = 0.0, direct_mass = 0.0;
  auto staged_gen = convolve(mu2, convolve(mu1, nu));
  auto direct_gen = convolve(both, nu);
  for (int b = 0; b < 64; ++b) {
    staged_mass += staged_gen.bins[b];
    direct_mass += direct_gen.bins[b];
  }
  CHECK(staged_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(direct_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pointwise entropy of flat and two-value families") {
  auto flat = make_jacobian_family({{0.25, 2.0}, {0.25, 2.0}, {0.5, 2.0}});
  CHECK(pointwise_entropy(flat) == doctest::Approx(0.0).epsilon(1e-14));

  auto two = make_jacobian_family({{0.5, 1.0}, {0.5, 3.0}});
  CHECK(pointwise_entropy(two) == doctest::Approx(0.13081203594113698).epsilon(1e-12));
}

TEST_CASE("pointwise entropy ignores a common jacobian scale") {
  RngStream rng(312);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + rep % 5;
    std::vector<std::pair<double, double>> atoms, scaled_atoms;
    std::vector<double> w(n);
    double tot = 0.0;
    for (double& x : w) {
      x = rng.uniform(0.1, 1.0);
      tot += x;
    }
    const double lambda = rng.uniform(0.1, 9.0);
    for (int i = 0; i < n; ++i) {
      const double j = rng.uniform(0.2, 5.0);
      atoms.push_back({w[i] / tot, j});
      scaled_atoms.push_back({w[i] / tot, lambda * j});
    }
    const double a = pointwise_entropy(make_jacobian_family(atoms));
    const double b = pointwise_entropy(make_jacobian_family(scaled_atoms));
    CHECK(a >= 0.0);
    CHECK(std::abs(a - b) <= 1e-10);
  }
}

TEST_CASE("psi lower bound on constants and uniform atoms") {
  CHECK(psi_variance_bound_check({{1.0, 1.0}}, 1.0));

  // midpoint atoms of the uniform law on [0.5, 1.5]
  std::vector<std::pair<double, double>> atoms;
  const int n = 4096;
  for (int i = 0; i < n; ++i) atoms.push_back({1.0 / n, 0.5 + (i + 0.5) / n});
  CHECK(psi_variance_bound_check(atoms, 1.5));
}

TEST_CASE("psi lower bound holds for random bounded families") {
  RngStream rng(313);
  for (int rep = 0; rep < 10000; ++rep) {
    const int n = 2 + rep % 7;
    std::vector<double> w(n), v(n);
    double tot = 0.0, mean = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = rng.uniform(0.05, 1.0);
      tot += w[i];
    }
    for (int i = 0; i < n; ++i) {
      w[i] /= tot;
      v[i] = rng.uniform(0.05, 4.0);
      mean += w[i] * v[i];
    }
    std::vector<std::pair<double, double>> atoms;
    double big = 0.0;
    for (int i = 0; i < n; ++i) {
      atoms.push_back({w[i], v[i] / mean});
      big = std::max(big, v[i] / mean);
    }
    CHECK(psi_variance_bound_check(atoms, big));
  }
}

TEST_CASE("psi bound check rejects malformed input") {
  CHECK_THROWS_AS((void)psi_variance_bound_check({}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)psi_variance_bound_check({{1.0, 2.0}}, 1.0),
                  std::invalid_argument);  // value above M
  CHECK_THROWS_AS((void)psi_variance_bound_check({{1.0, 0.5}}, 1.0),
                  std::invalid_argument);  // mean not 1
}

TEST_CASE("triangular family entropy value and lower bound") {
  const double v = b22_family_entropy(1.0, 0.5);
  CHECK(std::abs(v - 0.04279164419167811) <= 5e-7);
  CHECK(v >= (1.0 / 12.0) * 0.25);

  // small width behaves like the quadratic lower bound
  CHECK(b22_family_entropy(1.0, 1e-3) <= 1e-5);
  CHECK(b22_family_entropy(1.0, 1e-3) >= (1.0 / 12.0) * 1e-6 * 0.9);

  // depends only on r/a
  for (double lambda : {0.1, 3.0, 42.0}) {
    CHECK(std::abs(b22_family_entropy(lambda, 0.5 * lambda) - v) <= 1e-10);
  }

  CHECK_THROWS_AS((void)b22_family_entropy(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)b22_family_entropy(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)b22_family_entropy(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("volume distortion dominates entropy from the uniform measure") {
  auto rots = make_map_family({{0.5, rotation2(0.3)}, {0.5, rotation2(2.1)}});
  CHECK(distortion_vs_entropy_check(rots));

  auto one = make_map_family({{1.0, Mat(2, 2, {2, 0, 0, 1})}});
  CHECK(distortion_vs_entropy_check(one));

  RngStream rng(314);
  for (int rep = 0; rep < 50; ++rep) {
    auto fam = random_family(rng, 2 + rep % 4);
    CHECK(distortion_vs_entropy_check(fam));
  }
}
