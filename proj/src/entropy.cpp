#include "lyapgap/entropy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lyapgap/errors.hpp"
#include "lyapgap/svd.hpp"

namespace lyapgap {

namespace {

constexpr double kPi = std::numbers::pi;

void check_measure(const CircleMeasure& nu) {
  if (nu.bins.empty()) throw std::invalid_argument("circle measure needs bins");
  double total = 0.0;
  for (double b : nu.bins) {
    if (!(b >= 0.0)) throw std::invalid_argument("circle measure has a negative bin");
    total += b;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("circle measure mass is not 1");
}

// Angle of the line through (x, y), folded into [0, pi).
double rp1_angle(double x, double y) {
  double a = std::atan2(y, x);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

// Piecewise-linear CDF of nu on [0, pi).
struct Cdf {
  explicit Cdf(const CircleMeasure& nu) : bins(&nu.bins) {
    prefix.resize(bins->size() + 1, 0.0);
    for (size_t i = 0; i < bins->size(); ++i) prefix[i + 1] = prefix[i] + (*bins)[i];
  }

  double at(double theta) const {
    const int n = static_cast<int>(bins->size());
    const double w = kPi / n;
    int b = static_cast<int>(theta / w);
    if (b < 0) b = 0;
    if (b >= n) b = n - 1;
    const double frac = (theta - b * w) / w;
    return prefix[b] + frac * (*bins)[b];
  }

  // Mass of the arc sweeping upward from lo to hi (mod pi).
  double arc(double lo, double hi) const {
    if (hi >= lo) return at(hi) - at(lo);
    return (prefix.back() - at(lo)) + at(hi);
  }

  const std::vector<double>* bins;
  std::vector<double> prefix;
};

}  // namespace

CircleMeasure uniform_measure(int bins) {
  if (bins < 1) throw std::invalid_argument("measure resolution must be >= 1");
  CircleMeasure nu;
  nu.bins.assign(static_cast<size_t>(bins), 1.0 / bins);
  return nu;
}

CircleMeasure make_circle_measure(std::vector<double> bins) {
  CircleMeasure nu{std::move(bins)};
  check_measure(nu);
  return nu;
}

CircleMeasure refine(const CircleMeasure& nu) {
  CircleMeasure fine;
  fine.bins.reserve(nu.bins.size() * 2);
  for (double b : nu.bins) {
    fine.bins.push_back(0.5 * b);
    fine.bins.push_back(0.5 * b);
  }
  return fine;
}

MapFamily make_map_family(std::vector<std::pair<double, Mat>> members) {
  if (members.empty()) throw std::invalid_argument("map family needs members");
  MapFamily mu;
  double total = 0.0;
  for (auto& [w, m] : members) {
    if (!(w >= 0.0)) throw std::invalid_argument("map family weight is negative");
    if (m.rows != 2 || m.cols != 2)
      throw std::invalid_argument("map family members must be 2x2");
    if (!all_finite(m) || std::abs(determinant(m)) < 1e-300)
      throw std::invalid_argument("map family member is singular");
    total += w;
    mu.members.push_back({w, std::move(m)});
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("map family weights do not sum to 1");
  return mu;
}

MapFamily compose(const MapFamily& mu2, const MapFamily& mu1) {
  std::vector<std::pair<double, Mat>> members;
  members.reserve(mu2.members.size() * mu1.members.size());
  for (const auto& f2 : mu2.members)
    for (const auto& f1 : mu1.members)
      members.emplace_back(f2.weight * f1.weight, f2.map * f1.map);
  return make_map_family(std::move(members));
}

JacobianFamily make_jacobian_family(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw std::invalid_argument("jacobian family needs atoms");
  JacobianFamily fam;
  double total = 0.0;
  for (auto [w, j] : atoms) {
    if (!(w >= 0.0)) throw std::invalid_argument("jacobian family weight is negative");
    if (!(j > 0.0) || !std::isfinite(j))
      throw std::invalid_argument("jacobian values must be positive and finite");
    total += w;
    fam.atoms.push_back({w, j});
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("jacobian family weights do not sum to 1");
  return fam;
}

double kl_divergence(const CircleMeasure& nu, const CircleMeasure& nu_tilde) {
  if (nu.bins.size() != nu_tilde.bins.size())
    throw std::invalid_argument("kl_divergence: resolution mismatch");
  double sum = 0.0;
  for (size_t b = 0; b < nu.bins.size(); ++b) {
    const double p = nu.bins[b];
    if (p == 0.0) continue;
    const double q = nu_tilde.bins[b];
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    sum += p * std::log(p / q);
  }
  // Non-negative for probability vectors; only roundoff can dip below zero.
  return sum < 0.0 ? 0.0 : sum;
}

CircleMeasure pushforward(const Mat& map, const CircleMeasure& nu) {
  if (map.rows != 2 || map.cols != 2)
    throw std::invalid_argument("pushforward: map must be 2x2");
  const double det = determinant(map);
  if (!(std::abs(det) > 1e-300)) throw numeric_error("pushforward: singular map");

  // Inverse by adjugate; only the direction matters, so dividing by det is
  // skipped and orientation is tracked separately.
  const double ia = map(1, 1), ib = -map(0, 1);
  const double ic = -map(1, 0), id = map(0, 0);

  const int n = nu.resolution();
  const double w = kPi / n;
  const Cdf cdf(nu);

  // Preimage angles of the bin endpoints, endpoint values shared between
  // adjacent bins so the total mass telescopes exactly.
  std::vector<double> phi(static_cast<size_t>(n) + 1);
  for (int b = 0; b <= n; ++b) {
    const double t = (b == n) ? kPi : b * w;
    const double x = std::cos(t), y = std::sin(t);
    double px = ia * x + ib * y;
    double py = ic * x + id * y;
    if (det < 0.0) { px = -px; py = -py; }  // adjugate/det flips direction
    phi[b] = rp1_angle(px, py);
  }

  CircleMeasure out;
  out.bins.resize(static_cast<size_t>(n));
  const bool preserves = det > 0.0;
  for (int b = 0; b < n; ++b) {
    out.bins[b] = preserves ? cdf.arc(phi[b], phi[b + 1])
                            : cdf.arc(phi[b + 1], phi[b]);
    if (out.bins[b] < 0.0) out.bins[b] = 0.0;  // ulp-level endpoint ties
  }
  return out;
}

CircleMeasure convolve(const MapFamily& mu, const CircleMeasure& nu) {
  CircleMeasure out;
  out.bins.assign(nu.bins.size(), 0.0);
  for (const auto& f : mu.members) {
    if (f.weight == 0.0) continue;
    const CircleMeasure pushed = pushforward(f.map, nu);
    for (size_t b = 0; b < out.bins.size(); ++b)
      out.bins[b] += f.weight * pushed.bins[b];
  }
  return out;
}

double mean_relative_entropy(const MapFamily& mu, const CircleMeasure& nu,
                             const CircleMeasure& nu_prime) {
  double sum = 0.0;
  for (const auto& f : mu.members) {
    if (f.weight == 0.0) continue;
    sum += f.weight * kl_divergence(pushforward(f.map, nu), nu_prime);
  }
  return sum;
}

double furstenberg_entropy(const MapFamily& mu, const CircleMeasure& nu) {
  const double v = mean_relative_entropy(mu, nu, convolve(mu, nu));
  return v < 0.0 ? 0.0 : v;
}

double pointwise_entropy(const JacobianFamily& fam) {
  double z = 0.0;
  for (const auto& atom : fam.atoms) z += atom.weight * atom.jacobian;
  if (!(z > 0.0)) throw std::invalid_argument("pointwise_entropy: zero mean Jacobian");
  double sum = 0.0;
  for (const auto& atom : fam.atoms) {
    if (atom.weight == 0.0) continue;
    const double x = atom.jacobian / z;
    sum += atom.weight * x * std::log(x);
  }
  return sum < 0.0 ? 0.0 : sum;
}

bool psi_variance_bound_check(const std::vector<std::pair<double, double>>& samples,
                              double bound) {
  if (samples.empty()) throw std::invalid_argument("psi bound check needs samples");
  if (!(bound > 0.0)) throw std::invalid_argument("psi bound check needs M > 0");
  double wsum = 0.0;
  for (auto [w, v] : samples) {
    if (!(w >= 0.0)) throw std::invalid_argument("psi bound check: negative weight");
    if (!(v > 0.0) || v > bound)
      throw std::invalid_argument("psi bound check: value outside (0, M]");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("psi bound check: zero total weight");
  double mean = 0.0;
  for (auto [w, v] : samples) mean += (w / wsum) * v;
  if (std::abs(mean - 1.0) > 1e-8)
    throw std::invalid_argument("psi bound check requires weighted mean 1");
  double psi = 0.0, var = 0.0;
  for (auto [w, v] : samples) {
    psi += (w / wsum) * v * std::log(v);
    var += (w / wsum) * (v - mean) * (v - mean);
  }
  return psi >= var / (2.0 * bound) - 1e-10;
}

double b22_family_entropy(double a, double r) {
  if (!(a > 0.0) || !(r > 0.0) || !(r < a))
    throw std::invalid_argument("b22_family_entropy requires 0 < r < a");
  constexpr int kAtoms = 1024;
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(kAtoms);
  const double width = 2.0 * r / kAtoms;
  for (int i = 0; i < kAtoms; ++i)
    atoms.emplace_back(1.0 / kAtoms, (a - r) + (i + 0.5) * width);
  return pointwise_entropy(make_jacobian_family(std::move(atoms)));
}

bool distortion_vs_entropy_check(const MapFamily& mu) {
  double lhs = 0.0;
  for (const auto& f : mu.members) {
    if (f.weight == 0.0) continue;
    const std::vector<double> s = singular_values(f.map);
    if (!(s[1] > 0.0)) throw numeric_error("distortion check: singular member");
    lhs += f.weight * std::log(s[0] / s[1]);
  }
  const double coarse = furstenberg_entropy(mu, uniform_measure(512));
  const double fine = furstenberg_entropy(mu, uniform_measure(1024));
  const double disc = std::abs(coarse - fine);
  return lhs >= coarse - 2.0 * disc;
}

}  // namespace lyapgap
