#include "lyapgap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "lyapgap/entropy.hpp"
#include "lyapgap/errors.hpp"
#include "lyapgap/flags.hpp"
#include "lyapgap/svd.hpp"

namespace lyapgap {

namespace {

using nlohmann::json;

int resolve_jobs(int jobs, std::int64_t n_tasks) {
  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  return static_cast<int>(std::min<std::int64_t>(jobs, n_tasks));
}

/// Run fn(0..n_tasks) on a worker pool. The first exception wins and is
/// rethrown on the calling thread after all workers drain.
void parallel_for(std::int64_t n_tasks, int jobs,
                  const std::function<void(std::int64_t)>& fn) {
  if (n_tasks <= 0) return;
  jobs = resolve_jobs(jobs, n_tasks);
  if (jobs == 1) {
    for (std::int64_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> bail{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!bail.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        bail.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(jobs));
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r_squared = 1.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < n; ++i) { xm += x[i]; ym += y[i]; }
  xm /= n; ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw config_error("degenerate fit: no spread in the regressor");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = y[i] - (fit.slope * x[i] + fit.intercept);
      ss_res += r * r;
    }
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

struct MeanStderr {
  double mean = 0.0, se = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  const size_t n = v.size();
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(n);
  if (n > 1) {
    double var = 0.0;
    for (double x : v) var += (x - out.mean) * (x - out.mean);
    var /= static_cast<double>(n - 1);
    out.se = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

// --- CSV emission (fixed, versioned schema) --------------------------------

constexpr int kSchemaVersion = 1;

void csv_header(std::ostream& out) {
  out << "schema_version,experiment,d,k,eps,n,trial,seed,log_sk_over_n,gap_k,stderr\n";
}

void csv_row(std::ostream& out, const std::string& experiment, int d, int k,
             double eps, std::int64_t n, std::int64_t trial, std::uint64_t seed,
             double log_sk_over_n, const std::string& gap_k,
             const std::string& stderr_col) {
  out << kSchemaVersion << ',' << experiment << ',' << d << ',' << k << ','
      << fmt17(eps) << ',' << n << ',' << trial << ',' << seed << ','
      << fmt17(log_sk_over_n) << ',' << gap_k << ',' << stderr_col << '\n';
}

// --- experiment bodies ------------------------------------------------------

void run_products(const ExperimentConfig& cfg, int jobs, RunSummary& summary,
                  std::ostream& csv) {
  const BaseSequence& seq = *cfg.base_seq;
  const NoiseSpec& noise = *cfg.noise;
  const int d = cfg.d;
  const std::int64_t trials = cfg.trials;
  const std::int64_t n_eps = static_cast<std::int64_t>(cfg.eps_list.size());

  std::vector<GapTrace> traces(static_cast<size_t>(n_eps * trials));
  parallel_for(n_eps * trials, jobs, [&](std::int64_t i) {
    const std::int64_t e = i / trials;
    traces[static_cast<size_t>(i)] =
        run_product(seq, noise, cfg.eps_list[static_cast<size_t>(e)], cfg.n,
                    cfg.checkpoint_every, cfg.seed, i);
  });

  // Across-trial aggregates at the final checkpoint.
  std::vector<std::vector<double>> exp_raw(static_cast<size_t>(d));
  std::vector<std::vector<double>> exp_centered(static_cast<size_t>(d));
  for (std::int64_t e = 0; e < n_eps; ++e) {
    const double eps = cfg.eps_list[static_cast<size_t>(e)];
    for (int k = 0; k + 1 < d; ++k) {
      std::vector<double> rates;
      rates.reserve(static_cast<size_t>(trials));
      for (std::int64_t t = 0; t < trials; ++t) {
        const GapCheckpoint& fin =
            traces[static_cast<size_t>(e * trials + t)].checkpoints.back();
        rates.push_back(fin.gaps[static_cast<size_t>(k)] /
                        static_cast<double>(fin.n));
      }
      const MeanStderr ms = mean_stderr(rates);
      summary.gap_stats.push_back({eps, k + 1, ms.mean, ms.se});
    }
  }
  for (std::int64_t t = 0; t < trials; ++t) {
    // Exponent summaries come from the first eps entry (the
    // appendix-exponents experiment runs a single eps).
    const GapCheckpoint& fin = traces[static_cast<size_t>(t)].checkpoints.back();
    double center = 0.0;
    for (int k = 0; k < d; ++k)
      center += fin.log_sk[static_cast<size_t>(k)] / static_cast<double>(fin.n);
    center /= d;
    for (int k = 0; k < d; ++k) {
      const double est = fin.log_sk[static_cast<size_t>(k)] / static_cast<double>(fin.n);
      exp_raw[static_cast<size_t>(k)].push_back(est);
      exp_centered[static_cast<size_t>(k)].push_back(est - center);
    }
  }
  for (int k = 0; k < d; ++k) {
    const MeanStderr raw = mean_stderr(exp_raw[static_cast<size_t>(k)]);
    summary.exponents_raw.push_back(raw.mean);
    summary.exponents_raw_stderr.push_back(raw.se);
    summary.exponents_centered.push_back(
        mean_stderr(exp_centered[static_cast<size_t>(k)]).mean);
  }

  if (std::set<double>(cfg.eps_list.begin(), cfg.eps_list.end()).size() >= 3) {
    std::vector<std::pair<double, double>> rows;
    for (const GapStat& gs : summary.gap_stats)
      rows.emplace_back(gs.eps, gs.mean_gap_rate);
    summary.fit = fit_eps_squared_slope(rows);
  }

  // stderr of the (eps, k) cell, repeated on that cell's final-checkpoint rows.
  auto cell_stderr = [&](double eps, int k) {
    for (const GapStat& gs : summary.gap_stats)
      if (gs.eps == eps && gs.k == k) return fmt17(gs.stderr_);
    return std::string();
  };
  for (std::int64_t e = 0; e < n_eps; ++e) {
    const double eps = cfg.eps_list[static_cast<size_t>(e)];
    for (std::int64_t t = 0; t < trials; ++t) {
      const GapTrace& tr = traces[static_cast<size_t>(e * trials + t)];
      for (const GapCheckpoint& cp : tr.checkpoints) {
        const bool final_cp = (&cp == &tr.checkpoints.back());
        for (int k = 0; k < d; ++k) {
          const double inv_n = 1.0 / static_cast<double>(cp.n);
          const bool has_gap = k + 1 < d;
          csv_row(csv, cfg.experiment, d, k + 1, eps, cp.n, e * trials + t,
                  cfg.seed, cp.log_sk[static_cast<size_t>(k)] * inv_n,
                  has_gap ? fmt17(cp.gaps[static_cast<size_t>(k)] * inv_n) : "",
                  (has_gap && final_cp) ? cell_stderr(eps, k + 1) : "");
        }
      }
    }
  }
}

void run_gapest(const ExperimentConfig& cfg, int jobs, RunSummary& summary,
                std::ostream& csv) {
  const int d = cfg.d;
  const int k = *cfg.k;
  const std::int64_t n_m = static_cast<std::int64_t>(cfg.m_list.size());
  summary.gapest_rows.resize(static_cast<size_t>(n_m));

  parallel_for(n_m, jobs, [&](std::int64_t i) {
    const int m = cfg.m_list[static_cast<size_t>(i)];
    Mat b(d, d);
    // diag(10^m, ..., 10^-m), geometric in between, non-increasing.
    std::vector<double> expo(static_cast<size_t>(d));
    for (int r = 0; r < d; ++r) {
      expo[static_cast<size_t>(r)] =
          m * (1.0 - 2.0 * r / static_cast<double>(d - 1));
      b(r, r) = std::pow(10.0, expo[static_cast<size_t>(r)]);
    }
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(m), 0);
    const GapAverage ga = gap_average(b, k, cfg.trials, rng);
    GapestRow row;
    row.m = m;
    row.mean = ga.mean;
    row.stderr_ = ga.stderr_;
    row.expected = (expo[static_cast<size_t>(k - 1)] - expo[static_cast<size_t>(k)]) *
                   std::log(10.0);
    row.deviation = std::abs(ga.mean - row.expected);
    summary.gapest_rows[static_cast<size_t>(i)] = row;
  });

  if (n_m >= 3) {
    std::vector<double> xs, ys;
    for (const GapestRow& row : summary.gapest_rows) {
      xs.push_back(row.m);
      ys.push_back(row.deviation);
    }
    const LinearFit lf = linear_fit(xs, ys);
    summary.fit = FitResult{lf.slope, lf.intercept, lf.r_squared};
  }

  for (const GapestRow& row : summary.gapest_rows)
    csv_row(csv, cfg.experiment, d, k, 0.0, row.m, 0, cfg.seed, row.mean,
            fmt17(row.expected), fmt17(row.stderr_));
}

MapFamily random_family(RngStream& rng, int min_members = 2, int max_members = 5) {
  const int count =
      min_members + static_cast<int>(rng.next_u64() %
                                     static_cast<std::uint64_t>(max_members - min_members + 1));
  std::vector<std::pair<double, Mat>> members;
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    Mat m(2, 2);
    do {
      for (double& x : m.a) x = rng.normal();
    } while (std::abs(determinant(m)) < 5e-2);
    const double w = rng.uniform01() + 0.05;
    total += w;
    members.emplace_back(w, std::move(m));
  }
  for (auto& [w, m] : members) w /= total;
  // Absorb the normalization roundoff into the heaviest member so the
  // weights sum to 1 exactly enough for the validator.
  double sum = 0.0;
  for (auto& [w, m] : members) sum += w;
  members.front().first += 1.0 - sum;
  return make_map_family(std::move(members));
}

CircleMeasure random_measure(int bins, RngStream& rng) {
  std::vector<double> mass(static_cast<size_t>(bins));
  double total = 0.0;
  for (double& x : mass) { x = rng.uniform01() + 0.05; total += x; }
  for (double& x : mass) x /= total;
  double sum = 0.0;
  for (double x : mass) sum += x;
  mass.front() += 1.0 - sum;
  return make_circle_measure(std::move(mass));
}

/// Low-frequency density 1 + a1 cos(2θ+p1) + a2 cos(4θ+p2) on the
/// projective line, |a1|+|a2| < 1. Bin masses are exact integrals, so the
/// same density can be rendered at any resolution; discretization-error
/// estimates need this smoothness (an iid-bin measure has O(1) density
/// jumps at bin scale and its binning error does not contract).
struct SmoothDensity {
  double a1 = 0.0, p1 = 0.0, a2 = 0.0, p2 = 0.0;

  static SmoothDensity random(RngStream& rng) {
    SmoothDensity s;
    s.a1 = rng.uniform(-0.55, 0.55);
    s.a2 = rng.uniform(-0.35, 0.35);
    s.p1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    s.p2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return s;
  }

  CircleMeasure render(int bins) const {
    const double pi = std::numbers::pi;
    std::vector<double> mass(static_cast<size_t>(bins));
    auto antideriv = [&](double t) {
      return t / pi + a1 * std::sin(2.0 * t + p1) / (2.0 * pi) +
             a2 * std::sin(4.0 * t + p2) / (4.0 * pi);
    };
    double sum = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double lo = b * pi / bins;
      const double hi = (b + 1) * pi / bins;
      mass[static_cast<size_t>(b)] = antideriv(hi) - antideriv(lo);
      sum += mass[static_cast<size_t>(b)];
    }
    mass.front() += 1.0 - sum;
    return make_circle_measure(std::move(mass));
  }
};

void run_entropy(const ExperimentConfig& cfg, int jobs, RunSummary& summary,
                 std::ostream& csv) {
  const std::int64_t trials = cfg.trials;
  struct TrialResult {
    double phi = 0.0;
    double distortion_slack = 0.0;
    double residual_coarse = 0.0;
    double residual_fine = 0.0;
    bool minimizer_ok = true, psi_ok = true, distortion_ok = true;
  };
  std::vector<TrialResult> results(static_cast<size_t>(trials));

  parallel_for(trials, jobs, [&](std::int64_t t) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(t), 0);
    TrialResult& res = results[static_cast<size_t>(t)];

    const MapFamily mu1 = random_family(rng);
    const MapFamily mu2 = random_family(rng);
    const SmoothDensity profile = SmoothDensity::random(rng);
    const CircleMeasure nu = profile.render(cfg.bins);

    res.phi = furstenberg_entropy(mu1, nu);
    for (int c = 0; c < 5; ++c) {
      const CircleMeasure cand = random_measure(cfg.bins, rng);
      if (mean_relative_entropy(mu1, nu, cand) < res.phi - 1e-12)
        res.minimizer_ok = false;
    }

    const MapFamily composed = compose(mu2, mu1);
    res.residual_coarse = std::abs(furstenberg_entropy(composed, nu) -
                                   furstenberg_entropy(mu1, nu) -
                                   furstenberg_entropy(mu2, convolve(mu1, nu)));
    const CircleMeasure nu2 = profile.render(2 * cfg.bins);
    res.residual_fine = std::abs(furstenberg_entropy(composed, nu2) -
                                 furstenberg_entropy(mu1, nu2) -
                                 furstenberg_entropy(mu2, convolve(mu1, nu2)));

    std::vector<std::pair<double, double>> atoms;
    double mean = 0.0, wsum = 0.0;
    for (int i = 0; i < 16; ++i) {
      const double w = rng.uniform01() + 0.05;
      const double v = 0.1 + 3.0 * rng.uniform01();
      atoms.emplace_back(w, v);
      mean += w * v;
      wsum += w;
    }
    mean /= wsum;
    double bound = 0.0;
    for (auto& [w, v] : atoms) {
      w /= wsum;
      v /= mean;
      bound = std::max(bound, v);
    }
    res.psi_ok = psi_variance_bound_check(atoms, bound);

    double lhs = 0.0;
    for (const auto& f : mu1.members) {
      const std::vector<double> s = singular_values(f.map);
      lhs += f.weight * std::log(s[0] / s[1]);
    }
    res.distortion_slack = lhs - res.phi;
    res.distortion_ok = distortion_vs_entropy_check(mu1);
  });

  EntropySummary es;
  es.trials = trials;
  for (const TrialResult& res : results) {
    es.minimizer_failures += res.minimizer_ok ? 0 : 1;
    es.psi_failures += res.psi_ok ? 0 : 1;
    es.distortion_failures += res.distortion_ok ? 0 : 1;
    es.mean_residual_coarse += res.residual_coarse / static_cast<double>(trials);
    es.mean_residual_fine += res.residual_fine / static_cast<double>(trials);
    es.max_residual_coarse = std::max(es.max_residual_coarse, res.residual_coarse);
    es.max_residual_fine = std::max(es.max_residual_fine, res.residual_fine);
  }
  summary.entropy = es;

  for (std::int64_t t = 0; t < trials; ++t) {
    const TrialResult& res = results[static_cast<size_t>(t)];
    csv_row(csv, cfg.experiment, 2, 0, 0.0, cfg.bins, t, cfg.seed, res.phi,
            fmt17(res.distortion_slack), "");
  }
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = s.experiment;
  j["config_digest"] = s.config_digest;
  j["d"] = s.d;
  j["n"] = s.n;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["wall_seconds"] = s.wall_seconds;
  if (!s.gap_stats.empty()) {
    json rows = json::array();
    for (const GapStat& gs : s.gap_stats) {
      rows.push_back({{"eps", gs.eps},
                      {"k", gs.k},
                      {"mean_gap_rate", gs.mean_gap_rate},
                      {"stderr", gs.stderr_}});
    }
    j["gap_stats"] = std::move(rows);
  }
  if (!s.exponents_raw.empty()) {
    j["exponents_raw"] = s.exponents_raw;
    j["exponents_raw_stderr"] = s.exponents_raw_stderr;
    j["exponents_centered"] = s.exponents_centered;
  }
  if (!s.gapest_rows.empty()) {
    json rows = json::array();
    for (const GapestRow& row : s.gapest_rows) {
      rows.push_back({{"m", row.m},
                      {"mean", row.mean},
                      {"stderr", row.stderr_},
                      {"expected", row.expected},
                      {"deviation", row.deviation}});
    }
    j["gapest_rows"] = std::move(rows);
  }
  if (s.entropy) {
    j["entropy"] = {{"trials", s.entropy->trials},
                    {"minimizer_failures", s.entropy->minimizer_failures},
                    {"psi_failures", s.entropy->psi_failures},
                    {"distortion_failures", s.entropy->distortion_failures},
                    {"mean_residual_coarse", s.entropy->mean_residual_coarse},
                    {"mean_residual_fine", s.entropy->mean_residual_fine},
                    {"max_residual_coarse", s.entropy->max_residual_coarse},
                    {"max_residual_fine", s.entropy->max_residual_fine}};
  }
  if (s.fit) {
    j["fit"] = {{"slope", s.fit->slope},
                {"intercept", s.fit->intercept},
                {"r_squared", s.fit->r_squared}};
  }
  return j;
}

}  // namespace

FitResult fit_eps_squared_slope(const std::vector<std::pair<double, double>>& rows) {
  std::set<double> distinct;
  for (const auto& [eps, y] : rows) distinct.insert(eps);
  if (distinct.size() < 3)
    throw config_error("slope fit needs at least 3 distinct eps values");
  std::vector<double> xs, ys;
  xs.reserve(rows.size());
  ys.reserve(rows.size());
  for (const auto& [eps, y] : rows) {
    xs.push_back(eps * eps);
    ys.push_back(y);
  }
  const LinearFit lf = linear_fit(xs, ys);
  return FitResult{lf.slope, lf.intercept, lf.r_squared};
}

RunSummary run_experiment(const ExperimentConfig& cfg, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();

  RunSummary summary;
  summary.experiment = cfg.experiment;
  summary.config_digest = cfg.digest.empty() ? config_digest(cfg) : cfg.digest;
  summary.d = cfg.d;
  summary.n = cfg.n;
  summary.trials = cfg.trials;
  summary.seed = cfg.seed;

  std::ostringstream csv;
  csv_header(csv);
  if (cfg.experiment == "gap-growth" || cfg.experiment == "appendix-exponents") {
    run_products(cfg, jobs, summary, csv);
  } else if (cfg.experiment == "gapest-bound") {
    run_gapest(cfg, jobs, summary, csv);
  } else if (cfg.experiment == "entropy-identities") {
    run_entropy(cfg, jobs, summary, csv);
  } else {
    throw config_error("unknown experiment: " + cfg.experiment);
  }

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw config_error("cannot create output_dir: " + cfg.output_dir);
  {
    std::ofstream out(fs::path(cfg.output_dir) / "trace.csv", std::ios::binary);
    if (!out) throw config_error("cannot write trace.csv in " + cfg.output_dir);
    out << csv.str();
  }
  {
    std::ofstream out(fs::path(cfg.output_dir) / "summary.json", std::ios::binary);
    if (!out) throw config_error("cannot write summary.json in " + cfg.output_dir);
    out << summary_to_json(summary).dump(2) << '\n';
  }
  return summary;
}

FitResult fit_from_summary_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("summary is not valid JSON: ") + e.what());
  }
  if (!j.contains("gap_stats") || !j["gap_stats"].is_array() || j["gap_stats"].empty())
    throw config_error("summary has no gap_stats rows to fit");
  std::vector<std::pair<double, double>> rows;
  for (const json& row : j["gap_stats"]) {
    if (!row.contains("eps") || !row.contains("mean_gap_rate"))
      throw config_error("gap_stats rows need eps and mean_gap_rate");
    rows.emplace_back(row["eps"].get<double>(), row["mean_gap_rate"].get<double>());
  }
  return fit_eps_squared_slope(rows);
}

// --- selftest ----------------------------------------------------------------

namespace {

Mat random_invertible(int d, RngStream& rng) {
  Mat m(d, d);
  do {
    for (double& x : m.a) x = rng.normal();
  } while (std::abs(determinant(m)) < 1e-3);
  return m;
}

Mat givens(int d, int i, int j, double angle) {
  Mat g = Mat::identity(d);
  g(i, i) = std::cos(angle);
  g(j, j) = std::cos(angle);
  g(i, j) = -std::sin(angle);
  g(j, i) = std::sin(angle);
  return g;
}

/// Graded test factor: strongly separated diagonal stirred by mild rotations.
/// Keeps adjacent Lyapunov gaps open so triangular remainders converge fast.
Mat graded_factor(int d, RngStream& rng) {
  Mat m(d, d);
  m(0, 0) = 2.0;
  for (int i = 1; i < d; ++i) m(i, i) = std::pow(0.93, i - 1);
  for (int i = 0; i + 1 < d; ++i)
    m = givens(d, i, i + 1, rng.uniform(-0.35, 0.35)) * m;
  return m;
}

double max_log_cond(const std::vector<Mat>& factors) {
  double worst = 0.0;
  for (const Mat& f : factors) {
    const std::vector<double> s = singular_values(f);
    worst = std::max(worst, std::log(s.front() / s.back()));
  }
  return worst;
}

}  // namespace

int selftest(std::ostream& log) {
  int failures = 0;
  auto suite = [&](const char* name, bool ok) {
    log << "selftest: " << name << (ok ? " ok" : " FAIL") << '\n';
    if (!ok) ++failures;
  };

  {
    RngStream a(7, 1, 2), b(7, 1, 2), c(7, 1, 3);
    bool same = true, differs = false;
    for (int i = 0; i < 100; ++i) {
      const std::uint64_t va = a.next_u64();
      same = same && va == b.next_u64();
      differs = differs || va != c.next_u64();
    }
    suite("stream reproducibility", same && differs);
  }

  {
    bool ok = true;
    RngStream rng(11);
    for (int rep = 0; rep < 20 && ok; ++rep) {
      const int d = 2 + static_cast<int>(rng.next_u64() % 4);
      ProductState st = ProductState::initial(d);
      double log_det = 0.0;
      for (int i = 0; i < 40; ++i) {
        const Mat f = random_invertible(d, rng);
        log_det += std::log(std::abs(determinant(f)));
        st = advance(st, f);
      }
      double sum = 0.0;
      for (double x : st.log_diag) sum += x;
      ok = std::abs(sum - log_det) <= 1e-8 * std::max(1.0, std::abs(log_det));
    }
    suite("determinant conservation", ok);
  }

  {
    bool ok = true;
    RngStream rng(12);
    for (int rep = 0; rep < 10 && ok; ++rep) {
      std::vector<Mat> factors;
      ProductState st = ProductState::initial(3);
      for (int i = 0; i < 12; ++i) {
        factors.push_back(graded_factor(3, rng));
        st = advance(st, factors.back());
      }
      const std::vector<double> exact = exact_product_svd(factors);
      const std::vector<double> refined = log_singular_estimates(st);
      const double bound = 2.0 * 3.0 * max_log_cond(factors);
      ok = std::abs(refined[0] - exact[0]) <= 1e-3;
      for (size_t k = 0; k < exact.size() && ok; ++k)
        ok = std::abs(refined[k] - exact[k]) <= bound;
    }
    suite("product oracle agreement", ok);
  }

  {
    bool ok = true;
    RngStream rng(13);
    for (int rep = 0; rep < 50 && ok; ++rep) {
      Mat m(2, 2);
      do {
        for (double& x : m.a) x = rng.normal();
      } while (std::abs(determinant(m)) < 5e-2);
      const CircleMeasure nu = random_measure(128, rng);
      const CircleMeasure pushed = pushforward(m, nu);
      double mass = 0.0;
      for (double b : pushed.bins) mass += b;
      ok = std::abs(mass - 1.0) <= 1e-10;
      if (ok) ok = kl_divergence(nu, nu) == 0.0;
      if (ok) ok = kl_divergence(pushed, random_measure(128, rng)) >= 0.0;
    }
    suite("pushforward mass and KL", ok);
  }

  {
    bool ok = true;
    RngStream rng(14);
    for (int rep = 0; rep < 100 && ok; ++rep) {
      const int d = 3 + static_cast<int>(rng.next_u64() % 3);
      const int k = 1 + static_cast<int>(rng.next_u64() %
                                         static_cast<std::uint64_t>(d - 1));
      std::vector<double> diag(static_cast<size_t>(d));
      for (double& x : diag) x = std::exp(rng.uniform(-3.0, 3.0));
      std::sort(diag.begin(), diag.end(), std::greater<>());
      Mat b(d, d);
      for (int i = 0; i < d; ++i) b(i, i) = diag[static_cast<size_t>(i)];
      const PartialFlag flag = sample_partial_flag(d, k, rng);
      const MiniflagPoint point =
          miniflag_point(flag, rng.uniform(0.0, 2.0 * std::numbers::pi));
      ok = gapcomp_check(b, point);
    }
    suite("restriction gap two-sided bound", ok);
  }

  {
    bool ok = true;
    RngStream rng(15);
    for (int rep = 0; rep < 100 && ok; ++rep) {
      const int d = 2 + static_cast<int>(rng.next_u64() % 4);
      const NoiseSpec spec = NoiseSpec::truncated_gaussian(d, 1.0);
      const Mat b = perturb(Mat::identity(d), 0.3, sample_noise(spec, rng));
      const std::vector<double> s = singular_values(b);
      if (!(s.back() > 0.0)) continue;
      double sum_log = 0.0;
      for (double sv : s) sum_log += std::log(sv);
      const double lhs_norm = std::log(s.front()) - sum_log / d;
      const double lhs_conorm = sum_log / d - std::log(s.back());
      const double rhs =
          (d - 1.0) / d * (std::log(s.front()) - std::log(s.back()));
      ok = lhs_norm <= rhs + 1e-10 && lhs_conorm <= rhs + 1e-10;
    }
    suite("normalized norm inequalities", ok);
  }

  {
    bool ok = true;
    RngStream rng(16);
    for (int rep = 0; rep < 200 && ok; ++rep) {
      std::vector<std::pair<double, double>> atoms;
      double mean = 0.0, wsum = 0.0;
      for (int i = 0; i < 12; ++i) {
        const double w = rng.uniform01() + 0.05;
        const double v = 0.05 + 2.0 * rng.uniform01();
        atoms.emplace_back(w, v);
        mean += w * v;
        wsum += w;
      }
      mean /= wsum;
      double bound = 0.0;
      for (auto& [w, v] : atoms) {
        w /= wsum;
        v /= mean;
        bound = std::max(bound, v);
      }
      ok = psi_variance_bound_check(atoms, bound);
    }
    suite("psi variance lower bound", ok);
  }

  {
    RngStream rng(17);
    const NoiseSpec spec = NoiseSpec::uniform_entries(3);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const Mat e = sample_noise(spec, rng);
      for (double x : e.a) {
        sum += x;
        sum_sq += x * x;
      }
    }
    const double count = static_cast<double>(n) * 9.0;
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    suite("noise entry moments", std::abs(mean) < 0.02 && std::abs(var - 1.0) < 0.05);
  }

  return failures;
}

}  // namespace lyapgap
