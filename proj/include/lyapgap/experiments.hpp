#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lyapgap/config.hpp"

namespace lyapgap {

/// Aggregate of one (eps, k) cell at the final checkpoint: mean and standard
/// error of the per-step gap rate across trials.
struct GapStat {
  double eps = 0.0;
  int k = 0;  // 1-based gap index
  double mean_gap_rate = 0.0;
  double stderr_ = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of y against eps^2 (with intercept) over (eps, y) rows.
/// Requires at least 3 distinct eps values; a degenerate design (all eps
/// equal) is a config error.
FitResult fit_eps_squared_slope(const std::vector<std::pair<double, double>>& rows);

/// One condition-sweep row of the restriction-gap experiment.
struct GapestRow {
  int m = 0;            // condition exponent, operator diag(10^m ... 10^-m)
  double mean = 0.0;    // flag-averaged restriction log gap
  double stderr_ = 0.0;
  double expected = 0.0;   // log(s_k / s_{k+1}) of the operator itself
  double deviation = 0.0;  // |mean - expected|
};

struct EntropySummary {
  std::int64_t trials = 0;
  std::int64_t minimizer_failures = 0;
  std::int64_t psi_failures = 0;
  std::int64_t distortion_failures = 0;
  double mean_residual_coarse = 0.0;  // composition identity at B bins
  double mean_residual_fine = 0.0;    // same at 2B bins
  double max_residual_coarse = 0.0;
  double max_residual_fine = 0.0;
};

struct RunSummary {
  std::string experiment;
  std::string config_digest;
  int d = 0;
  std::int64_t n = 0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<GapStat> gap_stats;
  std::vector<double> exponents_raw;         // mean refined log s_k / n
  std::vector<double> exponents_raw_stderr;
  std::vector<double> exponents_centered;    // per-trial det-normalized, averaged
  std::vector<GapestRow> gapest_rows;
  std::optional<EntropySummary> entropy;
  std::optional<FitResult> fit;
  double wall_seconds = 0.0;
};

/// Execute the configured experiment with `jobs` worker threads (values < 1
/// mean one worker per hardware thread). Writes <output_dir>/trace.csv and
/// <output_dir>/summary.json; re-running the same config reproduces the CSV
/// byte for byte. Returns the in-memory summary.
RunSummary run_experiment(const ExperimentConfig& cfg, int jobs = 0);

/// Re-fit the eps^2 slope from a summary.json document previously written
/// by run_experiment.
FitResult fit_from_summary_text(const std::string& json_text);

/// Fast cross-module invariant battery (determinant conservation, oracle
/// agreement, pushforward mass, KL and psi inequalities, gapcomp and
/// hat-norm bounds, stream reproducibility). Prints one line per suite to
/// `log`; returns the number of failed suites.
int selftest(std::ostream& log);

}  // namespace lyapgap
