// Command-line front end: config-driven experiment runs, slope refits of
// existing summaries, and the library invariant battery.
//
// Exit codes: 0 success, 1 internal failure, 2 config error, 3 numerical
// abort.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "lyapgap/config.hpp"
#include "lyapgap/errors.hpp"
#include "lyapgap/experiments.hpp"

namespace {

int default_jobs() {
  if (const char* env = std::getenv("LYAPGAP_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
      // fall through to auto detection
    }
    std::cerr << "warning: ignoring invalid LYAPGAP_JOBS value '" << env << "'\n";
  }
  return 0;  // auto: one worker per hardware thread
}

int run_command(const std::string& config_path, int jobs) {
  const lyapgap::ExperimentConfig cfg = lyapgap::parse_config_file(config_path);
  const lyapgap::RunSummary summary = lyapgap::run_experiment(cfg, jobs);
  std::cout << "experiment " << summary.experiment << " digest "
            << summary.config_digest << " finished in " << summary.wall_seconds
            << " s; outputs in " << cfg.output_dir << "\n";
  if (summary.fit) {
    std::cout << "fit: slope " << summary.fit->slope << " intercept "
              << summary.fit->intercept << " r_squared " << summary.fit->r_squared
              << "\n";
  }
  return 0;
}

int fit_command(const std::string& summary_path) {
  std::ifstream in(summary_path, std::ios::binary);
  if (!in) throw lyapgap::config_error("cannot open summary file: " + summary_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const lyapgap::FitResult fit = lyapgap::fit_from_summary_text(buf.str());
  std::cout << "{\"slope\": " << fit.slope << ", \"intercept\": " << fit.intercept
            << ", \"r_squared\": " << fit.r_squared << "}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-stationary matrix product laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string summary_path;
  int jobs = default_jobs();

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--jobs", jobs, "worker threads (default: LYAPGAP_JOBS or all cores)");

  CLI::App* fit = app.add_subcommand("fit", "refit the eps^2 slope of a summary.json");
  fit->add_option("summary", summary_path, "summary.json from a previous run")
      ->required();

  CLI::App* selftest = app.add_subcommand("selftest", "run the invariant suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, jobs);
    if (fit->parsed()) return fit_command(summary_path);
    if (selftest->parsed()) {
      const int failures = lyapgap::selftest(std::cout);
      if (failures != 0) {
        std::cerr << failures << " selftest suite(s) failed\n";
        return 1;
      }
      return 0;
    }
  } catch (const lyapgap::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lyapgap::numeric_error& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
