// Pythonface of the laboratory. Matrices cross the boundary as nested
// lists of floats (row major); measures and spectra as flat lists. The
// heavy lifting stays in the C++ core, so these wrappers only validate
// shapes and translate containers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "lyapgap/config.hpp"
#include "lyapgap/entropy.hpp"
#include "lyapgap/errors.hpp"
#include "lyapgap/experiments.hpp"
#include "lyapgap/flags.hpp"
#include "lyapgap/matrix.hpp"
#include "lyapgap/products.hpp"
#include "lyapgap/rng.hpp"
#include "lyapgap/subspace.hpp"
#include "lyapgap/svd.hpp"

namespace py = pybind11;
using namespace lyapgap;

namespace {

using Rows = std::vector<std::vector<double>>;

Mat to_mat(const Rows& rows) {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("matrix must be a non-empty nested list");
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.front().size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != c)
      throw std::invalid_argument("matrix rows have unequal lengths");
    for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return m;
}

Rows from_mat(const Mat& m) {
  Rows rows(static_cast<size_t>(m.rows), std::vector<double>(static_cast<size_t>(m.cols)));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = m(i, j);
  return rows;
}

MapFamily to_family(const std::vector<std::pair<double, Rows>>& members) {
  std::vector<std::pair<double, Mat>> ms;
  ms.reserve(members.size());
  for (const auto& [w, rows] : members) ms.emplace_back(w, to_mat(rows));
  return make_map_family(std::move(ms));
}

/// Incremental left-product accumulator mirroring the C++ ProductState.
struct PyProduct {
  ProductState state;

  explicit PyProduct(int dim) : state(ProductState::initial(dim)) {}
  void push(const Rows& rows) { state = advance(state, to_mat(rows)); }
  std::vector<double> rates() const { return exponent_estimates(state); }
  std::vector<double> log_singular() const { return log_singular_estimates(state); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Singular value gaps of noisy matrix products";

  py::register_exception<config_error>(m, "ConfigError");
  py::register_exception<numeric_error>(m, "NumericError");

  // linear algebra on nested-list matrices
  m.def("singular_values", [](const Rows& a) { return singular_values(to_mat(a)); },
        py::arg("a"), "Singular values, non-increasing.");
  m.def("determinant", [](const Rows& a) { return determinant(to_mat(a)); }, py::arg("a"));
  m.def("operator_norm", [](const Rows& a) { return operator_norm(to_mat(a)); }, py::arg("a"));
  m.def("exterior_power", [](const Rows& a, int k) { return from_mat(exterior_power(to_mat(a), k)); },
        py::arg("a"), py::arg("k"),
        "k-th exterior power in the lexicographic minor basis.");
  m.def("projective_jacobian",
        [](const Rows& a, double theta) { return projective_jacobian(to_mat(a), theta); },
        py::arg("a"), py::arg("theta"),
        "Jacobian of the induced circle map at angle theta.");

  // product accumulation and the exact small-product oracle
  py::class_<PyProduct>(m, "Product",
                        "QR-renormalized running product; factors enter on the left.")
      .def(py::init<int>(), py::arg("dim"))
      .def("push", &PyProduct::push, py::arg("factor"))
      .def("exponent_estimates", &PyProduct::rates,
           "Per-step log singular value rates, non-increasing.")
      .def("log_singular_estimates", &PyProduct::log_singular,
           "Refined absolute log singular values of the accumulated product.")
      .def_property_readonly("steps", [](const PyProduct& p) { return p.state.steps; })
      .def_property_readonly("dim", [](const PyProduct& p) { return p.state.dim; });
  m.def("exact_product_log_svd",
        [](const std::vector<Rows>& factors) {
          std::vector<Mat> fs;
          fs.reserve(factors.size());
          for (const auto& rows : factors) fs.push_back(to_mat(rows));
          return exact_product_svd(fs);
        },
        py::arg("factors"),
        "Exact log singular values of factors[-1] * ... * factors[0] (at most 64).");

  // flag-averaged restriction gap
  m.def("gap_average",
        [](const Rows& b, int k, long n_samples, std::uint64_t seed) {
          RngStream rng(seed);
          const GapAverage ga = gap_average(to_mat(b), k, n_samples, rng);
          return py::make_tuple(ga.mean, ga.stderr_, ga.n_samples);
        },
        py::arg("b"), py::arg("k"), py::arg("n_samples"), py::arg("seed"),
        "Monte Carlo mean of the restriction log gap over random flags: "
        "(mean, stderr, n_samples).");

  // projective measures and entropy
  m.def("kl_divergence",
        [](const std::vector<double>& nu, const std::vector<double>& nu_tilde) {
          return kl_divergence(make_circle_measure(nu), make_circle_measure(nu_tilde));
        },
        py::arg("nu"), py::arg("nu_tilde"));
  m.def("pushforward",
        [](const Rows& map, const std::vector<double>& nu) {
          return pushforward(to_mat(map), make_circle_measure(nu)).bins;
        },
        py::arg("map"), py::arg("nu"),
        "Image of the binned circle measure under the projective map.");
  m.def("convolve",
        [](const std::vector<std::pair<double, Rows>>& members, const std::vector<double>& nu) {
          return convolve(to_family(members), make_circle_measure(nu)).bins;
        },
        py::arg("family"), py::arg("nu"));
  m.def("furstenberg_entropy",
        [](const std::vector<std::pair<double, Rows>>& members, const std::vector<double>& nu) {
          return furstenberg_entropy(to_family(members), make_circle_measure(nu));
        },
        py::arg("family"), py::arg("nu"),
        "Mean KL of pushforwards against the convolution.");
  m.def("b22_family_entropy", &b22_family_entropy, py::arg("a"), py::arg("r"),
        "Entropy of the uniform triangular family; depends only on r/a.");

  // experiment configs and runs
  py::class_<FitResult>(m, "FitResult")
      .def_readonly("slope", &FitResult::slope)
      .def_readonly("intercept", &FitResult::intercept)
      .def_readonly("r_squared", &FitResult::r_squared);
  py::class_<GapStat>(m, "GapStat")
      .def_readonly("eps", &GapStat::eps)
      .def_readonly("k", &GapStat::k)
      .def_readonly("mean_gap_rate", &GapStat::mean_gap_rate)
      .def_property_readonly("stderr", [](const GapStat& g) { return g.stderr_; });
  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("experiment", &RunSummary::experiment)
      .def_readonly("config_digest", &RunSummary::config_digest)
      .def_readonly("d", &RunSummary::d)
      .def_readonly("n", &RunSummary::n)
      .def_readonly("trials", &RunSummary::trials)
      .def_readonly("seed", &RunSummary::seed)
      .def_readonly("gap_stats", &RunSummary::gap_stats)
      .def_readonly("exponents_raw", &RunSummary::exponents_raw)
      .def_readonly("exponents_centered", &RunSummary::exponents_centered)
      .def_readonly("wall_seconds", &RunSummary::wall_seconds)
      .def_property_readonly("fit", [](const RunSummary& s) -> py::object {
        if (!s.fit) return py::none();
        return py::cast(*s.fit);
      });

  m.def("config_digest",
        [](const std::string& text) { return parse_config_text(text).digest; },
        py::arg("config_text"),
        "Digest of the canonical form; equal digests mean the same experiment.");
  m.def("canonical_config",
        [](const std::string& text) { return canonical_config_dump(parse_config_text(text)); },
        py::arg("config_text"));
  m.def("run",
        [](const std::string& config_text, int jobs) {
          return run_experiment(parse_config_text(config_text), jobs);
        },
        py::arg("config_text"), py::arg("jobs") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Run the configured experiment; writes trace.csv and summary.json "
        "under output_dir and returns the summary.");
  m.def("fit_eps_squared",
        [](const std::string& summary_json) { return fit_from_summary_text(summary_json); },
        py::arg("summary_json"),
        "Re-fit the gap-rate slope against eps^2 from a summary.json document.");
  m.def("fit_eps_squared_file",
        [](const std::string& path) { return fit_from_summary_text(read_file(path)); },
        py::arg("path"));
  m.def("selftest",
        []() {
          std::ostringstream log;
          const int failures = selftest(log);
          return py::make_tuple(failures, log.str());
        },
        "Cross-module invariant battery: (failed_suite_count, log_text).");
}
