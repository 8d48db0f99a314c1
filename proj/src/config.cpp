#include "lyapgap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lyapgap/errors.hpp"

namespace lyapgap {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw config_error(msg); }

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path + " must be an object");
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      fail("unknown config key: " + (path.empty() ? "" : path + ".") + item.key());
  }
}

const json& require_key(const json& j, const std::string& path, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end())
    fail("missing config key: " + (path.empty() ? "" : path + ".") + key);
  return *it;
}

std::int64_t get_int(const json& j, const std::string& path, std::int64_t lo,
                     std::int64_t hi) {
  if (!j.is_number_integer())
    fail(path + " must be an integer");
  const std::int64_t v = j.get<std::int64_t>();
  if (v < lo || v > hi)
    fail(path + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

double get_real(const json& j, const std::string& path, double lo, double hi) {
  if (!j.is_number())
    fail(path + " must be a number");
  const double v = j.get<double>();
  if (!(v >= lo) || !(v <= hi))
    fail(path + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path + " must be a string");
  return j.get<std::string>();
}

Mat parse_matrix(const json& j, const std::string& path, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    fail(path + " must be an array of " + std::to_string(d) + " rows");
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      fail(path + "[" + std::to_string(i) + "] must have " + std::to_string(d) +
           " entries");
    for (int c = 0; c < d; ++c) {
      const json& cell = row[c];
      if (!cell.is_number())
        fail(path + " entries must be numbers");
      m(i, c) = cell.get<double>();
      if (!std::isfinite(m(i, c))) fail(path + " entries must be finite");
    }
  }
  return m;
}

NoiseSpec parse_noise(const json& j, int d) {
  expect_object(j, "noise");
  const std::string family = get_string(require_key(j, "noise", "family"), "noise.family");
  if (family == "uniform-entries") {
    check_keys(j, "noise", {"family", "half_width"});
    double w = std::sqrt(3.0);
    if (j.contains("half_width"))
      w = get_real(j["half_width"], "noise.half_width", 1e-6, 1e6);
    return NoiseSpec::uniform_entries(d, w);
  }
  if (family == "uniform-operator-ball") {
    check_keys(j, "noise", {"family", "radius"});
    const double r = get_real(require_key(j, "noise", "radius"), "noise.radius", 1e-6, 1e6);
    return NoiseSpec::uniform_operator_ball(d, r);
  }
  if (family == "truncated-gaussian") {
    check_keys(j, "noise", {"family", "sigma", "cutoff"});
    const double sigma = get_real(require_key(j, "noise", "sigma"), "noise.sigma", 1e-6, 1e6);
    double cutoff = 10.0;
    if (j.contains("cutoff"))
      cutoff = get_real(j["cutoff"], "noise.cutoff", 1e-6, 1e6);
    return NoiseSpec::truncated_gaussian(d, sigma, cutoff);
  }
  fail("noise.family must be uniform-entries, uniform-operator-ball, or truncated-gaussian");
}

BaseSequence parse_base_sequence(const json& j, int d) {
  expect_object(j, "base_sequence");
  const std::string kind =
      get_string(require_key(j, "base_sequence", "kind"), "base_sequence.kind");
  std::optional<double> declared;
  if (j.contains("norm_bound"))
    declared = get_real(j["norm_bound"], "base_sequence.norm_bound", 0.0, 1e12);

  BaseSequence seq = BaseSequence::identity(d);
  if (kind == "identity") {
    check_keys(j, "base_sequence", {"kind", "norm_bound"});
  } else if (kind == "fixed-matrix") {
    check_keys(j, "base_sequence", {"kind", "entries", "norm_bound"});
    seq = BaseSequence::fixed(
        parse_matrix(require_key(j, "base_sequence", "entries"),
                     "base_sequence.entries", d));
  } else if (kind == "rotating") {
    check_keys(j, "base_sequence", {"kind", "schedule", "norm_bound"});
    const json& sched = require_key(j, "base_sequence", "schedule");
    if (!sched.is_array() || sched.empty())
      fail("base_sequence.schedule must be a non-empty array of matrices");
    std::vector<Mat> mats;
    for (size_t i = 0; i < sched.size(); ++i)
      mats.push_back(parse_matrix(sched[i],
                                  "base_sequence.schedule[" + std::to_string(i) + "]", d));
    seq = BaseSequence::cycle(std::move(mats));
  } else {
    fail("base_sequence.kind must be identity, fixed-matrix, or rotating");
  }
  if (declared && seq.norm_bound() > *declared * (1.0 + 1e-12) + 1e-12)
    fail("base_sequence exceeds its declared norm_bound");
  return seq;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  expect_object(j, "config");

  ExperimentConfig cfg;
  cfg.experiment = get_string(require_key(j, "", "experiment"), "experiment");

  const bool product_exp =
      cfg.experiment == "gap-growth" || cfg.experiment == "appendix-exponents";
  std::set<std::string> allowed = {"experiment", "d", "seed", "output_dir"};
  if (product_exp) {
    allowed.insert({"eps_list", "n", "trials", "noise", "base_sequence",
                    "checkpoint_every"});
  } else if (cfg.experiment == "gapest-bound") {
    allowed.insert({"k", "m_list", "trials"});
  } else if (cfg.experiment == "entropy-identities") {
    allowed.insert({"trials", "bins"});
  } else {
    fail("experiment must be gap-growth, appendix-exponents, gapest-bound, "
         "or entropy-identities");
  }
  check_keys(j, "", allowed);

  cfg.d = static_cast<int>(get_int(require_key(j, "", "d"), "d", 2, 16));
  const json& seed_j = require_key(j, "", "seed");
  if (!seed_j.is_number_integer() && !seed_j.is_number_unsigned())
    fail("seed must be an integer");
  if (seed_j.is_number_integer() && seed_j.get<std::int64_t>() < 0)
    fail("seed must be non-negative");
  cfg.seed = seed_j.get<std::uint64_t>();
  cfg.output_dir = get_string(require_key(j, "", "output_dir"), "output_dir");
  if (cfg.output_dir.empty()) fail("output_dir must not be empty");

  if (product_exp) {
    const json& eps = require_key(j, "", "eps_list");
    if (!eps.is_array() || eps.empty())
      fail("eps_list must be a non-empty array");
    for (size_t i = 0; i < eps.size(); ++i)
      cfg.eps_list.push_back(
          get_real(eps[i], "eps_list[" + std::to_string(i) + "]", 0.0, 1.0));
    cfg.n = get_int(require_key(j, "", "n"), "n", 1, 100'000'000);
    cfg.trials = get_int(require_key(j, "", "trials"), "trials", 1, 1'000'000);
    if (j.contains("checkpoint_every"))
      cfg.checkpoint_every =
          get_int(j["checkpoint_every"], "checkpoint_every", 0, 100'000'000);
    cfg.noise = parse_noise(require_key(j, "", "noise"), cfg.d);
    if (j.contains("base_sequence"))
      cfg.base_seq = parse_base_sequence(j["base_sequence"], cfg.d);
    else
      cfg.base_seq = BaseSequence::identity(cfg.d);
  } else if (cfg.experiment == "gapest-bound") {
    cfg.k = static_cast<int>(get_int(require_key(j, "", "k"), "k", 1, cfg.d - 1));
    const json& ms = require_key(j, "", "m_list");
    if (!ms.is_array() || ms.empty())
      fail("m_list must be a non-empty array");
    for (size_t i = 0; i < ms.size(); ++i)
      cfg.m_list.push_back(static_cast<int>(
          get_int(ms[i], "m_list[" + std::to_string(i) + "]", 0, 12)));
    cfg.trials = get_int(require_key(j, "", "trials"), "trials", 1, 1'000'000);
  } else {  // entropy-identities
    cfg.trials = get_int(require_key(j, "", "trials"), "trials", 1, 1'000'000);
    if (j.contains("bins"))
      cfg.bins = static_cast<int>(get_int(j["bins"], "bins", 2, 65536));
  }

  cfg.digest = config_digest(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config_dump(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["d"] = cfg.d;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  if (cfg.experiment == "gap-growth" || cfg.experiment == "appendix-exponents") {
    j["eps_list"] = cfg.eps_list;
    j["n"] = cfg.n;
    j["trials"] = cfg.trials;
    j["checkpoint_every"] = cfg.checkpoint_every;
    json noise;
    noise["family"] = cfg.noise->family_name();
    switch (cfg.noise->family()) {
      case NoiseFamily::UniformEntries:
        noise["half_width"] = cfg.noise->scale();
        break;
      case NoiseFamily::UniformOperatorBall:
        noise["radius"] = cfg.noise->scale();
        break;
      case NoiseFamily::TruncatedGaussian:
        noise["sigma"] = cfg.noise->scale();
        noise["cutoff"] = cfg.noise->cutoff();
        break;
    }
    j["noise"] = std::move(noise);
    json seq;
    const std::string kind = cfg.base_seq->kind();
    if (kind == "identity") {
      seq["kind"] = "identity";
    } else if (kind == "fixed") {
      seq["kind"] = "fixed-matrix";
      seq["entries"] = matrix_to_json(cfg.base_seq->members().front());
    } else {
      seq["kind"] = "rotating";
      json sched = json::array();
      for (const Mat& m : cfg.base_seq->members()) sched.push_back(matrix_to_json(m));
      seq["schedule"] = std::move(sched);
    }
    j["base_sequence"] = std::move(seq);
  } else if (cfg.experiment == "gapest-bound") {
    j["k"] = *cfg.k;
    j["m_list"] = cfg.m_list;
    j["trials"] = cfg.trials;
  } else {
    j["trials"] = cfg.trials;
    j["bins"] = cfg.bins;
  }
  return j.dump();  // nlohmann objects iterate in sorted key order
}

std::string config_digest(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config_dump(cfg))));
  return std::string(buf);
}

}  // namespace lyapgap
