#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lyapgap/noise.hpp"
#include "lyapgap/products.hpp"

namespace lyapgap {

/// Parsed and validated experiment description. Parsing is fail-fast:
/// unknown keys anywhere in the document are config errors (reported with
/// their full key path), as are values outside the documented ranges.
struct ExperimentConfig {
  std::string experiment;  // gap-growth | appendix-exponents | gapest-bound | entropy-identities
  int d = 0;
  std::optional<int> k;           // center index, gapest-bound only
  std::vector<double> eps_list;   // product experiments; each in [0, 1]
  std::int64_t n = 0;             // product steps
  std::int64_t trials = 1;        // product trials / MC sample count
  std::int64_t checkpoint_every = 0;  // 0 = geometric schedule
  std::uint64_t seed = 0;
  std::string output_dir;
  std::optional<NoiseSpec> noise;       // product experiments
  std::optional<BaseSequence> base_seq; // product experiments, default identity
  std::vector<int> m_list;        // gapest-bound condition exponents
  int bins = 512;                 // entropy-identities resolution
  std::string digest;             // canonical-form digest, filled by the parser
};

/// Parse a JSON config document. Throws config_error with the offending key
/// path or field name on any schema violation.
ExperimentConfig parse_config_text(const std::string& text);

/// Read and parse a config file.
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical serialization: sorted keys, shortest round-trip floats, no
/// incidental whitespace. Two configs with equal canonical forms are the
/// same experiment.
std::string canonical_config_dump(const ExperimentConfig& cfg);

/// FNV-1a (64-bit) digest of the canonical form, as 16 hex digits. Stable
/// under parse/dump round trips.
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace lyapgap
