#pragma once

#include <stdexcept>
#include <string>

namespace lyapgap {

/// Invalid experiment configuration (bad file, unknown key, out-of-range
/// value). The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical abort: underflow in a product step, a non-invertible factor,
/// or an operator too ill-conditioned for the requested computation.
/// The CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lyapgap
