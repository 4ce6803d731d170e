#pragma once

#include <stdexcept>
#include <string>

namespace boro {

/// Base error for the library. `module()` names the component that raised it,
/// which the CLI surfaces in diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid input data or arguments (malformed datasets, dimension mismatch).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to converge or could not bracket a solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace boro
