#pragma once

#include <stdexcept>
#include <string>

namespace aerobeam {

// Raised for malformed or inconsistent user input: config files, CLI
// arguments, dimension mismatches detected at parse time. The CLI maps
// this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical routine cannot produce a trustworthy result:
// Newton divergence, infeasible Riccati equations, norms of unstable
// systems, pressure-law domain violations. The CLI maps this to exit
// code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aerobeam
