#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace smallcells {

// Raised when a numeric routine cannot deliver its accuracy contract
// (quadrature non-convergence, internal cross-check mismatch, ...).
// CLI maps this to exit code 2, as opposed to exit 1 for bad input.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A conditional estimator saw zero accepted samples. Carries the total
// sample count so callers can report how starved the run was.
class StarvationError : public NumericError {
 public:
  explicit StarvationError(std::uint64_t total)
      : NumericError("conditional estimate starved: 0 accepted out of " +
                     std::to_string(total) + " samples"),
        total_samples(total) {}

  std::uint64_t total_samples;
};

// Round-trip decimal formatting used for every float that leaves the
// process (CSV, JSON, stdout): 17 significant digits.
std::string fmt17(double v);

}  // namespace smallcells
