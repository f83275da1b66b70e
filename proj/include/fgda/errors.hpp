#pragma once

#include <stdexcept>
#include <string>

namespace fgda {

// Bad user input: malformed config, out-of-band mode lists, shape mismatches.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A solver or transform failed to meet its tolerance (non-convergence,
// corrupted symmetry, singular step matrix). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A verification suite found a broken identity. The CLI maps this to exit code 3.
class VerificationFailure : public std::runtime_error {
 public:
  explicit VerificationFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fgda
