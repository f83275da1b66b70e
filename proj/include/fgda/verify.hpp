#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fgda {

struct VerifyOptions {
  // Edge length of the square verification grid; kept small because several
  // suites run dense eigensolves and an SVD pseudoinverse oracle.
  int grid_n = 8;
  std::uint64_t seed = 20260822ull;
  // Test hook: flips the sign of one stored convection entry before the
  // structure checks run, to prove the suite actually detects a broken
  // kernel.  Never set outside the self-test.
  bool mutate_convection_sign = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed defect, in the suite's own units
  double tolerance = 0.0;  // pass threshold the defect was compared against
  std::string detail;      // one-line context for the numbers
};

struct VerifyReport {
  VerifyOptions options;
  std::vector<SuiteResult> suites;

  bool all_passed() const;
};

// Runs every structural, algebraic, and convergence check in one pass over a
// small grid: mode indexing, convection operator structure, parallel kernels
// against the serial references, the linearization identity, the conjugacy
// projector, transform round trips, discrete enstrophy laws, the gain
// least-squares solvers against a dense pseudoinverse oracle, residual
// structure, integrator order against the matrix exponential, the error
// bound envelope on a fully observed run, forcing construction, and
// observation noise determinism.
VerifyReport run_verification(const VerifyOptions& opts = {});

// Serializes the report as JSON.
void write_verify_report(const std::string& path, const VerifyReport& report);

}  // namespace fgda
