#pragma once

// Flow-free property suites behind `ymhlab verify`.
//
//   bracket    Tr([Phi,Phi^dagger] pi) = |[Phi,pi]|^2 on Phi-invariant pi, n <= 5
//   convexity  psi_alpha is convex on Hermitian matrices
//   dominance  A <= B implies E_alpha(A) <= E_alpha(B) over all enumerated
//              types, and split pairs realize E_alpha(type) through theta
//   norms      Hoelder envelope between L^p defects on a finite torus
//   degree     degree integrality and Chern-Weil filtration degrees
//   sections   Riemann-Roch counts for d in [-4, 4] on N >= 32

#include <cstdint>
#include <string>
#include <vector>

namespace ymh {

struct VerifyOptions {
  int n_sites = 16;
  int samples = 200;
  std::uint64_t seed = 1;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  long checks = 0;
  long failures = 0;
  std::string detail;  // worst case or first failure
};

/// Throws ConfigError for an unknown suite name.
SuiteResult run_suite(const std::string& name, const VerifyOptions& opts);

}  // namespace ymh
