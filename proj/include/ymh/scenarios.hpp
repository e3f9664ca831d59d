#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ymh/fields.hpp"
#include "ymh/functionals.hpp"

namespace ymh {

/// Discrete holomorphic sections of the degree-d flux line bundle: the
/// physical part of the null space of (D_1 + i D_2)/2.
///
/// Any square-lattice first-order operator has index zero, so the forward
/// operator also annihilates rapidly oscillating "doubler" modes (|d| of them
/// for d < 0, one extra for d = 0 when 4 | N). They are separated from smooth
/// sections by the backward-difference operator, which is O(a) on smooth
/// modes and O(1/a) on doublers.
struct SectionSpace {
  int degree = 0;
  int dimension = 0;  // physical sections
  int doublers = 0;
  /// Basis orthonormal for the mean inner product (1/V) Sum a^2 conj(f) g,
  /// so a constant section has value 1.
  std::vector<std::vector<Complex>> basis;
  /// Smallest singular values found (ascending), in units of sigma_max.
  std::vector<double> singular_values;
  double sigma_max = 0.0;
  /// sigma_{c+1} / sigma_c over the full null space of size c (inf if c = 0).
  double gap_ratio = 0.0;
};

/// Throws RefineLatticeError when the singular spectrum has no clean gap.
SectionSpace holomorphic_sections(const LatticePtr& lattice, int degree);

/// Orthogonal projection of a charged Higgs field onto the physical discrete
/// holomorphic sections of End(E) (x) L for the pair's own gauge field.
/// Returns the projected field; `dimension` receives the section count.
/// With a `reference` pair (same lattice and rank) the subspace is the
/// near-null space of the same size as the reference's exact one; extended
/// structures are only approximately holomorphic on the lattice.
HiggsField project_holomorphic(const HiggsPair& pair, const HiggsField& phi0, int* dimension = nullptr,
                               const HiggsPair* reference = nullptr);

struct HiggsBlock {
  int row = 0;  // 0-based
  int col = 0;
  std::vector<Complex> amplitudes;  // coefficients on holomorphic_sections basis
};

struct ExtensionBlock {
  int row = 0;  // 0-based, row < col
  int col = 0;
  double epsilon = 0.0;
  std::vector<Complex> amplitudes;  // coefficients on holomorphic_sections basis
};

struct ScenarioSpec {
  std::string name;
  int n_sites = 16;
  double volume = kTwoPi;
  std::vector<int> degrees;  // non-increasing
  int twist_degree = 0;
  std::vector<HiggsBlock> higgs;
  std::vector<ExtensionBlock> extensions;
  bool stable = false;  // build as an asserted stable candidate
  std::optional<std::uint64_t> scramble_seed;
};

enum class OracleTier { exact, asserted };
std::string to_string(OracleTier t);

struct QuotientData {
  int rank = 0;
  int degree = 0;
  std::string stability;  // "stable-line", "semistable-sum", "asserted-stable"
};

struct ScenarioOracle {
  HNType type;
  OracleTier tier = OracleTier::asserted;
  /// Cumulative projections pi_1 < ... < pi_l = Id.
  std::vector<ProjectionField> filtration;
  std::vector<QuotientData> quotients;
};

struct Scenario {
  ScenarioSpec spec;
  HiggsPair pair;
  ScenarioOracle oracle;
};

Scenario build_split_pair(const ScenarioSpec& spec);
Scenario build_extension_pair(const ScenarioSpec& spec);
Scenario build_stable_candidate(const ScenarioSpec& spec);
/// Dispatches on the spec (stable flag, presence of extensions) and applies
/// the scramble when a seed is given.
Scenario build_scenario(const ScenarioSpec& spec);

/// Smooth random unitary field exp(i X) with X a low-mode Hermitian
/// potential drawn from a seeded mt19937_64.
MatField random_smooth_unitary(const LatticeTorus& lattice, int rank, std::uint64_t seed);

HiggsPair scramble_unitary(const HiggsPair& pair, std::uint64_t seed);
/// Scrambles the pair and transports the oracle projections with it.
Scenario scramble_scenario(const Scenario& s, std::uint64_t seed);

}  // namespace ymh
