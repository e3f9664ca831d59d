#include "ymh/scenarios.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ymh/errors.hpp"
#include "ymh/parallel.hpp"

namespace ymh {

std::string to_string(OracleTier t) { return t == OracleTier::exact ? "exact" : "asserted"; }

namespace {

bool any_nonzero(const std::vector<Complex>& v) {
  for (const auto& z : v)
    if (z != Complex(0.0, 0.0)) return true;
  return false;
}

void validate_spec(const ScenarioSpec& spec) {
  const int n = static_cast<int>(spec.degrees.size());
  if (n < 1 || n > kMaxRank) throw DomainError("scenario rank must be in [1, " + std::to_string(kMaxRank) + "]");
  for (int k = 1; k < n; ++k)
    if (spec.degrees[k] > spec.degrees[k - 1]) throw DomainError("summand degrees must be non-increasing");
  for (const auto& b : spec.higgs)
    if (b.row < 0 || b.row >= n || b.col < 0 || b.col >= n) throw DomainError("Higgs block index out of range");
  for (const auto& e : spec.extensions) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) throw DomainError("extension block index out of range");
    if (!(e.row < e.col))
      throw DomainError("extension data must sit above the diagonal to preserve the filtration");
    if (!(e.epsilon >= 0.0)) throw DomainError("extension scaling must be non-negative");
  }
}

std::vector<Complex> block_section(const LatticePtr& lat, int degree, const std::vector<Complex>& amps,
                                   const std::string& what) {
  const SectionSpace sec = holomorphic_sections(lat, degree);
  if (sec.dimension == 0)
    throw SectionSpaceError(what + " needs a section of a degree-" + std::to_string(degree) +
                            " bundle, which has none");
  if (static_cast<int>(amps.size()) > sec.dimension)
    throw SectionSpaceError(what + " has more amplitudes than sections (" + std::to_string(sec.dimension) + ")");
  std::vector<Complex> f(lat->sites(), Complex(0.0, 0.0));
  for (std::size_t k = 0; k < amps.size(); ++k)
    for (std::size_t s = 0; s < f.size(); ++s) f[s] += amps[k] * sec.basis[k][s];
  return f;
}

/// Groups of equal consecutive degrees: (first index, size).
std::vector<std::pair<int, int>> degree_groups(const std::vector<int>& degrees) {
  std::vector<std::pair<int, int>> g;
  for (int k = 0; k < static_cast<int>(degrees.size()); ++k) {
    if (!g.empty() && degrees[k] == degrees[g.back().first])
      ++g.back().second;
    else
      g.emplace_back(k, 1);
  }
  return g;
}

ScenarioOracle leading_summand_oracle(const ScenarioSpec& spec, const LatticePtr& lat) {
  const int n = static_cast<int>(spec.degrees.size());
  const auto groups = degree_groups(spec.degrees);
  std::vector<int> group_of(n);
  for (int g = 0; g < static_cast<int>(groups.size()); ++g)
    for (int k = 0; k < groups[g].second; ++k) group_of[groups[g].first + k] = g;

  bool triangular = true;
  for (const auto& b : spec.higgs)
    if (any_nonzero(b.amplitudes) && group_of[b.row] > group_of[b.col]) triangular = false;

  ScenarioOracle o;
  std::vector<HNEntry> entries;
  Mat cumulative = Mat::Zero(n, n);
  for (const auto& [first, size] : groups) {
    const int k = spec.degrees[first];
    entries.push_back({Rational(k), size});
    for (int j = first; j < first + size; ++j) cumulative(j, j) = 1.0;
    o.filtration.push_back(constant_projection(lat, cumulative));
    o.quotients.push_back({size, k * size, size == 1 ? "stable-line" : "semistable-sum"});
  }
  o.type = HNType(entries);
  o.tier = triangular ? OracleTier::exact : OracleTier::asserted;
  return o;
}

HiggsPair assemble(const ScenarioSpec& spec, const LatticePtr& lat) {
  const int n = static_cast<int>(spec.degrees.size());
  TwistLineField twist = make_line_flux(lat, spec.twist_degree);
  UnitaryGaugeField gauge = diagonal_gauge(lat, spec.degrees);
  const UnitaryGaugeField split_gauge = gauge;

  HiggsField phi = zero_higgs(lat, n);
  bool has_phi = false;
  for (const auto& b : spec.higgs) {
    if (!any_nonzero(b.amplitudes)) continue;
    has_phi = true;
    const int d = spec.degrees[b.row] - spec.degrees[b.col] + spec.twist_degree;
    const std::string what = "Higgs block (" + std::to_string(b.row + 1) + "," + std::to_string(b.col + 1) + ")";
    const auto f = block_section(lat, d, b.amplitudes, what);
    for (std::size_t s = 0; s < f.size(); ++s) phi.values[s](b.row, b.col) += f[s];
  }

  bool extended = false;
  MatField b1(lat->sites(), Mat::Zero(n, n)), b2(lat->sites(), Mat::Zero(n, n));
  const Complex i1(0.0, 1.0);
  for (const auto& e : spec.extensions) {
    if (e.epsilon == 0.0) continue;
    extended = true;
    const int d = spec.degrees[e.row] - spec.degrees[e.col];
    const std::vector<Complex> amps = e.amplitudes.empty() ? std::vector<Complex>{1.0} : e.amplitudes;
    const std::string what = "extension block (" + std::to_string(e.row + 1) + "," + std::to_string(e.col + 1) + ")";
    const auto beta = block_section(lat, d, amps, what);
    // (0,1) part beta in block (row, col), nothing below the diagonal:
    // B1 = beta e_rc - conj(beta) e_cr, B2 = -i beta e_rc - i conj(beta) e_cr.
    for (std::size_t s = 0; s < beta.size(); ++s) {
      const Complex v = e.epsilon * beta[s];
      b1[s](e.row, e.col) += v;
      b1[s](e.col, e.row) -= std::conj(v);
      b2[s](e.row, e.col) += -i1 * v;
      b2[s](e.col, e.row) += -i1 * std::conj(v);
    }
  }
  if (extended) {
    const double a = lat->spacing();
    for_each_index(lat->sites(), [&](std::size_t s) {
      gauge.link(s, 0) = reunitarize(expm_antihermitian(a * b1[s]) * gauge.link(s, 0));
      gauge.link(s, 1) = reunitarize(expm_antihermitian(a * b2[s]) * gauge.link(s, 1));
    });
  }

  HiggsPair pair = make_pair(std::move(gauge), std::move(twist), std::move(phi));
  if (extended && has_phi) {
    const HiggsPair split = make_pair(split_gauge, pair.twist, pair.higgs);
    pair.higgs = project_holomorphic(pair, pair.higgs, nullptr, &split);
  }
  return pair;
}

}  // namespace

Scenario build_split_pair(const ScenarioSpec& spec) {
  validate_spec(spec);
  for (const auto& e : spec.extensions)
    if (e.epsilon != 0.0) throw DomainError("build_split_pair needs every extension scaling to be 0");
  const LatticePtr lat = build_torus(spec.n_sites, spec.volume);
  Scenario sc;
  sc.spec = spec;
  sc.pair = assemble(spec, lat);
  sc.oracle = leading_summand_oracle(spec, lat);
  return sc;
}

Scenario build_extension_pair(const ScenarioSpec& spec) {
  validate_spec(spec);
  const LatticePtr lat = build_torus(spec.n_sites, spec.volume);
  Scenario sc;
  sc.spec = spec;
  sc.pair = assemble(spec, lat);
  sc.oracle = leading_summand_oracle(spec, lat);
  return sc;
}

Scenario build_stable_candidate(const ScenarioSpec& spec) {
  validate_spec(spec);
  if (spec.degrees.size() != 2) throw DomainError("stable candidates are rank 2");
  if (!spec.extensions.empty())
    for (const auto& e : spec.extensions)
      if (e.epsilon != 0.0) throw DomainError("stable candidates take no extension data");
  bool lower = false, upper = false;
  for (const auto& b : spec.higgs) {
    if (!any_nonzero(b.amplitudes)) continue;
    if (b.row == 1 && b.col == 0) lower = true;
    if (b.row == 0 && b.col == 1) upper = true;
  }
  if (!lower)
    throw DomainError("not a stable candidate: the first summand is a phi-invariant subbundle of maximal slope");
  if (spec.degrees[0] == spec.degrees[1] && !upper)
    throw DomainError("not a stable candidate: the second summand is phi-invariant with equal slope");
  const LatticePtr lat = build_torus(spec.n_sites, spec.volume);
  Scenario sc;
  sc.spec = spec;
  sc.pair = assemble(spec, lat);
  const int deg = spec.degrees[0] + spec.degrees[1];
  sc.oracle.type = HNType({{Rational(deg, 2), 2}});
  sc.oracle.tier = OracleTier::asserted;
  sc.oracle.filtration.push_back(constant_projection(lat, Mat::Identity(2, 2)));
  sc.oracle.quotients.push_back({2, deg, "asserted-stable"});
  return sc;
}

Scenario build_scenario(const ScenarioSpec& spec) {
  Scenario sc;
  bool extended = false;
  for (const auto& e : spec.extensions) extended = extended || e.epsilon != 0.0;
  if (spec.stable)
    sc = build_stable_candidate(spec);
  else if (extended)
    sc = build_extension_pair(spec);
  else
    sc = build_split_pair(spec);
  if (spec.scramble_seed) sc = scramble_scenario(sc, *spec.scramble_seed);
  return sc;
}

MatField random_smooth_unitary(const LatticeTorus& lat, int rank, std::uint64_t seed) {
  constexpr int kModes = 2;
  constexpr double kAmp = 0.2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Mode {
    int kx, ky;
    Mat c;
  };
  std::vector<Mode> modes;
  for (int kx = -kModes; kx <= kModes; ++kx)
    for (int ky = -kModes; ky <= kModes; ++ky) {
      Mat c(rank, rank);
      for (int r = 0; r < rank; ++r)
        for (int q = 0; q < rank; ++q) c(r, q) = kAmp * Complex(u(rng), u(rng));
      modes.push_back({kx, ky, c});
    }
  const int n = lat.n();
  MatField g(lat.sites());
  for_each_index(lat.sites(), [&](std::size_t s) {
    const Site st = lat.site(s);
    Mat x = Mat::Zero(rank, rank);
    for (const auto& m : modes) {
      const Complex ph = std::polar(1.0, kTwoPi * (m.kx * st.i + m.ky * st.j) / n);
      x += ph * m.c;
    }
    x = herm_part(x);
    g[s] = expm_antihermitian(Complex(0.0, 1.0) * x);
  });
  return g;
}

HiggsPair scramble_unitary(const HiggsPair& pair, std::uint64_t seed) {
  return unitary_gauge_transform(pair, random_smooth_unitary(pair.lattice(), pair.rank, seed));
}

Scenario scramble_scenario(const Scenario& in, std::uint64_t seed) {
  const MatField g = random_smooth_unitary(in.pair.lattice(), in.pair.rank, seed);
  Scenario out = in;
  out.spec.scramble_seed = seed;
  out.pair = unitary_gauge_transform(in.pair, g);
  for (auto& p : out.oracle.filtration)
    for (std::size_t s = 0; s < p.values.size(); ++s) p.values[s] = herm_part(g[s] * p.values[s] * g[s].adjoint());
  return out;
}

}  // namespace ymh
