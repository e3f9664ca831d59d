#include "ymh/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/QR>

#include "ymh/errors.hpp"
#include "ymh/flow.hpp"
#include "ymh/report.hpp"
#include "ymh/scenarios.hpp"

namespace ymh {

namespace {

using DMat = Eigen::MatrixXcd;

DMat random_matrix(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DMat m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = Complex(u(rng), u(rng));
  return m;
}

DMat random_unitary(std::mt19937_64& rng, int n) {
  Eigen::HouseholderQR<DMat> qr(random_matrix(rng, n));
  return qr.householderQ() * DMat::Identity(n, n);
}

Mat random_hermitian(std::mt19937_64& rng, int n) {
  const DMat m = random_matrix(rng, n);
  return Mat(0.5 * (m + m.adjoint()));
}

double psi_matrix(const Mat& h, double alpha) {
  const RVec ev = hermitian_eigenvalues(h);
  return psi_alpha(std::vector<double>(ev.data(), ev.data() + ev.size()), alpha);
}

struct Tally {
  explicit Tally(std::string name) { r.name = std::move(name); }
  SuiteResult r;
  double worst = 0.0;
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    ++r.checks;
    if (!ok) {
      ++r.failures;
      if (first_failure.empty()) first_failure = what;
    }
  }
  SuiteResult finish(const std::string& worst_label) {
    r.passed = r.failures == 0 && r.checks > 0;
    std::ostringstream d;
    if (!first_failure.empty())
      d << "first failure: " << first_failure;
    else
      d << worst_label << " " << format_double(worst);
    r.detail = d.str();
    return r;
  }
};

SuiteResult suite_bracket(const VerifyOptions& o) {
  Tally t("bracket");
  std::mt19937_64 rng(o.seed);
  for (int k = 0; k < o.samples; ++k) {
    const int n = 1 + k % 5;
    const int sub = static_cast<int>(rng() % static_cast<unsigned>(n + 1));
    // Phi = Q T Q^dagger with T upper triangular: the first `sub` columns of
    // Q span a Phi-invariant subspace.
    const DMat q = random_unitary(rng, n);
    DMat tri = random_matrix(rng, n).triangularView<Eigen::Upper>();
    const DMat phi = q * tri * q.adjoint();
    const DMat pi = q.leftCols(sub) * q.leftCols(sub).adjoint();
    const double d = bracket_identity_defect(phi, pi);
    t.worst = std::max(t.worst, d);
    t.check(d < 1e-12, "defect " + format_double(d) + " at n=" + std::to_string(n));
  }
  return t.finish("max defect");
}

SuiteResult suite_convexity(const VerifyOptions& o) {
  Tally t("convexity");
  std::mt19937_64 rng(o.seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < o.samples; ++k) {
    const int n = 1 + k % kMaxRank;
    const Mat a = 3.0 * random_hermitian(rng, n);
    const Mat b = 3.0 * random_hermitian(rng, n);
    const double s = u(rng);
    for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
      const double lhs = psi_matrix(s * a + (1.0 - s) * b, alpha);
      const double rhs = s * psi_matrix(a, alpha) + (1.0 - s) * psi_matrix(b, alpha);
      t.worst = std::max(t.worst, lhs - rhs);
      t.check(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)), "psi_" + format_double(alpha) + " not convex");
    }
  }
  return t.finish("max (lhs - rhs)");
}

ScenarioSpec split_spec(int n_sites, const HNType& type) {
  ScenarioSpec s;
  s.n_sites = n_sites;
  for (const auto& e : type.entries())
    for (int m = 0; m < e.multiplicity; ++m) s.degrees.push_back(static_cast<int>(e.slope.numerator()));
  return s;
}

SuiteResult suite_dominance(const VerifyOptions& o) {
  Tally t("dominance");
  // Coherence over the full enumeration.
  for (int n = 1; n <= 4; ++n) {
    for (int d = -3 * n; d <= 3 * n; ++d) {
      const auto types = enumerate_hn_types(n, d, Rational(3), n);
      for (const auto& a : types)
        for (const auto& b : types) {
          const Dominance dom = dominance_compare(a, b);
          if (dom != Dominance::equal && dom != Dominance::strictly_below) continue;
          for (int alpha : {1, 2, 3}) {
            const Rational ea = hn_type_energy_over_2pi(a, alpha, 0), eb = hn_type_energy_over_2pi(b, alpha, 0);
            t.check(ea <= eb, a.str() + " <= " + b.str() + " but E_" + std::to_string(alpha) + " decreases");
          }
          const double ea = hn_type_energy(a, 1.5, 0.0), eb = hn_type_energy(b, 1.5, 0.0);
          t.check(ea <= eb + 1e-12 * (1.0 + eb), a.str() + " <= " + b.str() + " but E_1.5 decreases");
        }
    }
  }
  // The same energies must come out of theta on split realizations.
  for (int n = 1; n <= 3; ++n) {
    for (int d = -2 * n; d <= 2 * n; ++d) {
      for (const auto& type : enumerate_hn_types(n, d, Rational(2), 1)) {
        const Scenario sc = build_split_pair(split_spec(o.n_sites, type));
        const HermitianSiteField theta = theta_scalar(sc.pair);
        for (double alpha : {1.0, 1.5, 3.0})
          for (double shift : {0.0, 2.0}) {
            const double got = ymh_weighted_from_theta(theta, alpha, shift);
            const double want = hn_type_energy(type, alpha, shift);
            const double rel = std::abs(got - want) / (1.0 + std::abs(want));
            t.worst = std::max(t.worst, rel);
            t.check(rel < 1e-9, "weighted energy of split " + type.str() + " is " + format_double(got) +
                                    ", expected " + format_double(want));
          }
        const SpectralAnalysis sa = analyze_spectrum(theta);
        t.check(sa.type && *sa.type == type, "spectral type of split " + type.str() + " is " +
                                                 (sa.type ? sa.type->str() : std::string("unresolved")));
      }
    }
  }
  return t.finish("max relative energy error");
}

SuiteResult suite_norms(const VerifyOptions& o) {
  Tally t("norms");
  const std::vector<double> ps{1.0, 2.0, 4.0, kInfNorm};
  const int count = std::max(1, o.samples / 20);
  for (int k = 0; k < count; ++k) {
    ScenarioSpec spec;
    spec.n_sites = o.n_sites;
    spec.degrees = k % 2 == 0 ? std::vector<int>{1, -1} : std::vector<int>{1, 0, -1};
    spec.scramble_seed = o.seed + static_cast<std::uint64_t>(k);
    const Scenario sc = build_scenario(spec);
    const double v = sc.pair.lattice().volume();
    HermitianSiteField psi{sc.pair.gauge.lattice, sc.pair.rank,
                           MatField(sc.pair.lattice().sites(), Mat::Zero(sc.pair.rank, sc.pair.rank))};
    std::vector<double> norms;
    for (double p : ps) norms.push_back(approx_defect(sc.pair, psi, p));
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        const double expo = 1.0 / ps[i] - (std::isinf(ps[j]) ? 0.0 : 1.0 / ps[j]);
        const double bound = std::pow(v, expo) * norms[j];
        t.worst = std::max(t.worst, norms[i] / bound);
        t.check(norms[i] <= bound * (1.0 + 1e-12),
                "L" + format_double(ps[i]) + " exceeds the L" + format_double(ps[j]) + " envelope");
      }
  }
  return t.finish("max norm ratio to envelope");
}

SuiteResult suite_degree(const VerifyOptions& o) {
  Tally t("degree");
  const std::vector<ScenarioSpec> specs = [&] {
    std::vector<ScenarioSpec> v;
    auto add = [&](std::vector<int> d, int twist, std::vector<HiggsBlock> h) {
      ScenarioSpec s;
      s.n_sites = o.n_sites;
      s.degrees = std::move(d);
      s.twist_degree = twist;
      s.higgs = std::move(h);
      v.push_back(s);
    };
    add({1, -1}, 0, {});
    add({2, 0, -2}, 0, {});
    add({1, 1, -2}, 0, {});
    add({1, 0}, 0, {{0, 1, {Complex(1.0, 0.0)}}});
    add({0, 0}, 0, {{0, 0, {Complex(1.0, 0.0)}}, {1, 1, {Complex(-1.0, 0.0)}}});
    add({1, 0, -1}, 0, {{0, 1, {Complex(0.7, 0.0)}}, {1, 2, {Complex(0.0, 0.4)}}});
    add({3, 1}, 0, {});
    add({0}, 0, {});
    add({2, 2, 0, -1}, 0, {});
    add({0, 0}, 1, {{0, 1, {Complex(1.0, 0.0)}}, {1, 0, {Complex(0.5, 0.0)}}});
    return v;
  }();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    for (bool scrambled : {false, true}) {
      ScenarioSpec spec = specs[k];
      if (scrambled) spec.scramble_seed = o.seed + k;
      const Scenario sc = build_scenario(spec);
      int want = 0;
      for (int d : spec.degrees) want += d;
      const DegreeCheck dc = degree_check(sc.pair.gauge);
      t.check(dc.degree == want && std::abs(dc.raw - want) < 1e-9, "raw degree " + format_double(dc.raw));
      const ProjectionField id = constant_projection(sc.pair.gauge.lattice, Mat::Identity(sc.pair.rank, sc.pair.rank));
      const double cw = chern_weil_degree(sc.pair, id);
      t.worst = std::max(t.worst, std::abs(cw - want));
      t.check(std::abs(cw - want) < 1e-6, "Chern-Weil degree " + format_double(cw) + " vs " + std::to_string(want));
      // Filtration degrees follow from Chern-Weil only for invariant filtrations.
      if (sc.oracle.tier != OracleTier::exact) continue;
      int cumulative = 0;
      for (std::size_t i = 0; i < sc.oracle.filtration.size(); ++i) {
        cumulative += sc.oracle.quotients[i].degree;
        const double f = chern_weil_degree(sc.pair, sc.oracle.filtration[i]);
        t.worst = std::max(t.worst, std::abs(f - cumulative));
        t.check(std::abs(f - cumulative) < 1e-6, "filtration step " + std::to_string(i + 1) + " of " +
                                                     sc.oracle.type.str() + " has degree " + format_double(f));
      }
    }
  }
  return t.finish("max degree error");
}

SuiteResult suite_sections(const VerifyOptions& o) {
  Tally t("sections");
  const LatticePtr lat = build_torus(std::max(o.n_sites, 32), kTwoPi);
  double worst_gap = std::numeric_limits<double>::infinity();
  for (int d = -4; d <= 4; ++d) {
    const int want = d > 0 ? d : d == 0 ? 1 : 0;
    try {
      const SectionSpace s = holomorphic_sections(lat, d);
      t.check(s.dimension == want, "h0(" + std::to_string(d) + ") = " + std::to_string(s.dimension));
      if (s.dimension + s.doublers > 0) {
        worst_gap = std::min(worst_gap, s.gap_ratio);
        t.check(s.gap_ratio > 1e4, "gap ratio " + format_double(s.gap_ratio) + " at d=" + std::to_string(d));
      }
    } catch (const RefineLatticeError& e) {
      t.check(false, "d=" + std::to_string(d) + ": " + e.what());
    }
  }
  t.worst = worst_gap;
  return t.finish("min gap ratio");
}

}  // namespace

SuiteResult run_suite(const std::string& name, const VerifyOptions& opts) {
  if (name == "bracket") return suite_bracket(opts);
  if (name == "convexity") return suite_convexity(opts);
  if (name == "dominance") return suite_dominance(opts);
  if (name == "norms") return suite_norms(opts);
  if (name == "degree") return suite_degree(opts);
  if (name == "sections") return suite_sections(opts);
  throw ConfigError("unknown verify suite '" + name + "'");
}

}  // namespace ymh
