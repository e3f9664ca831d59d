#include <doctest.h>

#include "ymh/errors.hpp"
#include "ymh/flow.hpp"
#include "ymh/scenarios.hpp"

using namespace ymh;

namespace {

ScenarioSpec split_spec(int n = 16) {
  ScenarioSpec s;
  s.name = "split";
  s.n_sites = n;
  s.degrees = {1, -1};
  s.higgs = {{0, 1, {Complex(1.0, 0.0)}}};
  return s;
}

RVec site_spectrum(const HermitianSiteField& k, std::size_t s) { return hermitian_eigenvalues(k.values[s]); }

}  // namespace

TEST_CASE("split pair oracle") {
  // Degree-2 sections are exact null vectors only once N^2 / d is large.
  const Scenario sc = build_scenario(split_spec(32));
  CHECK(sc.oracle.tier == OracleTier::exact);
  CHECK(sc.oracle.type.str() == "{(1,1),(-1,1)}");
  REQUIRE(sc.oracle.filtration.size() == 2);
  CHECK(sc.pair.degree == 0);
  CHECK(chern_weil_degree(sc.pair, sc.oracle.filtration[0]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(chern_weil_degree(sc.pair, sc.oracle.filtration[1]) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(holomorphicity_residual(sc.pair) < 1e-8);
}

TEST_CASE("scrambling is a gauge transformation") {
  const Scenario a = build_scenario(split_spec());
  ScenarioSpec spec = split_spec();
  spec.scramble_seed = 17;
  const Scenario b = build_scenario(spec);
  CHECK(ymh::ymh(b.pair) == doctest::Approx(ymh::ymh(a.pair)).epsilon(1e-10));
  CHECK(holomorphicity_residual(b.pair) == doctest::Approx(holomorphicity_residual(a.pair)).scale(1.0).epsilon(1e-9));
  const auto ka = theta_scalar(a.pair), kb = theta_scalar(b.pair);
  double worst = 0.0;
  for (std::size_t s = 0; s < ka.values.size(); ++s)
    worst = std::max(worst, (site_spectrum(ka, s) - site_spectrum(kb, s)).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-9);
  CHECK(chern_weil_degree(b.pair, b.oracle.filtration[0]) == doctest::Approx(1.0).epsilon(1e-6));
  double moved = 0.0;
  for (std::size_t k = 0; k < a.pair.gauge.links.size(); ++k)
    moved = std::max(moved, max_abs(a.pair.gauge.links[k] - b.pair.gauge.links[k]));
  CHECK(moved > 0.1);
}

TEST_CASE("random smooth unitary fields are seeded") {
  const auto lat = build_torus(8, kTwoPi);
  const MatField a = random_smooth_unitary(*lat, 2, 5), b = random_smooth_unitary(*lat, 2, 5),
                 c = random_smooth_unitary(*lat, 2, 6);
  double same = 0.0, diff = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    CHECK(unitarity_defect(a[s]) < 1e-12);
    same = std::max(same, max_abs(a[s] - b[s]));
    diff = std::max(diff, max_abs(a[s] - c[s]));
  }
  CHECK(same == 0.0);
  CHECK(diff > 1e-3);
}

TEST_CASE("stable candidates carry an asserted semistable type") {
  ScenarioSpec s;
  s.n_sites = 16;
  s.degrees = {1, 0};
  s.twist_degree = 2;
  s.higgs = {{1, 0, {Complex(1.0, 0.0)}}};
  s.stable = true;
  const Scenario sc = build_scenario(s);
  CHECK(sc.oracle.tier == OracleTier::asserted);
  CHECK(sc.oracle.type.str() == "{(1/2,2)}");
  s.higgs.clear();
  CHECK_THROWS_AS(build_scenario(s), DomainError);
}

TEST_CASE("rank-3 triangular extension oracle") {
  ScenarioSpec s;
  s.n_sites = 32;
  s.degrees = {2, 0, -2};
  s.higgs = {{0, 1, {Complex(1.0, 0.0)}}, {1, 2, {Complex(1.0, 0.0)}}};
  s.extensions = {{0, 1, 0.2, {Complex(1.0, 0.0)}}, {1, 2, 0.2, {Complex(1.0, 0.0)}}};
  const Scenario sc = build_scenario(s);
  CHECK(sc.oracle.tier == OracleTier::exact);
  CHECK(sc.oracle.type.str() == "{(2,1),(0,1),(-2,1)}");
  REQUIRE(sc.oracle.filtration.size() == 3);
  CHECK(chern_weil_degree(sc.pair, sc.oracle.filtration[0]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("invalid specs are rejected") {
  ScenarioSpec s = split_spec();
  s.degrees = {-1, 1};
  CHECK_THROWS_AS(build_scenario(s), DomainError);
  s = split_spec();
  s.extensions = {{1, 0, 0.1, {Complex(1.0, 0.0)}}};
  CHECK_THROWS_AS(build_scenario(s), DomainError);
  s = split_spec();
  s.higgs = {{0, 1, {1.0, 1.0, 1.0}}};  // the degree-2 section space is 2-dimensional
  CHECK_THROWS_AS(build_scenario(s), SectionSpaceError);
  s = split_spec();
  s.higgs = {{1, 0, {Complex(1.0, 0.0)}}};
  CHECK_THROWS_AS(build_scenario(s), SectionSpaceError);
  s = split_spec();
  s.degrees = {1, 0, 0, 0, -1};
  CHECK_THROWS_AS(build_scenario(s), DomainError);
}
