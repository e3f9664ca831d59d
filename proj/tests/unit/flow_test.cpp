#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "ymh/errors.hpp"
#include "ymh/flow.hpp"

using namespace ymh;

namespace {

HiggsPair rough_pair(int n_sites, std::uint64_t seed) {
  const auto lat = build_torus(n_sites, kTwoPi);
  std::mt19937_64 rng(seed);
  auto g = diagonal_gauge(lat, {1, -1});
  for (auto& u : g.links) u = test::random_unitary(2, rng, 0.15) * u;
  HiggsField phi = zero_higgs(lat, 2);
  for (auto& m : phi.values) m = test::random_complex(2, rng, 0.3);
  return make_pair(g, make_line_flux(lat, 1), phi);
}

Tangent random_tangent(const LatticeTorus& lat, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tangent t;
  t.links.resize(2 * lat.sites());
  t.higgs.resize(lat.sites());
  for (auto& x : t.links) x = antiherm_part(test::random_complex(2, rng));
  for (auto& h : t.higgs) h = test::random_complex(2, rng);
  return t;
}

// The flow metric: sum over links of Re<X,Y> plus 4 a^2 sum over sites of Re<dPhi,dPsi>.
double flow_inner(const LatticeTorus& lat, const Tangent& a, const Tangent& b) {
  double links = 0.0, higgs = 0.0;
  for (std::size_t k = 0; k < a.links.size(); ++k) links += (a.links[k].adjoint() * b.links[k]).trace().real();
  for (std::size_t s = 0; s < a.higgs.size(); ++s) higgs += (a.higgs[s].adjoint() * b.higgs[s]).trace().real();
  return links + 4.0 * lat.site_weight() * higgs;
}

HermitianSiteField constant_theta(int n_sites, const std::vector<double>& diag, double noise, std::uint64_t seed) {
  const auto lat = build_torus(n_sites, kTwoPi);
  std::mt19937_64 rng(seed);
  const int n = static_cast<int>(diag.size());
  HermitianSiteField k{lat, n, {}};
  for (std::size_t s = 0; s < lat->sites(); ++s) {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = diag[i];
    const Mat q = test::random_unitary(n, rng, 2.0);
    k.values.push_back(q * (m + test::random_hermitian(n, rng, noise)) * q.adjoint());
  }
  return k;
}

}  // namespace

TEST_CASE("gradient is the metric dual of the YMH differential") {
  const auto pair = rough_pair(6, 1);
  const auto& lat = pair.lattice();
  const Tangent g = gradient(pair);
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const Tangent v = random_tangent(lat, seed);
    const double h = 1e-5;
    const double fd = (ymh::ymh(apply_tangent(pair, v, h)) - ymh::ymh(apply_tangent(pair, v, -h))) / (2 * h);
    // Descent direction: dYMH(v) = -2 <gradient, v>.
    CHECK(fd == doctest::Approx(-2.0 * flow_inner(lat, g, v)).epsilon(1e-6));
  }
  CHECK(tangent_norm_sq(lat, g) == doctest::Approx(flow_inner(lat, g, g)).epsilon(1e-12));
  CHECK(critical_residual(pair) * critical_residual(pair) == doctest::Approx(tangent_norm_sq(lat, g)).epsilon(1e-10));
}

TEST_CASE("small steps decrease the energy at the predicted rate") {
  const auto pair = rough_pair(8, 5);
  const double e0 = ymh::ymh(pair);
  const double r2 = tangent_norm_sq(pair.lattice(), gradient(pair));
  const double dt = 1e-6;
  const double e1 = ymh::ymh(step(pair, dt));
  CHECK(e1 < e0);
  CHECK((e1 - e0) / dt == doctest::Approx(-2.0 * r2).epsilon(1e-4));
  CHECK_THROWS_AS(step(pair, 0.0), DomainError);
}

TEST_CASE("spectral analysis rounds clusters to slopes") {
  SUBCASE("split type") {
    const auto k = constant_theta(6, {1.0, -1.0}, 0.01, 1);
    const auto a = analyze_spectrum(k);
    REQUIRE(a.resolved);
    CHECK(a.type->str() == "{(1,1),(-1,1)}");
    CHECK(a.clusters.size() == 2);
    CHECK(a.clusters[0].deviation < 0.05);
  }
  SUBCASE("merged bands and fractional slopes") {
    const auto k = constant_theta(6, {0.5, 0.5, -1.0}, 0.002, 2);
    const auto a = analyze_spectrum(k);
    REQUIRE(a.resolved);
    CHECK(a.type->str() == "{(1/2,2),(-1,1)}");
  }
  SUBCASE("off-grid mean is unresolved") {
    const auto k = constant_theta(6, {0.27, -0.27}, 0.0, 3);
    const auto a = analyze_spectrum(k);
    CHECK_FALSE(a.resolved);
    CHECK_FALSE(a.type.has_value());
  }
  SUBCASE("wide spread is unresolved") {
    const auto k = constant_theta(6, {1.0, -1.0}, 0.3, 4);
    CHECK_FALSE(analyze_spectrum(k).resolved);
  }
}

TEST_CASE("option resolution") {
  const auto lat = build_torus(8, kTwoPi);
  FlowOptions o;
  const auto r = resolve_options(o, *lat);
  CHECK(*r.dt_initial == doctest::Approx(0.2 * lat->site_weight()));
  CHECK(*r.dt_min == doctest::Approx(1e-6 * *r.dt_initial));
  o.dt_initial = 1e-3;
  o.dt_min = 1e-2;
  CHECK_THROWS_AS(resolve_options(o, *lat), ConfigError);
  o = FlowOptions{};
  o.stop_residual = 0.0;
  CHECK_THROWS_AS(resolve_options(o, *lat), ConfigError);
  o = FlowOptions{};
  o.watch = {{0.5, 0.0}};
  CHECK_THROWS_AS(resolve_options(o, *lat), ConfigError);
}

TEST_CASE("critical split pair converges immediately with zero splitting residuals") {
  const auto lat = build_torus(8, kTwoPi);
  const auto pair = make_pair(diagonal_gauge(lat, {1, -1}), make_line_flux(lat, 0), zero_higgs(lat, 2));
  FlowOptions o;
  o.watch = {};
  const auto r = integrate(pair, o);
  CHECK(r.reason == Termination::converged);
  CHECK(r.steps_accepted == 0);
  REQUIRE(r.terminal_type.has_value());
  CHECK(r.terminal_type->str() == "{(1,1),(-1,1)}");
  REQUIRE(r.splitting.size() == 2);
  for (const auto& s : r.splitting) {
    CHECK(s.dbar < 1e-10);
    CHECK(s.bracket < 1e-12);
  }
  CHECK(r.final_ymh == doctest::Approx(kTwoPi * 2.0).epsilon(1e-10));
}

TEST_CASE("pair flow is monotone and respects max_steps") {
  const auto pair = rough_pair(8, 7);
  FlowOptions o;
  o.max_steps = 40;
  o.checkpoint_stride = 1;
  o.watch = {{1.0, 0.0}, {3.0, 2.0}};
  const auto r = integrate(pair, o);
  CHECK(r.reason == Termination::max_steps);
  CHECK(r.steps_accepted == 40);
  CHECK(r.monotonicity_violations == 0);
  REQUIRE(r.samples.size() == 41);
  for (std::size_t k = 1; k < r.samples.size(); ++k) {
    CHECK(r.samples[k].ymh <= r.samples[k - 1].ymh);
    CHECK(r.samples[k].t > r.samples[k - 1].t);
    CHECK(r.samples[k].weighted.size() == 2);
  }
  CHECK_FALSE(r.terminal_type.has_value());
}

TEST_CASE("metric heat step keeps det H and the identity for a split base") {
  const auto lat = build_torus(8, kTwoPi);
  const auto base = make_pair(diagonal_gauge(lat, {1, -1}), make_line_flux(lat, 0), zero_higgs(lat, 2));
  auto h = identity_metric(lat, 2);
  for (int k = 0; k < 5; ++k) h = metric_heat_step(h, base, 0.01, 1e-6, 1e6);
  for (const auto& m : h.values) {
    CHECK(m.determinant().real() == doctest::Approx(1.0).epsilon(1e-12));
    // K - mu = diag(1, -1): H = diag(exp(-t), exp(t)).
    CHECK(m(0, 0).real() == doctest::Approx(std::exp(-0.05)).epsilon(1e-10));
    CHECK(std::abs(m(0, 1)) < 1e-12);
  }
  CHECK_THROWS_AS(metric_heat_step(identity_metric(lat, 2), base, 0.01, 2.0, 3.0), MetricError);
}

TEST_CASE("termination names") {
  CHECK(to_string(Termination::converged) == "converged");
  CHECK(to_string(Termination::max_steps) == "max_steps");
}
