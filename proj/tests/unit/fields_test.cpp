#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "ymh/errors.hpp"
#include "ymh/fields.hpp"
#include "ymh/functionals.hpp"

using namespace ymh;

namespace {

MatField random_field(const LatticeTorus& lat, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MatField f(lat.sites());
  for (auto& m : f) m = test::random_complex(n, rng);
  return f;
}

UnitaryGaugeField line_as_gauge(const TwistLineField& l) {
  MatField links(l.links.size());
  for (std::size_t k = 0; k < links.size(); ++k) links[k] = Mat::Constant(1, 1, l.links[k]);
  return make_gauge(l.lattice, 1, std::move(links));
}

}  // namespace

TEST_CASE("trivial gauge has zero curvature and degree") {
  const auto lat = build_torus(8, kTwoPi);
  const auto g = trivial_gauge(lat, 3);
  CHECK(total_degree(g) == 0);
  for (const auto& f : curvature_scalar(g)) CHECK(max_abs(f) < 1e-15);
}

TEST_CASE("uniform flux carries constant curvature 2 pi d / V per summand") {
  const double volume = 5.0;
  const auto lat = build_torus(12, volume);
  const std::vector<int> degrees{2, 0, -1};
  const auto g = diagonal_gauge(lat, degrees);
  CHECK(total_degree(g) == 1);
  CHECK(degree_check(g).raw == doctest::Approx(1.0).epsilon(1e-12));
  const auto f = curvature_scalar(g);
  for (std::size_t s = 0; s < lat->sites(); ++s)
    for (int k = 0; k < 3; ++k)
      CHECK((Complex(0, 1) * f[s](k, k)).real() == doctest::Approx(kTwoPi * degrees[k] / volume).epsilon(1e-10));
}

TEST_CASE("twist flux is 2 pi times the degree and adds under products") {
  const auto lat = build_torus(10, kTwoPi);
  for (int d : {-3, 0, 1, 4}) CHECK(twist_flux(make_line_flux(lat, d)) == doctest::Approx(kTwoPi * d).epsilon(1e-12));
  const auto a = make_line_flux(lat, 2), b = make_line_flux(lat, -5);
  TwistLineField prod = a;
  for (std::size_t k = 0; k < prod.links.size(); ++k) prod.links[k] = a.links[k] * b.links[k];
  CHECK(twist_flux(prod) == doctest::Approx(kTwoPi * -3).epsilon(1e-12));
  CHECK(total_degree(line_as_gauge(prod)) == -3);
}

TEST_CASE("plaquette is the ordered product around the square") {
  const auto lat = build_torus(6, kTwoPi);
  std::mt19937_64 rng(3);
  MatField links(2 * lat->sites());
  for (auto& u : links) u = test::random_unitary(2, rng, 0.3);
  const auto g = make_gauge(lat, 2, links);
  const std::size_t s = lat->index({2, 5});
  const Mat p = g.link(s, 0) * g.link(lat->fwd(s, 0), 1) * g.link(lat->fwd(s, 1), 0).adjoint() * g.link(s, 1).adjoint();
  CHECK(max_abs(plaquette(g, s) - p) < 1e-14);
}

TEST_CASE("non-unitary links are rejected") {
  const auto lat = build_torus(4, kTwoPi);
  MatField links(2 * lat->sites(), Mat::Identity(2, 2));
  links[3](1, 1) = 0.0;  // singular, beyond repair by re-unitarization
  CHECK_THROWS_AS(make_gauge(lat, 2, links), NonUnitaryError);
  links.pop_back();
  CHECK_THROWS_AS(make_gauge(lat, 2, links), DomainError);
}

TEST_CASE("plaquette phases at the branch cut raise BranchError") {
  // Per-plaquette phase 2 pi d / N^2 = pi for N = 4, d = 8.
  const auto lat = build_torus(4, kTwoPi);
  const auto g = line_as_gauge(make_line_flux(lat, 8));
  CHECK_THROWS_AS(plaquette_spectra(g), BranchError);
}

TEST_CASE("backward difference is minus the adjoint of the forward one") {
  const auto lat = build_torus(7, 3.0);
  std::mt19937_64 rng(5);
  MatField links(2 * lat->sites());
  for (auto& u : links) u = test::random_unitary(2, rng, 0.5);
  const auto g = make_gauge(lat, 2, links);
  const auto tw = make_line_flux(lat, 1);
  const MatField f = random_field(*lat, 2, 6), h = random_field(*lat, 2, 7);
  for (const TwistLineField* t : {static_cast<const TwistLineField*>(nullptr), &tw})
    for (int axis : {1, 2}) {
      const double lhs = l2_inner(*lat, covariant_forward(g, t, f, axis), h);
      const double rhs = -l2_inner(*lat, f, covariant_backward(g, t, h, axis));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("curvature operator and YMH are gauge invariant") {
  const auto lat = build_torus(8, kTwoPi);
  std::mt19937_64 rng(9);
  MatField links(2 * lat->sites());
  for (auto& u : links) u = test::random_unitary(2, rng, 0.3);
  HiggsField phi{lat, 2, random_field(*lat, 2, 10)};
  const auto pair = make_pair(make_gauge(lat, 2, links), make_line_flux(lat, 1), phi);
  MatField gt(lat->sites());
  for (auto& m : gt) m = test::random_unitary(2, rng, 2.0);
  const auto moved = unitary_gauge_transform(pair, gt);
  CHECK(ymh::ymh(moved) == doctest::Approx(ymh::ymh(pair)).epsilon(1e-11));
  const auto k0 = theta_scalar(pair), k1 = theta_scalar(moved);
  for (std::size_t s = 0; s < lat->sites(); ++s) {
    const RVec a = hermitian_eigenvalues(k0.values[s]), b = hermitian_eigenvalues(k1.values[s]);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("theta is iF + 2[Phi, Phi^dagger] without a metric") {
  const auto lat = build_torus(6, kTwoPi);
  HiggsField phi{lat, 2, random_field(*lat, 2, 21)};
  const auto pair = make_pair(diagonal_gauge(lat, {1, -1}), make_line_flux(lat, 0), phi);
  const auto k = theta_scalar(pair);
  const auto f = curvature_scalar(pair.gauge);
  for (std::size_t s = 0; s < lat->sites(); ++s) {
    const Mat& p = phi.values[s];
    const Mat expect = Complex(0, 1) * f[s] + 2.0 * (p * p.adjoint() - p.adjoint() * p);
    CHECK(max_abs(k.values[s] - expect) < 1e-12);
  }
  const auto id = identity_metric(lat, 2);
  const auto kh = theta_scalar(pair, &id);
  for (std::size_t s = 0; s < lat->sites(); ++s) CHECK(max_abs(kh.values[s] - k.values[s]) < 1e-12);
}

TEST_CASE("curvature sign mutation flips the curvature term") {
  const auto lat = build_torus(6, kTwoPi);
  const auto pair = make_pair(diagonal_gauge(lat, {1, -1}), make_line_flux(lat, 0), zero_higgs(lat, 2));
  const auto k0 = theta_scalar(pair);
  mutation::set_flip_curvature_sign(true);
  const auto k1 = theta_scalar(pair);
  mutation::set_flip_curvature_sign(false);
  CHECK(max_abs(k0.values[0] + k1.values[0]) < 1e-14);
  CHECK(max_abs(k0.values[0]) > 0.1);
}

TEST_CASE("metric validation") {
  const auto lat = build_torus(4, kTwoPi);
  auto h = identity_metric(lat, 2);
  CHECK_NOTHROW(validate_metric(h));
  h.values[1](1, 1) = -1.0;
  CHECK_THROWS_AS(validate_metric(h), MetricError);
  h = identity_metric(lat, 2);
  h.values[0] *= 1e4;
  CHECK_THROWS_AS(validate_metric(h, 1e-6, 1e6), MetricError);
}

TEST_CASE("projection validation") {
  const auto lat = build_torus(4, kTwoPi);
  Mat p = Mat::Zero(2, 2);
  p(0, 0) = 1.0;
  CHECK_NOTHROW(validate_projection(constant_projection(lat, p)));
  p(0, 1) = 0.3;
  CHECK_THROWS_AS(validate_projection(constant_projection(lat, p)), ProjectionError);
}
