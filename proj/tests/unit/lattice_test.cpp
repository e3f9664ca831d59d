#include <doctest.h>

#include "ymh/errors.hpp"
#include "ymh/lattice.hpp"
#include "ymh/types.hpp"

using namespace ymh;

TEST_CASE("site numbering is row-major and invertible") {
  const auto lat = build_torus(6, kTwoPi);
  CHECK(lat->sites() == 36);
  for (std::size_t s = 0; s < lat->sites(); ++s) CHECK(lat->index(lat->site(s)) == s);
  CHECK(lat->index({2, 3}) == 15);
}

TEST_CASE("spacing follows from the volume") {
  const auto lat = build_torus(8, 2.0);
  CHECK(lat->spacing() == doctest::Approx(std::sqrt(2.0) / 8.0).epsilon(1e-15));
  CHECK(lat->site_weight() * static_cast<double>(lat->sites()) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("neighbours wrap and invert") {
  const auto lat = build_torus(5, kTwoPi);
  for (std::size_t s = 0; s < lat->sites(); ++s)
    for (int mu = 0; mu < 2; ++mu) {
      CHECK(lat->bwd(lat->fwd(s, mu), mu) == s);
      CHECK(lat->fwd(lat->bwd(s, mu), mu) == s);
    }
  CHECK(lat->fwd(lat->index({4, 0}), 0) == lat->index({0, 0}));
  CHECK(lat->fwd(lat->index({1, 4}), 1) == lat->index({1, 0}));
}

TEST_CASE("shift uses geometric axis labels") {
  const auto lat = build_torus(4, kTwoPi);
  CHECK(lat->shift({0, 0}, 1, 1) == Site{1, 0});
  CHECK(lat->shift({0, 0}, 2, -1) == Site{0, 3});
  CHECK(lat->shift({3, 2}, 1, 9) == Site{0, 2});
  CHECK_THROWS_AS(lat->shift({0, 0}, 0, 1), AxisError);
  CHECK_THROWS_AS(lat->shift({0, 0}, 3, 1), AxisError);
  CHECK_THROWS_AS(lat->shift({4, 0}, 1, 1), DomainError);
}

TEST_CASE("degenerate tori are rejected") {
  CHECK_THROWS_AS(build_torus(3, kTwoPi), SizingError);
  CHECK_THROWS_AS(build_torus(8, 0.0), SizingError);
  CHECK_THROWS_AS(build_torus(8, -1.0), SizingError);
}
