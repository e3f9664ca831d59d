#include "ymh/lattice.hpp"

#include <cmath>
#include <string>

#include "ymh/errors.hpp"

namespace ymh {

LatticeTorus::LatticeTorus(int n, double volume) : n_(n), volume_(volume) {
  if (n < 4) throw SizingError("lattice needs N >= 4, got " + std::to_string(n));
  if (!(volume > 0.0) || !std::isfinite(volume)) throw SizingError("lattice volume must be positive and finite");
  a_ = std::sqrt(volume) / n;
  for (int mu = 0; mu < 2; ++mu) {
    fwd_[mu].resize(sites());
    bwd_[mu].resize(sites());
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t s = index({i, j});
      fwd_[0][s] = index({(i + 1) % n, j});
      bwd_[0][s] = index({(i + n - 1) % n, j});
      fwd_[1][s] = index({i, (j + 1) % n});
      bwd_[1][s] = index({i, (j + n - 1) % n});
    }
  }
}

Site LatticeTorus::shift(Site s, int axis, int steps) const {
  if (axis != 1 && axis != 2) throw AxisError("axis must be 1 or 2, got " + std::to_string(axis));
  if (s.i < 0 || s.i >= n_ || s.j < 0 || s.j >= n_) throw DomainError("site outside the lattice");
  auto wrap = [this](long long v) { return static_cast<int>(((v % n_) + n_) % n_); };
  if (axis == 1) return {wrap(static_cast<long long>(s.i) + steps), s.j};
  return {s.i, wrap(static_cast<long long>(s.j) + steps)};
}

LatticePtr build_torus(int n, double volume) { return std::make_shared<const LatticeTorus>(n, volume); }

}  // namespace ymh
