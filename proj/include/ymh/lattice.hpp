#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace ymh {

struct Site {
  int i = 0;
  int j = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

/// Flat square torus with N sites per side and area V = (N a)^2.
///
/// Sites are numbered s = i*N + j. Internally the two axes are 0 and 1;
/// the public `shift` takes the geometric axis label 1 or 2.
class LatticeTorus {
 public:
  LatticeTorus(int n, double volume);

  int n() const noexcept { return n_; }
  double spacing() const noexcept { return a_; }
  double volume() const noexcept { return volume_; }
  /// Integration weight of one site (a^2).
  double site_weight() const noexcept { return a_ * a_; }
  std::size_t sites() const noexcept { return static_cast<std::size_t>(n_) * n_; }

  std::size_t index(Site s) const noexcept { return static_cast<std::size_t>(s.i) * n_ + s.j; }
  Site site(std::size_t s) const noexcept { return {static_cast<int>(s / n_), static_cast<int>(s % n_)}; }

  /// Neighbour of site index s one step along internal axis mu (0 or 1).
  std::size_t fwd(std::size_t s, int mu) const noexcept { return fwd_[mu][s]; }
  std::size_t bwd(std::size_t s, int mu) const noexcept { return bwd_[mu][s]; }

  /// Periodic shift along geometric axis 1 or 2.
  Site shift(Site s, int axis, int steps) const;

 private:
  int n_;
  double volume_;
  double a_;
  std::array<std::vector<std::size_t>, 2> fwd_;
  std::array<std::vector<std::size_t>, 2> bwd_;
};

using LatticePtr = std::shared_ptr<const LatticeTorus>;

LatticePtr build_torus(int n, double volume);

}  // namespace ymh
