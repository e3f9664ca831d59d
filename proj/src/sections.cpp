#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "ymh/errors.hpp"
#include "ymh/scenarios.hpp"

namespace ymh {

namespace {

using SpMat = Eigen::SparseMatrix<Complex>;
using DMat = Eigen::MatrixXcd;

/// Per-link transport on a q-dimensional fibre, index 2*s + mu.
struct Transport {
  int q = 1;
  std::vector<DMat> t;
};

SpMat forward_dbar(const LatticeTorus& lat, const Transport& tr) {
  const int q = tr.q;
  const Complex i1(0.0, 1.0);
  const double h = 0.5 / lat.spacing();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(lat.sites() * q * (2 * q + 1));
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const auto row0 = static_cast<int>(s) * q;
    for (int r = 0; r < q; ++r) trip.emplace_back(row0 + r, row0 + r, -(1.0 + i1) * h);
    for (int mu = 0; mu < 2; ++mu) {
      const Complex c = mu == 0 ? Complex(h, 0.0) : i1 * h;
      const auto col0 = static_cast<int>(lat.fwd(s, mu)) * q;
      const DMat& t = tr.t[2 * s + mu];
      for (int r = 0; r < q; ++r)
        for (int k = 0; k < q; ++k)
          if (t(r, k) != Complex(0.0, 0.0)) trip.emplace_back(row0 + r, col0 + k, c * t(r, k));
    }
  }
  const auto dim = static_cast<Eigen::Index>(lat.sites()) * q;
  SpMat d(dim, dim);
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

SpMat backward_dbar(const LatticeTorus& lat, const Transport& tr) {
  const int q = tr.q;
  const Complex i1(0.0, 1.0);
  const double h = 0.5 / lat.spacing();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(lat.sites() * q * (2 * q + 1));
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const auto row0 = static_cast<int>(s) * q;
    for (int r = 0; r < q; ++r) trip.emplace_back(row0 + r, row0 + r, (1.0 + i1) * h);
    for (int mu = 0; mu < 2; ++mu) {
      const Complex c = mu == 0 ? Complex(-h, 0.0) : -i1 * h;
      const std::size_t b = lat.bwd(s, mu);
      const auto col0 = static_cast<int>(b) * q;
      const DMat ta = tr.t[2 * b + mu].adjoint();
      for (int r = 0; r < q; ++r)
        for (int k = 0; k < q; ++k)
          if (ta(r, k) != Complex(0.0, 0.0)) trip.emplace_back(row0 + r, col0 + k, c * ta(r, k));
    }
  }
  const auto dim = static_cast<Eigen::Index>(lat.sites()) * q;
  SpMat d(dim, dim);
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

DMat random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DMat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Complex(u(rng), u(rng));
  return m;
}

DMat orthonormalize(const DMat& v) {
  Eigen::HouseholderQR<DMat> qr(v);
  return qr.householderQ() * DMat::Identity(v.rows(), v.cols());
}

struct NullSpace {
  DMat physical;  // Euclidean-orthonormal columns
  int raw_null = 0;
  int doublers = 0;
  std::vector<double> sv_rel;
  double sigma_max = 0.0;
  double gap_ratio = 0.0;
};

struct NullCounts {
  int raw = 0;
  int physical = 0;
};

/// With `forced`, the near-null space is taken by count instead of by
/// threshold; used where the lattice operator is only approximately singular.
NullSpace physical_null_space(const LatticeTorus& lat, const Transport& tr, int block_hint,
                              const NullCounts* forced = nullptr) {
  const SpMat d = forward_dbar(lat, tr);
  const SpMat b = backward_dbar(lat, tr);
  const Eigen::Index dim = d.cols();

  // sigma_max by power iteration on D^dagger D.
  Eigen::VectorXcd x = random_block(dim, 1, 0x5eed).col(0);
  double lam = 0.0;
  for (int it = 0; it < 80; ++it) {
    x.normalize();
    Eigen::VectorXcd y = d.adjoint() * (d * x);
    lam = x.dot(y).real();
    x = y;
  }
  NullSpace out;
  out.sigma_max = std::sqrt(lam);

  const SpMat dd = SpMat(d.adjoint()) * d;
  SpMat a = dd;
  SpMat id(dim, dim);
  id.setIdentity();
  a += (1e-9 * lam) * id;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw RefineLatticeError("factorization of the dbar normal operator failed");

  Eigen::Index m = std::min<Eigen::Index>(block_hint, dim);
  DMat ritz;
  Eigen::VectorXd sv;
  int c = 0;
  while (true) {
    DMat v = orthonormalize(random_block(dim, m, 0xb10c + static_cast<std::uint64_t>(m)));
    for (int it = 0; it < 8; ++it) v = orthonormalize(ldlt.solve(v));
    const DMat dv = d * v;
    Eigen::JacobiSVD<DMat> svd(dv, Eigen::ComputeThinV);
    // Eigen sorts singular values in decreasing order; flip to ascending.
    sv = svd.singularValues().reverse();
    ritz = v * svd.matrixV().rowwise().reverse();
    c = 0;
    if (forced)
      c = std::min<int>(forced->raw, static_cast<int>(sv.size()));
    else
      while (c < sv.size() && sv(c) < 1e-8 * out.sigma_max) ++c;
    if (c < m - 1 || m == dim) break;
    m = std::min<Eigen::Index>(2 * m, dim);
  }
  for (Eigen::Index k = 0; k < sv.size(); ++k) out.sv_rel.push_back(sv(k) / out.sigma_max);
  out.raw_null = c;
  const double next = c < sv.size() ? sv(c) : out.sigma_max;
  out.gap_ratio = c == 0 ? std::numeric_limits<double>::infinity() : next / std::max(sv(c - 1), 1e-300);
  if (!forced && next < 1e-4 * out.sigma_max)
    throw RefineLatticeError("smallest non-null singular value is below 1e-4 sigma_max; refine the lattice");
  if (!forced && c > 0 && out.gap_ratio < 1e4)
    throw RefineLatticeError("singular-value gap ratio below 1e4 at the null threshold; refine the lattice");
  if (c == 0) {
    out.physical = DMat(dim, 0);
    return out;
  }

  // Chirality split: smooth sections have |B v|^2 = O(a^2), doublers O(1/a^2).
  const DMat v0 = ritz.leftCols(c);
  const DMat bv = b * v0;
  const DMat g = bv.adjoint() * bv;
  Eigen::SelfAdjointEigenSolver<DMat> es(0.5 * (g + g.adjoint()));
  const double threshold = 1.0 / lat.spacing();
  int phys = 0;
  for (Eigen::Index k = 0; k < c && !forced; ++k) {
    const double ev = es.eigenvalues()(k);
    if (ev > 0.1 * threshold && ev < 10.0 * threshold)
      throw RefineLatticeError("null mode is neither smooth nor a doubler; refine the lattice");
    if (ev < threshold) ++phys;
  }
  if (forced) phys = std::min(forced->physical, c);
  out.doublers = c - phys;
  out.physical = v0 * es.eigenvectors().leftCols(phys);
  return out;
}

Transport line_transport(const TwistLineField& line) {
  Transport tr;
  tr.q = 1;
  tr.t.resize(line.links.size());
  for (std::size_t l = 0; l < line.links.size(); ++l) tr.t[l] = DMat::Constant(1, 1, line.links[l]);
  return tr;
}

std::mutex g_cache_mutex;
std::map<std::tuple<int, double, int>, SectionSpace> g_cache;

}  // namespace

SectionSpace holomorphic_sections(const LatticePtr& lattice, int degree) {
  const auto key = std::make_tuple(lattice->n(), lattice->volume(), degree);
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    if (auto it = g_cache.find(key); it != g_cache.end()) return it->second;
  }
  const LatticeTorus& lat = *lattice;
  const NullSpace ns = physical_null_space(lat, line_transport(make_line_flux(lattice, degree)), 2 * std::abs(degree) + 6);

  SectionSpace out;
  out.degree = degree;
  out.dimension = static_cast<int>(ns.physical.cols());
  out.doublers = ns.doublers;
  out.singular_values = ns.sv_rel;
  out.sigma_max = ns.sigma_max;
  out.gap_ratio = ns.gap_ratio;

  // Canonical basis: project point probes and orthonormalize, so the result
  // does not depend on the iteration's starting block.
  const int n = lat.n();
  const int h = out.dimension;
  const double count = static_cast<double>(lat.sites());
  std::vector<Eigen::VectorXcd> basis;
  for (int probe = 0; static_cast<int>(basis.size()) < h && probe < static_cast<int>(lat.sites()); ++probe) {
    Site st;
    if (probe < h) {
      st = {probe * n / h, probe * n / h};
    } else {
      st = lat.site(static_cast<std::size_t>(probe * 7919) % lat.sites());
    }
    const std::size_t s = lat.index(st);
    Eigen::VectorXcd f = ns.physical * ns.physical.row(static_cast<Eigen::Index>(s)).adjoint();
    const double n0 = f.norm();
    for (const auto& e : basis) f -= e.dot(f) * e;  // dot conjugates the left side
    if (f.norm() < 1e-6 * n0 || n0 == 0.0) continue;
    f /= f.norm();
    const Complex ph = f(static_cast<Eigen::Index>(s));
    if (std::abs(ph) > 0.0) f *= std::conj(ph) / std::abs(ph);
    basis.push_back(f);
  }
  if (static_cast<int>(basis.size()) != h) throw SectionSpaceError("could not build a canonical section basis");
  for (const auto& e : basis) {
    std::vector<Complex> v(e.data(), e.data() + e.size());
    // Mean-square normalization: (1/N^2) Sum |f|^2 = 1.
    for (auto& z : v) z *= std::sqrt(count);
    out.basis.push_back(std::move(v));
  }

  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_cache.emplace(key, out);
  return out;
}

namespace {

Transport end_transport(const HiggsPair& pair) {
  const LatticeTorus& lat = pair.lattice();
  const int n = pair.rank;
  Transport tr;
  tr.q = n * n;
  tr.t.resize(2 * lat.sites());
  for (std::size_t l = 0; l < tr.t.size(); ++l) {
    const Mat& u = pair.gauge.links[l];
    // vec(U X U^dagger) = (conj(U) kron U) vec(X) for column-major vec.
    DMat k(n * n, n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) k.block(a * n, b * n, n, n) = std::conj(u(a, b)) * u;
    tr.t[l] = pair.twist.links[l] * k;
  }
  return tr;
}

}  // namespace

HiggsField project_holomorphic(const HiggsPair& pair, const HiggsField& phi0, int* dimension,
                               const HiggsPair* reference) {
  const LatticeTorus& lat = pair.lattice();
  const int n = pair.rank;
  const int hint = 2 * (std::abs(pair.twist.degree) + 2) * n * n + 6;
  NullSpace ns;
  if (reference) {
    const NullSpace ref = physical_null_space(lat, end_transport(*reference), hint);
    const NullCounts counts{ref.raw_null, static_cast<int>(ref.physical.cols())};
    ns = physical_null_space(lat, end_transport(pair), hint, &counts);
  } else {
    ns = physical_null_space(lat, end_transport(pair), hint);
  }
  if (dimension) *dimension = static_cast<int>(ns.physical.cols());

  Eigen::VectorXcd v(static_cast<Eigen::Index>(lat.sites()) * n * n);
  for (std::size_t s = 0; s < lat.sites(); ++s)
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) v(static_cast<Eigen::Index>(s) * n * n + c * n + r) = phi0.values[s](r, c);
  const Eigen::VectorXcd p = ns.physical * (ns.physical.adjoint() * v);
  HiggsField out = phi0;
  for (std::size_t s = 0; s < lat.sites(); ++s)
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) out.values[s](r, c) = p(static_cast<Eigen::Index>(s) * n * n + c * n + r);
  return out;
}

}  // namespace ymh
