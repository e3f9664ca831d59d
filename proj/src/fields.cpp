#include "ymh/fields.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "ymh/errors.hpp"
#include "ymh/parallel.hpp"

namespace ymh {

namespace mutation {
namespace {
std::atomic<bool> g_flip{false};
}
void set_flip_curvature_sign(bool on) noexcept { g_flip.store(on); }
bool flip_curvature_sign() noexcept { return g_flip.load(); }
}  // namespace mutation

namespace {

void require_axis(int axis) {
  if (axis != 1 && axis != 2) throw AxisError("axis must be 1 or 2, got " + std::to_string(axis));
}

void require_same(const LatticePtr& a, const LatticePtr& b, const char* what) {
  if (!a || !b || a.get() != b.get()) {
    if (!a || !b || a->n() != b->n() || a->volume() != b->volume())
      throw DomainError(std::string("lattice mismatch: ") + what);
  }
}

}  // namespace

UnitaryGaugeField trivial_gauge(LatticePtr lattice, int rank) {
  if (rank < 1 || rank > kMaxRank) throw DomainError("rank must be in [1, " + std::to_string(kMaxRank) + "]");
  UnitaryGaugeField g;
  g.rank = rank;
  g.links.assign(2 * lattice->sites(), Mat::Identity(rank, rank));
  g.lattice = std::move(lattice);
  return g;
}

UnitaryGaugeField make_gauge(LatticePtr lattice, int rank, MatField links) {
  if (rank < 1 || rank > kMaxRank) throw DomainError("rank must be in [1, " + std::to_string(kMaxRank) + "]");
  if (links.size() != 2 * lattice->sites()) throw DomainError("gauge field needs 2 links per site");
  for (auto& u : links) {
    if (u.rows() != rank || u.cols() != rank) throw DomainError("link has wrong shape");
    u = reunitarize(u);
    if (!(unitarity_defect(u) < 1e-10)) throw NonUnitaryError("link is not unitary to 1e-10");
  }
  UnitaryGaugeField g;
  g.lattice = std::move(lattice);
  g.rank = rank;
  g.links = std::move(links);
  return g;
}

TwistLineField make_line_flux(LatticePtr lattice, int degree) {
  const int n = lattice->n();
  const double theta_p = -kTwoPi * degree / (static_cast<double>(n) * n);
  TwistLineField t;
  t.degree = degree;
  t.links.assign(2 * lattice->sites(), Complex(1.0, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t s = lattice->index({i, j});
      t.links[2 * s + 1] = std::polar(1.0, theta_p * i);
      if (i == n - 1) t.links[2 * s] = std::polar(1.0, -theta_p * n * j);
    }
  }
  t.lattice = std::move(lattice);
  return t;
}

UnitaryGaugeField diagonal_gauge(LatticePtr lattice, const std::vector<int>& degrees) {
  const int rank = static_cast<int>(degrees.size());
  UnitaryGaugeField g = trivial_gauge(lattice, rank);
  for (int k = 0; k < rank; ++k) {
    const TwistLineField line = make_line_flux(lattice, degrees[k]);
    for (std::size_t l = 0; l < g.links.size(); ++l) g.links[l](k, k) = line.links[l];
  }
  return g;
}

HiggsField zero_higgs(LatticePtr lattice, int rank) {
  HiggsField h;
  h.rank = rank;
  h.values.assign(lattice->sites(), Mat::Zero(rank, rank));
  h.lattice = std::move(lattice);
  return h;
}

HiggsPair make_pair(UnitaryGaugeField gauge, TwistLineField twist, HiggsField higgs) {
  require_same(gauge.lattice, twist.lattice, "gauge/twist");
  require_same(gauge.lattice, higgs.lattice, "gauge/higgs");
  if (gauge.rank != higgs.rank) throw DomainError("gauge and Higgs ranks differ");
  if (higgs.values.size() != gauge.lattice->sites()) throw DomainError("Higgs field has wrong site count");
  for (const auto& m : higgs.values) {
    if (m.rows() != gauge.rank || m.cols() != gauge.rank) throw DomainError("Higgs value has wrong shape");
    if (!m.allFinite()) throw DomainError("Higgs field has non-finite entries");
  }
  HiggsPair p;
  p.rank = gauge.rank;
  p.degree = total_degree(gauge);
  p.gauge = std::move(gauge);
  p.twist = std::move(twist);
  p.higgs = std::move(higgs);
  return p;
}

HermitianMetricField identity_metric(LatticePtr lattice, int rank) {
  HermitianMetricField h;
  h.rank = rank;
  h.values.assign(lattice->sites(), Mat::Identity(rank, rank));
  h.lattice = std::move(lattice);
  return h;
}

ProjectionField constant_projection(LatticePtr lattice, const Mat& p) {
  ProjectionField out;
  out.rank = static_cast<int>(p.rows());
  out.subrank = static_cast<int>(std::lround(p.trace().real()));
  out.values.assign(lattice->sites(), p);
  out.lattice = std::move(lattice);
  return out;
}

Mat plaquette(const UnitaryGaugeField& g, std::size_t s) {
  const LatticeTorus& lat = *g.lattice;
  return g.link(s, 0) * g.link(lat.fwd(s, 0), 1) * g.link(lat.fwd(s, 1), 0).adjoint() * g.link(s, 1).adjoint();
}

std::vector<UnitaryEig> plaquette_spectra(const UnitaryGaugeField& g, double guard) {
  const std::size_t ns = g.lattice->sites();
  std::vector<UnitaryEig> out(ns);
  std::atomic<bool> bad{false};
  for_each_index(ns, [&](std::size_t s) {
    out[s] = eig_unitary(plaquette(g, s));
    if (!(max_abs_phase(out[s]) < kPi - guard)) bad.store(true, std::memory_order_relaxed);
  });
  if (bad.load())
    throw BranchError("plaquette eigenvalue near -1: lattice too coarse for the curvature present");
  return out;
}

MatField curvature_scalar(const UnitaryGaugeField& g) {
  const auto spectra = plaquette_spectra(g);
  const double inv_a2 = 1.0 / g.lattice->site_weight();
  MatField f(spectra.size());
  for_each_index(spectra.size(), [&](std::size_t s) { f[s] = inv_a2 * log_from_eig(spectra[s]); });
  return f;
}

double degree_from_spectra(const std::vector<UnitaryEig>& spectra) {
  double total = 0.0;
  for (const auto& e : spectra) total -= e.theta.sum();
  return total / kTwoPi;
}

DegreeCheck degree_check(const UnitaryGaugeField& g) {
  DegreeCheck d;
  d.raw = degree_from_spectra(plaquette_spectra(g));
  d.degree = static_cast<int>(std::lround(d.raw));
  return d;
}

int total_degree(const UnitaryGaugeField& g) {
  const DegreeCheck d = degree_check(g);
  if (std::abs(d.raw - d.degree) > 1e-6)
    throw IntegralityError("total degree " + std::to_string(d.raw) + " is not within 1e-6 of an integer");
  return d.degree;
}

double twist_flux(const TwistLineField& t) {
  const LatticeTorus& lat = *t.lattice;
  double total = 0.0;
  for (std::size_t s = 0; s < lat.sites(); ++s) {
    const Complex p = t.link(s, 0) * t.link(lat.fwd(s, 0), 1) * std::conj(t.link(lat.fwd(s, 1), 0)) *
                      std::conj(t.link(s, 1));
    total -= std::arg(p);
  }
  return total;
}

MatField covariant_forward(const UnitaryGaugeField& g, const TwistLineField* twist, const MatField& f, int axis) {
  require_axis(axis);
  const int mu = axis - 1;
  const LatticeTorus& lat = *g.lattice;
  const double inv_a = 1.0 / lat.spacing();
  MatField out(f.size());
  for_each_index(f.size(), [&](std::size_t s) {
    const Mat& u = g.link(s, mu);
    Mat moved = u * f[lat.fwd(s, mu)] * u.adjoint();
    if (twist) moved *= twist->link(s, mu);
    out[s] = inv_a * (moved - f[s]);
  });
  return out;
}

MatField covariant_backward(const UnitaryGaugeField& g, const TwistLineField* twist, const MatField& f, int axis) {
  require_axis(axis);
  const int mu = axis - 1;
  const LatticeTorus& lat = *g.lattice;
  const double inv_a = 1.0 / lat.spacing();
  MatField out(f.size());
  for_each_index(f.size(), [&](std::size_t s) {
    const std::size_t b = lat.bwd(s, mu);
    const Mat& u = g.link(b, mu);
    Mat moved = u.adjoint() * f[b] * u;
    if (twist) moved *= std::conj(twist->link(b, mu));
    out[s] = inv_a * (f[s] - moved);
  });
  return out;
}

namespace {

MatField dbar_impl(const UnitaryGaugeField& g, const TwistLineField* twist, const MatField& f) {
  const MatField d1 = covariant_forward(g, twist, f, 1);
  const MatField d2 = covariant_forward(g, twist, f, 2);
  MatField out(f.size());
  for_each_index(f.size(), [&](std::size_t s) { out[s] = 0.5 * (d1[s] + Complex(0.0, 1.0) * d2[s]); });
  return out;
}

}  // namespace

MatField dbar_covariant(const HiggsPair& pair) { return dbar_impl(pair.gauge, &pair.twist, pair.higgs.values); }

MatField dbar_endomorphism(const UnitaryGaugeField& g, const MatField& f) { return dbar_impl(g, nullptr, f); }

HermitianSiteField theta_from_spectra(const HiggsPair& pair, const std::vector<UnitaryEig>& spectra) {
  const LatticeTorus& lat = pair.lattice();
  const double sign = mutation::flip_curvature_sign() ? -1.0 : 1.0;
  const Complex i1(0.0, 1.0);
  const double inv_a2 = 1.0 / lat.site_weight();
  const MatField& phi = pair.higgs.values;
  HermitianSiteField out;
  out.lattice = pair.gauge.lattice;
  out.rank = pair.rank;
  out.values.resize(lat.sites());
  for_each_index(lat.sites(), [&](std::size_t s) {
    const Mat k = sign * i1 * inv_a2 * log_from_eig(spectra[s]) + 2.0 * commutator(phi[s], phi[s].adjoint());
    out.values[s] = herm_part(k);
  });
  return out;
}

HermitianSiteField theta_scalar(const HiggsPair& pair, const HermitianMetricField* metric) {
  const auto spectra = plaquette_spectra(pair.gauge);
  if (!metric) return theta_from_spectra(pair, spectra);

  const LatticeTorus& lat = pair.lattice();
  const std::size_t ns = lat.sites();
  const double sign = mutation::flip_curvature_sign() ? -1.0 : 1.0;
  const Complex i1(0.0, 1.0);
  const double inv_a2 = 1.0 / lat.site_weight();
  const MatField& phi = pair.higgs.values;
  if (metric->rank != pair.rank || metric->values.size() != ns) throw MetricError("metric does not match the pair");

  HermitianSiteField out;
  out.lattice = pair.gauge.lattice;
  out.rank = pair.rank;
  out.values.resize(ns);

  validate_metric(*metric, 0.0, std::numeric_limits<double>::infinity());
  const MatField& h = metric->values;
  MatField hinv(ns);
  for_each_index(ns, [&](std::size_t s) { hinv[s] = h[s].inverse(); });
  // J = H^{-1} d_z H with d_z = (D1 - i D2)/2 (forward), then dbar_z J backward.
  const MatField d1 = covariant_forward(pair.gauge, nullptr, h, 1);
  const MatField d2 = covariant_forward(pair.gauge, nullptr, h, 2);
  MatField j(ns);
  for_each_index(ns, [&](std::size_t s) { j[s] = hinv[s] * (0.5 * (d1[s] - i1 * d2[s])); });
  const MatField b1 = covariant_backward(pair.gauge, nullptr, j, 1);
  const MatField b2 = covariant_backward(pair.gauge, nullptr, j, 2);
  for_each_index(ns, [&](std::size_t s) {
    const Mat dbar_j = 0.5 * (b1[s] + i1 * b2[s]);
    const Mat phi_star = hinv[s] * phi[s].adjoint() * h[s];
    const Mat k = sign * i1 * inv_a2 * log_from_eig(spectra[s]) - 2.0 * dbar_j + 2.0 * commutator(phi[s], phi_star);
    const Mat r = sqrt_hpd(h[s]);
    const Mat rinv = inv_sqrt_hpd(h[s]);
    out.values[s] = herm_part(r * k * rinv);
  });
  return out;
}

HiggsPair unitary_gauge_transform(const HiggsPair& pair, const MatField& g) {
  const LatticeTorus& lat = pair.lattice();
  if (g.size() != lat.sites()) throw DomainError("gauge transform has wrong site count");
  for (const auto& m : g) {
    if (m.rows() != pair.rank || m.cols() != pair.rank) throw DomainError("gauge transform has wrong shape");
    if (!(unitarity_defect(m) < 1e-10)) throw NonUnitaryError("gauge transform is not unitary to 1e-10");
  }
  HiggsPair out = pair;
  for_each_index(lat.sites(), [&](std::size_t s) {
    for (int mu = 0; mu < 2; ++mu)
      out.gauge.link(s, mu) = reunitarize(g[s] * pair.gauge.link(s, mu) * g[lat.fwd(s, mu)].adjoint());
    out.higgs.values[s] = g[s] * pair.higgs.values[s] * g[s].adjoint();
  });
  return out;
}

double l2_norm_sq(const LatticeTorus& lat, const MatField& f) {
  return lat.site_weight() * sum_over(f.size(), [&](std::size_t s) { return f[s].squaredNorm(); });
}

double l2_norm(const LatticeTorus& lat, const MatField& f) { return std::sqrt(l2_norm_sq(lat, f)); }

double l2_inner(const LatticeTorus& lat, const MatField& f, const MatField& g) {
  return lat.site_weight() *
         sum_over(f.size(), [&](std::size_t s) { return (f[s].adjoint() * g[s]).trace().real(); });
}

void validate_projection(const ProjectionField& p, double tol) {
  for (const auto& m : p.values) {
    if (m.rows() != p.rank || m.cols() != p.rank) throw ProjectionError("projection has wrong shape");
    if (max_abs(m - m.adjoint()) >= 1e-12) throw ProjectionError("projection is not Hermitian to 1e-12");
    if (max_abs(m * m - m) >= tol) throw ProjectionError("projection is not idempotent");
    if (std::abs(m.trace().real() - p.subrank) > 1e-8) throw ProjectionError("projection trace differs from its rank");
  }
}

void validate_metric(const HermitianMetricField& h, double det_lo, double det_hi) {
  for (const auto& m : h.values) {
    if (m.rows() != h.rank || m.cols() != h.rank) throw MetricError("metric has wrong shape");
    if (max_abs(m - m.adjoint()) > 1e-10 * (1.0 + max_abs(m))) throw MetricError("metric is not Hermitian");
    const RVec ev = hermitian_eigenvalues(m);
    if (!(ev.minCoeff() > 0.0)) throw MetricError("metric is not positive-definite");
    const double det = ev.prod();
    if (!(det >= det_lo && det <= det_hi)) throw MetricError("metric determinant outside configured bounds");
  }
}

}  // namespace ymh
