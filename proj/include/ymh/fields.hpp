#pragma once

// Lattice fields for a rank-n unitary bundle E twisted by a line bundle L.
//
// Conventions (validated by tests rather than assumed):
//  * link U_{x,mu} transports the fibre at x+mu back to x, so the forward
//    covariant difference is (D_mu f)(x) = (U f(x+mu) U^dagger - f(x)) / a on
//    End(E), with an extra factor l_{x,mu} for L-charged fields;
//  * plaquette P_x = U_{x,1} U_{x+1,2} U_{x+2,1}^dagger U_{x,2}^dagger and
//    F12 = log(P_x) / a^2;
//  * omega = dx^dy, so i*Lambda(F) = i*F12 and i*Lambda(dz ^ dzbar) = 2.
// With these choices a bundle of degree d has Sum_x Tr(i F12) a^2 = 2 pi d,
// which corresponds to a total plaquette phase of -2 pi d.

#include <cstddef>
#include <vector>

#include "ymh/lattice.hpp"
#include "ymh/linalg.hpp"
#include "ymh/types.hpp"

namespace ymh {

struct UnitaryGaugeField {
  LatticePtr lattice;
  int rank = 0;
  MatField links;  // index 2*s + mu, mu in {0, 1}

  const Mat& link(std::size_t s, int mu) const { return links[2 * s + mu]; }
  Mat& link(std::size_t s, int mu) { return links[2 * s + mu]; }
};

struct TwistLineField {
  LatticePtr lattice;
  int degree = 0;
  std::vector<Complex> links;  // index 2*s + mu, unit modulus

  Complex link(std::size_t s, int mu) const { return links[2 * s + mu]; }
};

/// Phi in the global frame dz (x) s of K (x) L, one n x n matrix per site.
struct HiggsField {
  LatticePtr lattice;
  int rank = 0;
  MatField values;
};

struct HiggsPair {
  UnitaryGaugeField gauge;
  TwistLineField twist;
  HiggsField higgs;
  int rank = 0;
  int degree = 0;

  const LatticeTorus& lattice() const { return *gauge.lattice; }
};

struct HermitianSiteField {
  LatticePtr lattice;
  int rank = 0;
  MatField values;
};

struct ProjectionField {
  LatticePtr lattice;
  int rank = 0;
  int subrank = 0;
  MatField values;
};

struct HermitianMetricField {
  LatticePtr lattice;
  int rank = 0;
  MatField values;
};

// ---- construction -------------------------------------------------------

UnitaryGaugeField trivial_gauge(LatticePtr lattice, int rank);

/// Validates unitarity (after one re-unitarization pass) to 1e-10.
UnitaryGaugeField make_gauge(LatticePtr lattice, int rank, MatField links);

/// Uniform-flux U(1) field in a Landau gauge. Link phases are linear in the
/// degree, so products of line fields add degrees exactly.
TwistLineField make_line_flux(LatticePtr lattice, int degree);

/// Block-diagonal gauge field whose k-th diagonal entry is the line field of
/// degree degrees[k].
UnitaryGaugeField diagonal_gauge(LatticePtr lattice, const std::vector<int>& degrees);

HiggsField zero_higgs(LatticePtr lattice, int rank);

/// Checks rank/lattice agreement and stores degree = total_degree(gauge).
HiggsPair make_pair(UnitaryGaugeField gauge, TwistLineField twist, HiggsField higgs);

HermitianMetricField identity_metric(LatticePtr lattice, int rank);

ProjectionField constant_projection(LatticePtr lattice, const Mat& p);

// ---- curvature and degree -----------------------------------------------

Mat plaquette(const UnitaryGaugeField& gauge, std::size_t s);

/// Eigen data of every plaquette, guarded against the log branch cut.
/// Throws BranchError if an eigenphase is within `guard` of +-pi.
std::vector<UnitaryEig> plaquette_spectra(const UnitaryGaugeField& gauge, double guard = 1e-6);

/// Anti-Hermitian F12 per site.
MatField curvature_scalar(const UnitaryGaugeField& gauge);

struct DegreeCheck {
  int degree = 0;
  double raw = 0.0;  // (1/2pi) Sum Tr(i F12) a^2 before rounding
};

DegreeCheck degree_check(const UnitaryGaugeField& gauge);
/// Throws IntegralityError if the raw value is off an integer by > 1e-6.
int total_degree(const UnitaryGaugeField& gauge);

/// Raw degree from precomputed plaquette spectra.
double degree_from_spectra(const std::vector<UnitaryEig>& spectra);

/// Sum over plaquettes of -arg(plaquette phase); equals 2 pi deg.
double twist_flux(const TwistLineField& twist);

// ---- covariant differences ----------------------------------------------

/// Forward covariant difference along geometric axis 1 or 2 of an End(E)
/// field; `twist` non-null makes the field L-charged.
MatField covariant_forward(const UnitaryGaugeField& gauge, const TwistLineField* twist, const MatField& f, int axis);
/// Backward difference; minus the L2 adjoint of covariant_forward.
MatField covariant_backward(const UnitaryGaugeField& gauge, const TwistLineField* twist, const MatField& f, int axis);

/// Discrete d''phi = (D_1 Phi + i D_2 Phi) / 2 with forward differences.
MatField dbar_covariant(const HiggsPair& pair);
/// Same operator on an uncharged End(E) field (used for projections).
MatField dbar_endomorphism(const UnitaryGaugeField& gauge, const MatField& f);

// ---- curvature operator -------------------------------------------------

/// sqrt(-1) Lambda Theta per site. Without a metric this is
/// i F12 + 2 [Phi, Phi^dagger]; with a metric H the Chern curvature and
/// phi^{*H} = H^{-1} Phi^dagger H are used and the result is the Hermitian
/// part of H^{1/2} K H^{-1/2}, whose spectrum is that of K.
HermitianSiteField theta_scalar(const HiggsPair& pair, const HermitianMetricField* metric = nullptr);

/// Metric-free theta_scalar from precomputed plaquette spectra.
HermitianSiteField theta_from_spectra(const HiggsPair& pair, const std::vector<UnitaryEig>& spectra);

/// Applies U -> g_x U g_{x+mu}^dagger and Phi -> g Phi g^dagger.
HiggsPair unitary_gauge_transform(const HiggsPair& pair, const MatField& g);

// ---- norms and checks ---------------------------------------------------

/// a^2-weighted squared Frobenius norm.
double l2_norm_sq(const LatticeTorus& lattice, const MatField& f);
double l2_norm(const LatticeTorus& lattice, const MatField& f);
/// Re <f, g> with the a^2 weight.
double l2_inner(const LatticeTorus& lattice, const MatField& f, const MatField& g);

void validate_projection(const ProjectionField& p, double tol = 1e-8);
/// Positive-definiteness and det(H) within [det_lo, det_hi].
void validate_metric(const HermitianMetricField& h, double det_lo = 1e-6, double det_hi = 1e6);

/// Test-only fault injection: flips the sign of the curvature term inside
/// theta_scalar so that suites can prove they detect a broken assembly.
namespace mutation {
void set_flip_curvature_sign(bool on) noexcept;
bool flip_curvature_sign() noexcept;
}  // namespace mutation

}  // namespace ymh
