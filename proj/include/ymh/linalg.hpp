#pragma once

// Small dense kernels on site matrices (rank <= kMaxRank).

#include "ymh/types.hpp"

namespace ymh {

/// Spectral data of a unitary matrix P = Q diag(exp(i theta)) Q^dagger with
/// theta in (-pi, pi].
struct UnitaryEig {
  Mat q;
  RVec theta;
};

UnitaryEig eig_unitary(const Mat& p);

/// Largest |theta| over the eigenphases.
double max_abs_phase(const UnitaryEig& e);

/// Principal logarithm from eigen data.
Mat log_from_eig(const UnitaryEig& e);

/// Adjoint, under Re Tr(A^dagger B), of the Frechet derivative of the
/// principal log at the unitary matrix described by `e`, applied to g.
Mat log_frechet_adjoint(const UnitaryEig& e, const Mat& g);

/// exp(X) for anti-Hermitian X, exactly unitary up to rounding.
Mat expm_antihermitian(const Mat& x);
Mat expm_hermitian(const Mat& h);
Mat sqrt_hpd(const Mat& h);
Mat inv_sqrt_hpd(const Mat& h);

/// Polar-factor refinement by Newton-Schulz steps; U must be close to unitary.
Mat reunitarize(const Mat& u);

double unitarity_defect(const Mat& u);

inline Mat herm_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }
inline Mat antiherm_part(const Mat& m) { return 0.5 * (m - m.adjoint()); }
inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

/// Ascending eigenvalues of a Hermitian matrix (the Hermitian part is used).
RVec hermitian_eigenvalues(const Mat& h);

/// Largest entry modulus.
double max_abs(const Mat& m);

}  // namespace ymh
