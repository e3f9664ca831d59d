#include "ymh/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace ymh {

UnitaryEig eig_unitary(const Mat& p) {
  const auto n = p.rows();
  UnitaryEig out;
  if (n == 1) {
    out.q = Mat::Identity(1, 1);
    out.theta = RVec::Constant(1, std::arg(p(0, 0)));
    return out;
  }
  // A unitary matrix is normal, so its Schur form is diagonal up to rounding.
  Eigen::ComplexSchur<Mat> schur(p, true);
  out.q = schur.matrixU();
  out.theta.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) out.theta(k) = std::arg(schur.matrixT()(k, k));
  return out;
}

double max_abs_phase(const UnitaryEig& e) { return e.theta.cwiseAbs().maxCoeff(); }

Mat log_from_eig(const UnitaryEig& e) {
  const auto n = e.theta.size();
  Mat d = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) d(k, k) = Complex(0.0, e.theta(k));
  return e.q * d * e.q.adjoint();
}

Mat log_frechet_adjoint(const UnitaryEig& e, const Mat& g) {
  const auto n = e.theta.size();
  Mat gt = e.q.adjoint() * g * e.q;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      // Divided difference of log on the unit circle:
      // (log z_k - log z_l) / (z_k - z_l) = (D/2)/sin(D/2) * exp(-i s).
      const double d = e.theta(k) - e.theta(l);
      const double s = 0.5 * (e.theta(k) + e.theta(l));
      const double half = 0.5 * d;
      const double ratio = std::abs(half) < 1e-8 ? 1.0 + half * half / 6.0 : half / std::sin(half);
      const Complex gamma = ratio * std::exp(Complex(0.0, -s));
      gt(k, l) *= std::conj(gamma);
    }
  }
  return e.q * gt * e.q.adjoint();
}

Mat expm_antihermitian(const Mat& x) {
  const auto n = x.rows();
  if (n == 1) return Mat::Constant(1, 1, std::exp(Complex(0.0, x(0, 0).imag())));
  // x = -i h with h Hermitian.
  const Mat h = herm_part(Complex(0.0, 1.0) * x);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Mat& q = es.eigenvectors();
  Mat d = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) d(k, k) = std::exp(Complex(0.0, -es.eigenvalues()(k)));
  return q * d * q.adjoint();
}

namespace {

template <class F>
Mat hermitian_function(const Mat& h, F f) {
  const auto n = h.rows();
  if (n == 1) return Mat::Constant(1, 1, Complex(f(h(0, 0).real()), 0.0));
  Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(h));
  const Mat& q = es.eigenvectors();
  Mat d = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) d(k, k) = f(es.eigenvalues()(k));
  return q * d * q.adjoint();
}

}  // namespace

Mat expm_hermitian(const Mat& h) {
  return hermitian_function(h, [](double v) { return std::exp(v); });
}

Mat sqrt_hpd(const Mat& h) {
  return hermitian_function(h, [](double v) { return std::sqrt(v); });
}

Mat inv_sqrt_hpd(const Mat& h) {
  return hermitian_function(h, [](double v) { return 1.0 / std::sqrt(v); });
}

Mat reunitarize(const Mat& u) {
  const auto n = u.rows();
  const Mat id = Mat::Identity(n, n);
  Mat v = u;
  for (int it = 0; it < 4; ++it) {
    const Mat g = v.adjoint() * v;
    if (max_abs(g - id) < 1e-15) break;
    v = v * (1.5 * id - 0.5 * g);
  }
  return v;
}

double unitarity_defect(const Mat& u) {
  return max_abs(u.adjoint() * u - Mat::Identity(u.rows(), u.cols()));
}

RVec hermitian_eigenvalues(const Mat& h) {
  if (h.rows() == 1) return RVec::Constant(1, h(0, 0).real());
  Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace ymh
