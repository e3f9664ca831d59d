#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ymh/fields.hpp"
#include "ymh/functionals.hpp"

namespace ymh {

/// A tangent vector at a pair: one anti-Hermitian matrix per link (the link
/// update is U -> exp(dt X) U) and one matrix per site for Phi.
struct Tangent {
  MatField links;
  MatField higgs;
};

/// Descent direction of the lattice YMH functional. Its metric is
///   |t|^2 = Sum_links |X|^2 + 4 a^2 Sum_sites |dPhi|^2,
/// under which dYMH/dt = -2 |t|^2 exactly to first order. The Higgs part
/// is dPhi = [Phi, K] with K = sqrt(-1) Lambda Theta.
Tangent gradient(const HiggsPair& pair);
Tangent gradient(const HiggsPair& pair, const HermitianSiteField& theta);

double tangent_norm_sq(const LatticeTorus& lattice, const Tangent& t);

/// L2 norm of the assembled d_A^* Theta (links and Higgs); the flow's
/// energy identity reads dYMH/dt = -2 critical_residual^2.
double critical_residual(const HiggsPair& pair);

HiggsPair apply_tangent(const HiggsPair& pair, const Tangent& t, double dt);
HiggsPair step(const HiggsPair& pair, double dt);

/// ||d'' phi||_{L2}, with |dzbar|^2 = 2.
double holomorphicity_residual(const HiggsPair& pair);

struct WatchItem {
  double alpha = 2.0;
  double shift = 0.0;
};

std::vector<WatchItem> default_watch_list();

struct SpectralTolerances {
  double cluster_gap = 0.1;
  double round_tol = 0.05;
  double spread_tol = 0.05;
};

struct FlowOptions {
  std::optional<double> dt_initial;  // default 0.2 a^2
  std::optional<double> dt_min;      // default 1e-6 dt_initial
  long max_steps = 200000;
  bool energy_backtrack = true;
  double stop_residual = 1e-4;
  double stop_plateau = 1e-8;
  long checkpoint_stride = 10;
  std::vector<WatchItem> watch = default_watch_list();
  std::uint64_t seed = 0;
  SpectralTolerances spectral;
  double det_lo = 1e-6;  // metric heat flow determinant guard
  double det_hi = 1e6;
};

/// Fills defaults that depend on the lattice and checks the invariants
/// dt_initial > dt_min > 0 and stop_residual > 0 (ConfigError otherwise).
FlowOptions resolve_options(const FlowOptions& opts, const LatticeTorus& lattice);

struct TrajectorySample {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double ymh = 0.0;
  std::vector<double> weighted;
  double holo_residual = 0.0;
  double crit_residual = 0.0;
  double degree_check = 0.0;
  /// ((E_next - E)/dt) / (-2 crit_residual^2) for the step taken from this
  /// sample; NaN when no step follows.
  double energy_rate_ratio = 0.0;
};

struct SpectralCluster {
  double mean = 0.0;
  double deviation = 0.0;  // RMS spread over sites and merged bands
  int multiplicity = 0;
  int first_band = 0;  // bands are sorted by descending eigenvalue
  Rational slope;
  double rounding_distance = 0.0;
};

struct SpectralAnalysis {
  bool resolved = false;
  std::string reason;
  std::vector<SpectralCluster> clusters;
  std::optional<HNType> type;
  std::vector<double> band_means;
};

SpectralAnalysis analyze_spectrum(const HermitianSiteField& theta, const SpectralTolerances& tol = {});

/// Throws UnresolvedTypeError when the spectrum does not round cleanly.
std::pair<HNType, SpectralAnalysis> spectral_hn_type(const HiggsPair& pair, const SpectralTolerances& tol = {},
                                                     const HermitianMetricField* metric = nullptr);

struct SplittingResidual {
  double dbar = 0.0;     // ||d'' pi_i||
  double bracket = 0.0;  // ||[phi, pi_i]||
};

/// Per-cluster eigenprojectors of sqrt(-1) Lambda Theta, band multiplicities
/// taken from `type`. Throws GapCollapseError when two clusters come closer
/// than cluster_gap / 2 at some site.
std::vector<SplittingResidual> splitting_residuals(const HiggsPair& pair, const HNType& type,
                                                   const SpectralTolerances& tol = {});

enum class Termination { converged, plateau, max_steps, error };
std::string to_string(Termination t);

struct FlowReport {
  std::string kind;  // "pair-gradient" or "metric-heat"
  std::vector<WatchItem> watch;
  std::vector<TrajectorySample> samples;
  Termination reason = Termination::error;
  std::string error_message;
  long steps_accepted = 0;
  long steps_rejected = 0;
  /// Accepted steps with YMH(t+dt) > YMH(t) + 1e-12 (1 + YMH(t)).
  long monotonicity_violations = 0;
  std::vector<long> weighted_violations;
  /// Largest YMH increase over an accepted step, relative to 1 + YMH.
  double max_relative_increase = 0.0;
  double final_time = 0.0;
  double final_ymh = 0.0;
  double final_residual = 0.0;

  std::optional<HNType> terminal_type;
  SpectralAnalysis terminal_spectrum;
  std::vector<SplittingResidual> splitting;
  std::string terminal_note;  // why splitting residuals are missing, if they are

  HiggsPair final_pair;
  std::optional<HermitianMetricField> final_metric;

  double wall_seconds = 0.0;
};

FlowReport integrate(const HiggsPair& pair, const FlowOptions& opts);

/// One step of H^{-1} dH/dt = -(K_H - mu Id), taken symmetrically as
/// H <- H^{1/2} exp(-dt S) H^{1/2}. Throws MetricError when the result
/// leaves the positive cone or the determinant bounds.
HermitianMetricField metric_heat_step(const HermitianMetricField& h, const HiggsPair& base, double dt,
                                      double det_lo = 1e-6, double det_hi = 1e6);

FlowReport integrate_metric_heat(const HiggsPair& base, const FlowOptions& opts);

}  // namespace ymh
