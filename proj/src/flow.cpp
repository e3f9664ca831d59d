#include "ymh/flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ymh/errors.hpp"
#include "ymh/parallel.hpp"

namespace ymh {

namespace {

const Complex kI(0.0, 1.0);

/// Everything derived from one plaquette sweep.
struct Evaluation {
  std::vector<UnitaryEig> spectra;
  HermitianSiteField theta;
  double energy = 0.0;
  double degree_raw = 0.0;
};

Evaluation evaluate(const HiggsPair& pair) {
  Evaluation e;
  e.spectra = plaquette_spectra(pair.gauge);
  e.theta = theta_from_spectra(pair, e.spectra);
  e.energy = ymh_from_theta(e.theta);
  e.degree_raw = degree_from_spectra(e.spectra);
  return e;
}

Tangent gradient_impl(const HiggsPair& pair, const std::vector<UnitaryEig>& spectra, const HermitianSiteField& theta) {
  const LatticeTorus& lat = pair.lattice();
  const std::size_t ns = lat.sites();
  const UnitaryGaugeField& g = pair.gauge;
  // Per plaquette: W = L*(P, -2iK), M = W P^dagger, N = P^dagger W.
  MatField m(ns), nmat(ns);
  for_each_index(ns, [&](std::size_t s) {
    const Mat p = plaquette(g, s);
    const Mat w = log_frechet_adjoint(spectra[s], -2.0 * kI * theta.values[s]);
    m[s] = w * p.adjoint();
    nmat[s] = p.adjoint() * w;
  });
  Tangent t;
  t.links.resize(2 * ns);
  t.higgs.resize(ns);
  for_each_index(ns, [&](std::size_t s) {
    const std::size_t b2 = lat.bwd(s, 1);
    const Mat& u2 = g.link(b2, 1);
    const Mat a0 = m[s] - u2.adjoint() * nmat[b2] * u2;
    const std::size_t b1 = lat.bwd(s, 0);
    const Mat& u1 = g.link(b1, 0);
    const Mat a1 = -nmat[s] + u1.adjoint() * m[b1] * u1;
    // X = -(1/2) antiherm(A) is steepest descent for |X|^2.
    t.links[2 * s] = -0.5 * antiherm_part(a0);
    t.links[2 * s + 1] = -0.5 * antiherm_part(a1);
    const Mat& phi = pair.higgs.values[s];
    t.higgs[s] = commutator(phi, theta.values[s]);
  });
  return t;
}

bool within_tol(double e_new, double e_old) { return e_new <= e_old + 1e-12 * (1.0 + std::abs(e_old)); }

}  // namespace

Tangent gradient(const HiggsPair& pair, const HermitianSiteField& theta) {
  return gradient_impl(pair, plaquette_spectra(pair.gauge), theta);
}

Tangent gradient(const HiggsPair& pair) {
  const auto spectra = plaquette_spectra(pair.gauge);
  return gradient_impl(pair, spectra, theta_from_spectra(pair, spectra));
}

double tangent_norm_sq(const LatticeTorus& lat, const Tangent& t) {
  const double links = sum_over(t.links.size(), [&](std::size_t l) { return t.links[l].squaredNorm(); });
  return links + 4.0 * l2_norm_sq(lat, t.higgs);
}

double critical_residual(const HiggsPair& pair) { return std::sqrt(tangent_norm_sq(pair.lattice(), gradient(pair))); }

HiggsPair apply_tangent(const HiggsPair& pair, const Tangent& t, double dt) {
  HiggsPair out = pair;
  for_each_index(pair.lattice().sites(), [&](std::size_t s) {
    for (int mu = 0; mu < 2; ++mu) {
      Mat& u = out.gauge.link(s, mu);
      u = reunitarize(expm_antihermitian(dt * t.links[2 * s + mu]) * u);
    }
    out.higgs.values[s] += dt * t.higgs[s];
  });
  return out;
}

HiggsPair step(const HiggsPair& pair, double dt) {
  if (!(dt > 0.0)) throw DomainError("step needs dt > 0");
  return apply_tangent(pair, gradient(pair), dt);
}

double holomorphicity_residual(const HiggsPair& pair) {
  return std::sqrt(2.0 * l2_norm_sq(pair.lattice(), dbar_covariant(pair)));
}

std::vector<WatchItem> default_watch_list() {
  return {{1.0, 0.0}, {1.5, 0.0}, {3.0, 0.0}, {1.0, 2.0}, {1.5, 2.0}, {3.0, 2.0}};
}

FlowOptions resolve_options(const FlowOptions& opts, const LatticeTorus& lattice) {
  FlowOptions o = opts;
  if (!o.dt_initial) o.dt_initial = 0.2 * lattice.site_weight();
  if (!o.dt_min) o.dt_min = 1e-6 * *o.dt_initial;
  if (!(*o.dt_min > 0.0) || !(*o.dt_initial > *o.dt_min)) throw ConfigError("need dt_initial > dt_min > 0");
  if (!(o.stop_residual > 0.0)) throw ConfigError("stop_residual must be positive");
  if (!(o.stop_plateau >= 0.0)) throw ConfigError("stop_plateau must be non-negative");
  if (o.max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (o.checkpoint_stride < 1) throw ConfigError("checkpoint_stride must be >= 1");
  for (const auto& w : o.watch)
    if (!(w.alpha >= 1.0)) throw ConfigError("watch list alpha must be >= 1");
  if (!(o.det_lo > 0.0) || !(o.det_hi > o.det_lo)) throw ConfigError("need 0 < det_lo < det_hi");
  if (!(o.spectral.cluster_gap > 0.0) || !(o.spectral.round_tol > 0.0) || !(o.spectral.spread_tol > 0.0))
    throw ConfigError("spectral tolerances must be positive");
  return o;
}

// ---- spectral analysis ----------------------------------------------------

namespace {

/// Per-site eigen decomposition, columns sorted by descending eigenvalue.
struct SiteEig {
  RVec values;
  Mat vectors;
};

SiteEig site_eig_desc(const Mat& k) {
  const auto n = k.rows();
  SiteEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (n == 1) {
    out.values(0) = k(0, 0).real();
    out.vectors = Mat::Identity(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(k));
  for (Eigen::Index c = 0; c < n; ++c) {
    out.values(c) = es.eigenvalues()(n - 1 - c);
    out.vectors.col(c) = es.eigenvectors().col(n - 1 - c);
  }
  return out;
}

std::pair<Rational, double> nearest_rational(double x, int max_den) {
  Rational best(static_cast<long long>(std::llround(x)), 1);
  double best_d = std::abs(x - to_double(best));
  for (int q = 2; q <= max_den; ++q) {
    const Rational r(static_cast<long long>(std::llround(x * q)), q);
    const double d = std::abs(x - to_double(r));
    if (d < best_d - 1e-12) {
      best = r;
      best_d = d;
    }
  }
  return {best, best_d};
}

}  // namespace

SpectralAnalysis analyze_spectrum(const HermitianSiteField& theta, const SpectralTolerances& tol) {
  const std::size_t ns = theta.values.size();
  const int n = theta.rank;
  std::vector<RVec> ev(ns);
  for_each_index(ns, [&](std::size_t s) { ev[s] = site_eig_desc(theta.values[s]).values; });

  SpectralAnalysis out;
  out.band_means.assign(n, 0.0);
  for (std::size_t s = 0; s < ns; ++s)
    for (int b = 0; b < n; ++b) out.band_means[b] += ev[s](b);
  for (auto& m : out.band_means) m /= static_cast<double>(ns);

  // Merge adjacent bands whose means are closer than the cluster gap.
  std::vector<std::pair<int, int>> groups;  // [first, count)
  for (int b = 0; b < n; ++b) {
    if (!groups.empty() && out.band_means[b - 1] - out.band_means[b] < tol.cluster_gap)
      ++groups.back().second;
    else
      groups.emplace_back(b, 1);
  }

  std::vector<HNEntry> entries;
  out.resolved = true;
  for (const auto& [first, count] : groups) {
    SpectralCluster c;
    c.first_band = first;
    c.multiplicity = count;
    double sum = 0.0;
    for (std::size_t s = 0; s < ns; ++s)
      for (int b = first; b < first + count; ++b) sum += ev[s](b);
    c.mean = sum / (static_cast<double>(ns) * count);
    double var = 0.0;
    for (std::size_t s = 0; s < ns; ++s)
      for (int b = first; b < first + count; ++b) var += (ev[s](b) - c.mean) * (ev[s](b) - c.mean);
    c.deviation = std::sqrt(var / (static_cast<double>(ns) * count));
    std::tie(c.slope, c.rounding_distance) = nearest_rational(c.mean, n);
    if (c.rounding_distance > tol.round_tol) {
      out.resolved = false;
      out.reason += "cluster mean " + std::to_string(c.mean) + " is " + std::to_string(c.rounding_distance) +
                    " from the nearest admissible slope; ";
    }
    if (c.deviation > tol.spread_tol) {
      out.resolved = false;
      out.reason += "cluster spread " + std::to_string(c.deviation) + " exceeds spread_tol; ";
    }
    if (!entries.empty() && !(c.slope < entries.back().slope)) {
      out.resolved = false;
      out.reason += "adjacent clusters round to the same slope; ";
    }
    entries.push_back({c.slope, count});
    out.clusters.push_back(c);
  }
  if (out.resolved) {
    try {
      out.type = HNType(entries);
    } catch (const DomainError& e) {
      out.resolved = false;
      out.reason += std::string("rounded slopes do not form an HN type: ") + e.what();
    }
  }
  return out;
}

std::pair<HNType, SpectralAnalysis> spectral_hn_type(const HiggsPair& pair, const SpectralTolerances& tol,
                                                     const HermitianMetricField* metric) {
  SpectralAnalysis a = analyze_spectrum(theta_scalar(pair, metric), tol);
  if (!a.resolved) throw UnresolvedTypeError("spectral HN type unresolved: " + a.reason);
  HNType t = *a.type;
  return {std::move(t), std::move(a)};
}

std::vector<SplittingResidual> splitting_residuals(const HiggsPair& pair, const HNType& type,
                                                   const SpectralTolerances& tol) {
  if (type.rank() != pair.rank) throw DomainError("type rank differs from pair rank");
  const LatticeTorus& lat = pair.lattice();
  const std::size_t ns = lat.sites();
  const HermitianSiteField theta = theta_scalar(pair);
  const auto& entries = type.entries();
  const std::size_t nc = entries.size();
  std::vector<MatField> proj(nc, MatField(ns));
  std::vector<char> collapsed(ns, 0);
  for_each_index(ns, [&](std::size_t s) {
    const SiteEig e = site_eig_desc(theta.values[s]);
    int b = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      const int m = entries[c].multiplicity;
      const auto v = e.vectors.middleCols(b, m);
      proj[c][s] = v * v.adjoint();
      if (c + 1 < nc && e.values(b + m - 1) - e.values(b + m) < 0.5 * tol.cluster_gap) collapsed[s] = 1;
      b += m;
    }
  });
  if (std::any_of(collapsed.begin(), collapsed.end(), [](char c) { return c != 0; }))
    throw GapCollapseError("eigenvalue clusters meet within cluster_gap/2 at some site");
  std::vector<SplittingResidual> out(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const MatField d = dbar_endomorphism(pair.gauge, proj[c]);
    out[c].dbar = std::sqrt(2.0 * l2_norm_sq(lat, d));
    const double br = lat.site_weight() * sum_over(ns, [&](std::size_t s) {
                        return commutator(pair.higgs.values[s], proj[c][s]).squaredNorm();
                      });
    out[c].bracket = std::sqrt(2.0 * br);
  }
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::plateau: return "plateau";
    case Termination::max_steps: return "max_steps";
    case Termination::error: return "error";
  }
  return "?";
}

// ---- integrators -----------------------------------------------------------

namespace {

std::vector<double> weighted_values(const HermitianSiteField& theta, const std::vector<WatchItem>& watch) {
  std::vector<double> out;
  out.reserve(watch.size());
  if (watch.empty()) return out;
  const std::size_t ns = theta.values.size();
  std::vector<RVec> ev(ns);
  for_each_index(ns, [&](std::size_t s) { ev[s] = hermitian_eigenvalues(theta.values[s]); });
  const double w = theta.lattice->site_weight();
  for (const auto& item : watch) {
    double total = 0.0;
    for (std::size_t s = 0; s < ns; ++s)
      for (Eigen::Index k = 0; k < ev[s].size(); ++k) total += std::pow(std::abs(ev[s](k) + item.shift), item.alpha);
    out.push_back(w * total);
  }
  return out;
}

/// Shared bookkeeping for both integrators.
struct Monitor {
  FlowReport& report;
  std::vector<double> prev_weighted;

  void check_weighted(const std::vector<double>& now) {
    for (std::size_t k = 0; k < now.size(); ++k)
      if (!within_tol(now[k], prev_weighted[k])) ++report.weighted_violations[k];
    prev_weighted = now;
  }
  void check_energy(double e_new, double e_old) {
    const double rel = (e_new - e_old) / (1.0 + std::abs(e_old));
    report.max_relative_increase = std::max(report.max_relative_increase, rel);
    if (!within_tol(e_new, e_old)) ++report.monotonicity_violations;
  }
};

void finish_terminal(FlowReport& r, const HiggsPair& pair, const HermitianSiteField& theta, const FlowOptions& o,
                     bool with_splitting) {
  if (r.reason != Termination::converged && r.reason != Termination::plateau) return;
  r.terminal_spectrum = analyze_spectrum(theta, o.spectral);
  if (!r.terminal_spectrum.resolved) {
    r.error_message = "terminal spectrum unresolved after " + to_string(r.reason) + ": " + r.terminal_spectrum.reason;
    r.reason = Termination::error;
    return;
  }
  r.terminal_type = r.terminal_spectrum.type;
  if (!with_splitting) {
    r.terminal_note = "splitting residuals are computed for the pair flow only";
    return;
  }
  try {
    r.splitting = splitting_residuals(pair, *r.terminal_type, o.spectral);
  } catch (const GapCollapseError& e) {
    r.terminal_note = e.what();
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FlowReport integrate(const HiggsPair& initial, const FlowOptions& opts_in) {
  const auto t0 = std::chrono::steady_clock::now();
  const FlowOptions o = resolve_options(opts_in, initial.lattice());
  const LatticeTorus& lat = initial.lattice();
  FlowReport r;
  r.kind = "pair-gradient";
  r.watch = o.watch;
  r.weighted_violations.assign(o.watch.size(), 0);
  Monitor mon{r, {}};

  HiggsPair pair = initial;
  Evaluation ev;
  try {
    ev = evaluate(pair);
  } catch (const Error& e) {
    r.reason = Termination::error;
    r.error_message = e.what();
    r.final_pair = pair;
    r.wall_seconds = seconds_since(t0);
    return r;
  }
  Tangent grad = gradient_impl(pair, ev.spectra, ev.theta);
  double res = std::sqrt(tangent_norm_sq(lat, grad));
  std::vector<double> weighted = weighted_values(ev.theta, o.watch);
  mon.prev_weighted = weighted;

  double t = 0.0;
  double dt = *o.dt_initial;
  long step_no = 0;
  auto sample = [&](double ratio) {
    TrajectorySample s;
    s.step = step_no;
    s.t = t;
    s.dt = dt;
    s.ymh = ev.energy;
    s.weighted = weighted;
    s.holo_residual = holomorphicity_residual(pair);
    s.crit_residual = res;
    s.degree_check = ev.degree_raw;
    s.energy_rate_ratio = ratio;
    r.samples.push_back(std::move(s));
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  bool done = false;
  while (!done) {
    if (res < o.stop_residual) {
      r.reason = Termination::converged;
      sample(nan);
      break;
    }
    if (step_no >= o.max_steps) {
      r.reason = Termination::max_steps;
      sample(nan);
      break;
    }
    HiggsPair trial;
    Evaluation tev;
    bool ok = true;
    try {
      trial = apply_tangent(pair, grad, dt);
      tev = evaluate(trial);
      ok = std::isfinite(tev.energy);
    } catch (const BranchError&) {
      ok = false;
    }
    if (ok && !within_tol(tev.energy, ev.energy) && o.energy_backtrack) ok = false;
    if (!ok) {
      ++r.steps_rejected;
      dt *= 0.5;
      if (dt < *o.dt_min) {
        r.reason = Termination::error;
        r.error_message = "dt underflow: step size fell below dt_min while backtracking";
        sample(nan);
        break;
      }
      continue;
    }
    // Accepted.
    const double ratio = ((tev.energy - ev.energy) / dt) / (-2.0 * res * res);
    if (step_no % o.checkpoint_stride == 0) sample(ratio);
    mon.check_energy(tev.energy, ev.energy);
    if (std::abs(tev.degree_raw - initial.degree) > 1e-6) {
      r.reason = Termination::error;
      r.error_message = "degree drifted to " + std::to_string(tev.degree_raw);
      pair = std::move(trial);
      ev = std::move(tev);
      break;
    }
    const double rate = (ev.energy - tev.energy) / (dt * (1.0 + std::abs(ev.energy)));
    pair = std::move(trial);
    ev = std::move(tev);
    t += dt;
    ++step_no;
    ++r.steps_accepted;
    weighted = weighted_values(ev.theta, o.watch);
    mon.check_weighted(weighted);
    grad = gradient_impl(pair, ev.spectra, ev.theta);
    res = std::sqrt(tangent_norm_sq(lat, grad));
    if (dt < *o.dt_initial) dt = std::min(*o.dt_initial, dt * 1.25);
    if (res >= o.stop_residual && rate < o.stop_plateau) {
      r.reason = Termination::plateau;
      sample(nan);
      done = true;
    }
  }

  r.final_time = t;
  r.final_ymh = ev.energy;
  r.final_residual = res;
  finish_terminal(r, pair, ev.theta, o, true);
  r.final_pair = std::move(pair);
  r.wall_seconds = seconds_since(t0);
  return r;
}

HermitianMetricField metric_heat_step(const HermitianMetricField& h, const HiggsPair& base, double dt, double det_lo,
                                      double det_hi) {
  if (!(dt > 0.0)) throw DomainError("metric_heat_step needs dt > 0");
  validate_metric(h, det_lo, det_hi);
  const HermitianSiteField k = theta_scalar(base, &h);
  const LatticeTorus& lat = base.lattice();
  const double mu = kTwoPi * base.degree / (lat.volume() * base.rank);
  HermitianMetricField out = h;
  for_each_index(lat.sites(), [&](std::size_t s) {
    const Mat id = Mat::Identity(base.rank, base.rank);
    const Mat r = sqrt_hpd(h.values[s]);
    out.values[s] = herm_part(r * expm_hermitian(-dt * (k.values[s] - mu * id)) * r);
  });
  validate_metric(out, det_lo, det_hi);
  return out;
}

FlowReport integrate_metric_heat(const HiggsPair& base, const FlowOptions& opts_in) {
  const auto t0 = std::chrono::steady_clock::now();
  const FlowOptions o = resolve_options(opts_in, base.lattice());
  const LatticeTorus& lat = base.lattice();
  FlowReport r;
  r.kind = "metric-heat";
  r.watch = o.watch;
  r.weighted_violations.assign(o.watch.size(), 0);
  r.final_pair = base;
  Monitor mon{r, {}};

  HermitianMetricField h = identity_metric(base.gauge.lattice, base.rank);
  HermitianSiteField k;
  double degree_raw = 0.0;
  double holo = 0.0;
  try {
    k = theta_scalar(base, &h);
    degree_raw = degree_check(base.gauge).raw;
    holo = holomorphicity_residual(base);
  } catch (const Error& e) {
    r.reason = Termination::error;
    r.error_message = e.what();
    r.final_metric = h;
    r.wall_seconds = seconds_since(t0);
    return r;
  }
  double energy = ymh_from_theta(k);
  std::vector<double> weighted = weighted_values(k, o.watch);
  mon.prev_weighted = weighted;

  double t = 0.0;
  double dt = *o.dt_initial;
  long step_no = 0;
  double res = std::numeric_limits<double>::quiet_NaN();
  auto sample = [&](double ratio) {
    TrajectorySample s;
    s.step = step_no;
    s.t = t;
    s.dt = dt;
    s.ymh = energy;
    s.weighted = weighted;
    s.holo_residual = holo;
    s.crit_residual = res;
    s.degree_check = degree_raw;
    s.energy_rate_ratio = ratio;
    r.samples.push_back(std::move(s));
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  while (true) {
    if (step_no >= o.max_steps) {
      r.reason = Termination::max_steps;
      sample(nan);
      break;
    }
    HermitianMetricField trial;
    HermitianSiteField tk;
    bool ok = true;
    try {
      trial = metric_heat_step(h, base, dt, o.det_lo, o.det_hi);
      tk = theta_scalar(base, &trial);
    } catch (const MetricError&) {
      ok = false;
    }
    const double tenergy = ok ? ymh_from_theta(tk) : 0.0;
    if (ok && !std::isfinite(tenergy)) ok = false;
    if (ok && !within_tol(tenergy, energy) && o.energy_backtrack) ok = false;
    if (!ok) {
      ++r.steps_rejected;
      dt *= 0.5;
      if (dt < *o.dt_min) {
        r.reason = Termination::error;
        r.error_message = "dt underflow: metric step rejected down to dt_min";
        sample(nan);
        break;
      }
      continue;
    }
    // Stationarity residual of the current metric, measured by the step.
    MatField diff(lat.sites());
    for_each_index(lat.sites(), [&](std::size_t s) { diff[s] = tk.values[s] - k.values[s]; });
    res = l2_norm(lat, diff) / dt;
    if (res < o.stop_residual) {
      r.reason = Termination::converged;
      sample(nan);
      break;
    }
    if (step_no % o.checkpoint_stride == 0) sample(nan);
    mon.check_energy(tenergy, energy);
    const double rate = (energy - tenergy) / (dt * (1.0 + std::abs(energy)));
    h = std::move(trial);
    k = std::move(tk);
    energy = tenergy;
    t += dt;
    ++step_no;
    ++r.steps_accepted;
    weighted = weighted_values(k, o.watch);
    mon.check_weighted(weighted);
    if (dt < *o.dt_initial) dt = std::min(*o.dt_initial, dt * 1.25);
    if (rate < o.stop_plateau) {
      r.reason = Termination::plateau;
      sample(nan);
      break;
    }
  }

  r.final_time = t;
  r.final_ymh = energy;
  r.final_residual = res;
  finish_terminal(r, base, k, o, false);
  r.final_metric = std::move(h);
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace ymh
