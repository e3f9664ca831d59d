#include "ymh/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ymh/errors.hpp"

namespace ymh {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::type_preserved: return "type-preserved";
    case Verdict::type_mismatch: return "type-mismatch";
    case Verdict::asserted_consistent: return "asserted-consistent";
    case Verdict::asserted_differs: return "asserted-differs";
    case Verdict::job_error: return "job-error";
  }
  return "?";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double spectrum_distance(const HermitianSiteField& theta, const std::vector<double>& slopes) {
  std::vector<double> mu = slopes;
  std::sort(mu.begin(), mu.end(), std::greater<>());
  const LatticeTorus& lat = *theta.lattice;
  double total = 0.0;
  for (const auto& k : theta.values) {
    RVec ev = hermitian_eigenvalues(k);
    std::vector<double> e(ev.data(), ev.data() + ev.size());
    std::sort(e.begin(), e.end(), std::greater<>());
    for (std::size_t i = 0; i < e.size() && i < mu.size(); ++i) total += (e[i] - mu[i]) * (e[i] - mu[i]);
  }
  return std::sqrt(lat.site_weight() * total);
}

double sup_deviation(const HermitianSiteField& theta, double mu) {
  double m = 0.0;
  for (const auto& k : theta.values) {
    const RVec ev = hermitian_eigenvalues(k);
    for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, std::abs(ev(i) - mu));
  }
  return m;
}

namespace {

std::vector<double> expanded_slopes(const HNType& t) {
  std::vector<double> out;
  for (const auto& r : t.expanded()) out.push_back(to_double(r));
  return out;
}

HermitianSiteField terminal_theta(const JobResult& j) {
  const HermitianMetricField* h = j.report.final_metric ? &*j.report.final_metric : nullptr;
  return theta_scalar(j.report.final_pair, h);
}

}  // namespace

JobResult run_job(const ScenarioSpec& spec, FlowKind kind, const FlowOptions& options) {
  if (kind == FlowKind::both) throw DomainError("run_job takes a single flow kind");
  JobResult j;
  j.scenario = build_scenario(spec);
  j.kind = kind;
  j.options = options;
  const ScenarioOracle& o = j.scenario.oracle;
  const HiggsPair& pair = j.scenario.pair;

  std::vector<double> q_slopes;
  for (const auto& q : o.quotients) q_slopes.push_back(static_cast<double>(q.degree) / q.rank);
  j.initial_defect = approx_defect(pair, hn_projection(o.filtration, q_slopes), 2.0);
  j.lower_bound = hn_type_energy(o.type, 2.0, 0.0);

  j.report = kind == FlowKind::pair_gradient ? integrate(pair, options) : integrate_metric_heat(pair, options);

  const HermitianSiteField theta = terminal_theta(j);
  j.terminal_defect = spectrum_distance(theta, expanded_slopes(o.type));
  const double mu = kTwoPi * pair.degree / (pair.lattice().volume() * pair.rank);
  j.hitchin_residual = sup_deviation(theta, mu);

  if (j.report.reason == Termination::error || !j.report.terminal_type) {
    j.verdict = Verdict::job_error;
  } else if (o.tier == OracleTier::exact) {
    j.verdict = *j.report.terminal_type == o.type ? Verdict::type_preserved : Verdict::type_mismatch;
  } else {
    j.verdict = *j.report.terminal_type == o.type ? Verdict::asserted_consistent : Verdict::asserted_differs;
  }
  return j;
}

nlohmann::json hn_type_json(const HNType& t) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : t.entries())
    entries.push_back({{"slope", {{"num", e.slope.numerator()}, {"den", e.slope.denominator()}}},
                       {"multiplicity", e.multiplicity}});
  return {{"entries", entries}, {"str", t.str()}};
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

nlohmann::json options_json(const FlowOptions& o) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& item : o.watch) w.push_back({{"alpha", item.alpha}, {"shift", item.shift}});
  nlohmann::json j{{"max_steps", o.max_steps},
                   {"energy_backtrack", o.energy_backtrack},
                   {"stop_residual", o.stop_residual},
                   {"stop_plateau", o.stop_plateau},
                   {"checkpoint_stride", o.checkpoint_stride},
                   {"seed", o.seed},
                   {"cluster_gap", o.spectral.cluster_gap},
                   {"round_tol", o.spectral.round_tol},
                   {"spread_tol", o.spectral.spread_tol},
                   {"watch", w}};
  j["dt_initial"] = o.dt_initial ? nlohmann::json(*o.dt_initial) : nlohmann::json("default");
  j["dt_min"] = o.dt_min ? nlohmann::json(*o.dt_min) : nlohmann::json("default");
  return j;
}

}  // namespace

nlohmann::json job_json(const JobResult& job, bool include_timing) {
  const ScenarioSpec& s = job.scenario.spec;
  const ScenarioOracle& o = job.scenario.oracle;
  const FlowReport& r = job.report;
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["scenario"] = {{"name", s.name},
                   {"n_sites", s.n_sites},
                   {"volume", s.volume},
                   {"degrees", s.degrees},
                   {"twist_degree", s.twist_degree},
                   {"stable", s.stable}};
  j["scenario"]["scramble_seed"] = s.scramble_seed ? nlohmann::json(*s.scramble_seed) : nlohmann::json(nullptr);
  j["kind"] = to_string(job.kind);
  j["options"] = options_json(job.options);

  nlohmann::json quotients = nlohmann::json::array();
  for (const auto& q : o.quotients) quotients.push_back({{"rank", q.rank}, {"degree", q.degree}, {"stability", q.stability}});
  j["oracle"] = {{"type", hn_type_json(o.type)}, {"tier", to_string(o.tier)}, {"quotients", quotients}};

  j["termination"] = {{"reason", to_string(r.reason)}, {"message", r.error_message}};
  j["steps"] = {{"accepted", r.steps_accepted}, {"rejected", r.steps_rejected}};

  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.terminal_spectrum.clusters)
    clusters.push_back({{"mean", num(c.mean)},
                        {"deviation", num(c.deviation)},
                        {"multiplicity", c.multiplicity},
                        {"slope", {{"num", c.slope.numerator()}, {"den", c.slope.denominator()}}},
                        {"rounding_distance", num(c.rounding_distance)}});
  nlohmann::json splitting = nlohmann::json::array();
  for (const auto& sp : r.splitting) splitting.push_back({{"dbar", num(sp.dbar)}, {"bracket", num(sp.bracket)}});
  const double holo = r.kind == "pair-gradient" ? holomorphicity_residual(r.final_pair) : 0.0;
  j["terminal"] = {{"type", r.terminal_type ? hn_type_json(*r.terminal_type) : nlohmann::json(nullptr)},
                   {"spectrum_resolved", r.terminal_spectrum.resolved},
                   {"spectrum_reason", r.terminal_spectrum.reason},
                   {"clusters", clusters},
                   {"splitting", splitting},
                   {"note", r.terminal_note},
                   {"time", num(r.final_time)},
                   {"ymh", num(r.final_ymh)},
                   {"crit_residual", num(r.final_residual)},
                   {"holo_residual", num(holo)},
                   {"hitchin_residual", num(job.hitchin_residual)},
                   {"lower_bound", num(job.lower_bound)}};
  j["terminal"]["dominance_vs_oracle"] =
      r.terminal_type ? nlohmann::json(to_string(dominance_compare(o.type, *r.terminal_type))) : nlohmann::json(nullptr);

  nlohmann::json weighted = nlohmann::json::array();
  for (std::size_t k = 0; k < r.watch.size(); ++k)
    weighted.push_back({{"alpha", r.watch[k].alpha},
                        {"shift", r.watch[k].shift},
                        {"violations", k < r.weighted_violations.size() ? r.weighted_violations[k] : 0}});
  j["monotonicity"] = {{"violations", r.monotonicity_violations},
                       {"max_relative_increase", num(r.max_relative_increase)},
                       {"weighted", weighted}};
  j["defects"] = {{"initial_l2", num(job.initial_defect)}, {"terminal_l2", num(job.terminal_defect)}};
  j["verdict"] = to_string(job.verdict);
  if (include_timing) j["timing"] = {{"wall_seconds", r.wall_seconds}};
  return j;
}

std::string trajectory_csv(const FlowReport& report) {
  std::ostringstream out;
  out << "# schema: " << kTrajectorySchema << '\n';
  out << "t,dt,ymh";
  for (const auto& w : report.watch) out << ",ymh_a" << format_double(w.alpha) << "_n" << format_double(w.shift);
  out << ",holo_residual,crit_residual,degree_check\n";
  for (const auto& s : report.samples) {
    out << format_double(s.t) << ',' << format_double(s.dt) << ',' << format_double(s.ymh);
    for (std::size_t k = 0; k < report.watch.size(); ++k)
      out << ',' << (k < s.weighted.size() ? format_double(s.weighted[k]) : std::string());
    out << ',' << format_double(s.holo_residual) << ',' << format_double(s.crit_residual) << ','
        << format_double(s.degree_check) << '\n';
  }
  return out.str();
}

}  // namespace ymh
