#pragma once

// Jobs (one scenario under one flow kind) and their machine-readable output.
//
// report.json schema "ymhlab-report/1":
//   schema, scenario{name, n_sites, volume, degrees, twist_degree, stable,
//   scramble_seed}, kind, options{...}, oracle{type, tier, quotients},
//   termination{reason, message}, steps{accepted, rejected},
//   terminal{type|null, clusters[], splitting[], note, time, ymh,
//   crit_residual, holo_residual, hitchin_residual, lower_bound},
//   monotonicity{violations, max_relative_increase, weighted[]},
//   defects{initial_l2, terminal_l2}, verdict, timing{wall_seconds}.
// HN types are arrays of {"slope": {"num", "den"}, "multiplicity"} plus a
// display string. Everything except "timing" is a deterministic function of
// the configuration.
//
// trajectory.csv: row 1 is "# schema: ymhlab-trajectory/1", row 2 the
// header t,dt,ymh,ymh_a<alpha>_n<shift>...,holo_residual,crit_residual,
// degree_check.

#include <string>
#include <vector>

#include <json.hpp>

#include "ymh/config.hpp"
#include "ymh/flow.hpp"
#include "ymh/scenarios.hpp"

namespace ymh {

inline constexpr const char* kReportSchema = "ymhlab-report/1";
inline constexpr const char* kTrajectorySchema = "ymhlab-trajectory/1";
inline constexpr const char* kSweepSchema = "ymhlab-sweep/1";

enum class Verdict { type_preserved, type_mismatch, asserted_consistent, asserted_differs, job_error };
std::string to_string(Verdict v);

struct JobResult {
  Scenario scenario;
  FlowKind kind = FlowKind::pair_gradient;  // never `both`
  FlowOptions options;
  FlowReport report;
  Verdict verdict = Verdict::job_error;
  double initial_defect = 0.0;   // L2 distance of sqrt(-1) Lambda Theta from the oracle HN projection
  double terminal_defect = 0.0;  // L2 distance of the terminal spectrum from the oracle slopes
  double hitchin_residual = 0.0; // sup |eigenvalue - deg/rank| at the end
  double lower_bound = 0.0;      // hn_type_energy(oracle, 2, 0)
};

/// Builds the scenario (construction errors propagate) and runs one flow.
JobResult run_job(const ScenarioSpec& spec, FlowKind kind, const FlowOptions& options);

/// Sorted-eigenvalue distance to a slope vector, a^2 weighted.
double spectrum_distance(const HermitianSiteField& theta, const std::vector<double>& slopes);
double sup_deviation(const HermitianSiteField& theta, double mu);

nlohmann::json hn_type_json(const HNType& t);
nlohmann::json job_json(const JobResult& job, bool include_timing = true);

std::string trajectory_csv(const FlowReport& report);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

/// Round-trip-safe decimal formatting used in every CSV and JSON float.
std::string format_double(double v);

}  // namespace ymh
