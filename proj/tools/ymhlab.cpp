// ymhlab: batch driver for the lattice Yang-Mills-Higgs flow.
//
//   ymhlab run    -c run.ini      scenario x flow-kind jobs
//   ymhlab verify [-c run.ini]    flow-free property suites
//   ymhlab sweep  -c run.ini      grid over epsilon, seeds, N, alpha
//
// Exit status: 0 ok, 1 job or suite failure, 2 configuration error,
// 3 an exact oracle disagrees with a terminal type.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ymh/config.hpp"
#include "ymh/errors.hpp"
#include "ymh/field_io.hpp"
#include "ymh/parallel.hpp"
#include "ymh/report.hpp"
#include "ymh/verify.hpp"

namespace fs = std::filesystem;
using namespace ymh;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitJob = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOracle = 3;

struct Common {
  std::string config_path;
  std::string output;
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> flow_overrides;
  bool no_timing = false;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("-c,--config", c.config_path, "INI configuration file");
  if (config_required) opt->required();
  cmd->add_option("-o,--output", c.output, "output directory (overrides run.output)");
  cmd->add_option("--kind", c.kind, "pair-gradient | metric-heat | both");
  cmd->add_option("--seed", c.seed, "seed (overrides YMHLAB_SEED and flow.seed)");
  cmd->add_option("--workers", c.workers, "concurrent jobs");
  cmd->add_flag("--no-timing", c.no_timing, "omit wall-clock timings from report.json");
  for (const auto& key : flow_option_keys())
    if (key != "seed")  // --seed above
      cmd->add_option_function<std::string>(
        "--" + key, [&c, key](const std::string& v) { c.flow_overrides[key] = v; }, "flow option " + key);
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("YMHLAB_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("YMHLAB_SEED='") + v + "' is not an unsigned integer");
  return x;
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : parse_config_file(c.config_path);
  for (const auto& [k, v] : c.flow_overrides) apply_flow_override(cfg.flow, k, v);
  if (!c.output.empty()) cfg.output_dir = c.output;
  if (!c.kind.empty()) cfg.kind = parse_flow_kind(c.kind);
  if (c.workers) {
    if (*c.workers < 1) throw ConfigError("--workers must be >= 1");
    cfg.workers = *c.workers;
  }
  if (c.seed)
    cfg.flow.seed = *c.seed;
  else if (auto s = env_seed())
    cfg.flow.seed = *s;
  // A nonzero seed scrambles every scenario that does not pin its own.
  if (cfg.flow.seed != 0)
    for (auto& s : cfg.scenarios)
      if (!s.scramble_seed) s.scramble_seed = cfg.flow.seed;
  for (std::size_t k = 0; k < cfg.scenarios.size(); ++k)
    if (cfg.scenarios[k].name.empty()) cfg.scenarios[k].name = "scenario" + std::to_string(k + 1);
  return cfg;
}

std::vector<FlowKind> kinds_of(FlowKind k) {
  if (k == FlowKind::both) return {FlowKind::pair_gradient, FlowKind::metric_heat};
  return {k};
}

struct JobSpec {
  ScenarioSpec scenario;
  FlowKind kind;
  FlowOptions options;
};

struct JobOutcome {
  std::optional<JobResult> result;
  std::string error;  // construction failure
};

std::vector<JobOutcome> run_all(const std::vector<JobSpec>& jobs, int workers) {
  std::vector<JobOutcome> out(jobs.size());
  auto work = [&](std::size_t k) {
    try {
      out[k].result = run_job(jobs[k].scenario, jobs[k].kind, jobs[k].options);
    } catch (const std::exception& e) {
      out[k].error = e.what();
    }
  };
  if (workers <= 1 || jobs.size() <= 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) work(k);
    return out;
  }
  // Jobs own their state; site loops stay serial so threads do not nest.
  const Exec saved = default_exec();
  set_default_exec(Exec::serial);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) work(k);
    });
  for (auto& t : pool) t.join();
  set_default_exec(saved);
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw FormatError("cannot write " + p.string());
  f << text;
}

nlohmann::json samples_json(const FlowReport& r) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& s : r.samples)
    a.push_back({{"step", s.step},
                 {"t", s.t},
                 {"dt", s.dt},
                 {"ymh", s.ymh},
                 {"weighted", s.weighted},
                 {"holo_residual", s.holo_residual},
                 {"crit_residual", s.crit_residual},
                 {"degree_check", s.degree_check},
                 {"energy_rate_ratio", std::isfinite(s.energy_rate_ratio) ? nlohmann::json(s.energy_rate_ratio)
                                                                           : nlohmann::json(nullptr)}});
  return a;
}

int cmd_run(const Common& c) {
  const RunConfig cfg = load(c);
  if (cfg.scenarios.empty()) throw ConfigError("configuration has no [scenario.<name>] section");
  resolve_options(cfg.flow, *build_torus(cfg.scenarios.front().n_sites, cfg.scenarios.front().volume));

  std::vector<JobSpec> jobs;
  for (const auto& s : cfg.scenarios)
    for (FlowKind k : kinds_of(cfg.kind)) jobs.push_back({s, k, cfg.flow});
  const auto outcomes = run_all(jobs, cfg.workers);

  int status = kExitOk;
  std::cout << std::left << std::setw(24) << "scenario" << std::setw(15) << "kind" << std::setw(11) << "result"
            << std::setw(26) << "terminal type" << "verdict\n";
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& job = jobs[k];
    const fs::path dir = cfg.output_dir / job.scenario.name / to_string(job.kind);
    if (!outcomes[k].result) {
      std::cout << std::setw(24) << job.scenario.name << std::setw(15) << to_string(job.kind) << std::setw(11)
                << "error" << std::setw(26) << "-" << outcomes[k].error << '\n';
      nlohmann::json j{{"schema", kReportSchema}, {"scenario", {{"name", job.scenario.name}}},
                       {"kind", to_string(job.kind)}, {"verdict", to_string(Verdict::job_error)},
                       {"termination", {{"reason", "error"}, {"message", outcomes[k].error}}}};
      if (cfg.emit_json) write_text(dir / "report.json", j.dump(2) + "\n");
      status = std::max(status, kExitJob);
      continue;
    }
    const JobResult& r = *outcomes[k].result;
    if (cfg.emit_json) write_text(dir / "report.json", job_json(r, !c.no_timing).dump(2) + "\n");
    if (cfg.emit_csv) write_text(dir / "trajectory.csv", trajectory_csv(r.report));
    if (cfg.emit_checkpoints) {
      write_field_dump(dir / "final", {r.report.final_pair, r.report.final_metric, cfg.flow.seed});
      write_text(dir / "final.samples.json", samples_json(r.report).dump() + "\n");
    }
    std::cout << std::setw(24) << job.scenario.name << std::setw(15) << to_string(job.kind) << std::setw(11)
              << to_string(r.report.reason) << std::setw(26)
              << (r.report.terminal_type ? r.report.terminal_type->str() : std::string("-")) << to_string(r.verdict)
              << '\n';
    if (r.verdict == Verdict::job_error) status = std::max(status, kExitJob);
  }
  // Oracle failures outrank job errors: they are the scientific signal.
  for (const auto& o : outcomes)
    if (o.result && o.result->verdict == Verdict::type_mismatch) status = kExitOracle;
  return status;
}

int cmd_verify(const Common& c, std::vector<std::string> suites, std::optional<int> n_sites,
               std::optional<int> samples, bool suites_given, bool inject) {
  const RunConfig cfg = load(c);
  if (!suites_given) suites = cfg.verify_suites.empty() ? all_verify_suites() : cfg.verify_suites;
  if (suites.empty()) throw ConfigError("verify: empty suite selection");
  for (const auto& s : suites)
    if (std::find(all_verify_suites().begin(), all_verify_suites().end(), s) == all_verify_suites().end())
      throw ConfigError("verify: unknown suite '" + s + "'");
  VerifyOptions vo;
  vo.n_sites = n_sites.value_or(cfg.verify_n_sites);
  vo.samples = samples.value_or(cfg.verify_samples);
  vo.seed = cfg.flow.seed != 0 ? cfg.flow.seed : 1;
  if (vo.samples < 1) throw ConfigError("verify: samples must be >= 1");

  mutation::set_flip_curvature_sign(inject);
  bool all = true;
  std::cout << std::left << std::setw(12) << "suite" << std::setw(7) << "result" << std::setw(14) << "checks"
            << "detail\n";
  for (const auto& s : suites) {
    SuiteResult r;
    try {
      r = run_suite(s, vo);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.name = s;
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    all = all && r.passed;
    std::cout << std::setw(12) << r.name << std::setw(7) << (r.passed ? "PASS" : "FAIL") << std::setw(14)
              << (std::to_string(r.checks - r.failures) + "/" + std::to_string(r.checks)) << r.detail << '\n';
  }
  mutation::set_flip_curvature_sign(false);
  if (!all) std::cout << "verify: failing suites present\n";
  return all ? kExitOk : kExitJob;
}

ScenarioSpec with_epsilon(ScenarioSpec s, double eps) {
  if (s.extensions.empty()) {
    if (eps == 0.0) return s;
    for (int k = 0; k + 1 < static_cast<int>(s.degrees.size()); ++k) s.extensions.push_back({k, k + 1, eps, {}});
    return s;
  }
  for (auto& e : s.extensions) e.epsilon = eps;
  return s;
}

int cmd_sweep(const Common& c) {
  RunConfig cfg = load(c);
  if (cfg.scenarios.empty()) throw ConfigError("configuration has no [scenario.<name>] section");
  if (cfg.sweep.empty()) throw ConfigError("sweep: the [sweep] grid is empty");

  struct Cell {
    std::string eps, seed, alpha;
  };
  std::vector<JobSpec> jobs;
  std::vector<Cell> cells;
  const std::vector<int> sizes = cfg.sweep.n_sites;
  for (const auto& base : cfg.scenarios) {
    const std::vector<int> ns = sizes.empty() ? std::vector<int>{base.n_sites} : sizes;
    const std::size_t ne = std::max<std::size_t>(1, cfg.sweep.epsilon.size());
    const std::size_t nseed = std::max<std::size_t>(1, cfg.sweep.seeds.size());
    const std::size_t na = std::max<std::size_t>(1, cfg.sweep.alpha.size());
    for (int n : ns)
      for (std::size_t ie = 0; ie < ne; ++ie)
        for (std::size_t is = 0; is < nseed; ++is)
          for (std::size_t ia = 0; ia < na; ++ia)
            for (FlowKind k : kinds_of(cfg.kind)) {
              ScenarioSpec s = base;
              s.n_sites = n;
              Cell cell{"-", s.scramble_seed ? std::to_string(*s.scramble_seed) : "-", "-"};
              if (!cfg.sweep.epsilon.empty()) {
                s = with_epsilon(s, cfg.sweep.epsilon[ie]);
                cell.eps = format_double(cfg.sweep.epsilon[ie]);
              }
              if (!cfg.sweep.seeds.empty()) {
                s.scramble_seed = cfg.sweep.seeds[is];
                cell.seed = std::to_string(cfg.sweep.seeds[is]);
              }
              FlowOptions o = cfg.flow;
              if (!cfg.sweep.alpha.empty()) {
                o.watch = {{cfg.sweep.alpha[ia], 0.0}, {cfg.sweep.alpha[ia], 2.0}};
                cell.alpha = format_double(cfg.sweep.alpha[ia]);
              }
              jobs.push_back({s, k, o});
              cells.push_back(cell);
            }
  }
  const auto outcomes = run_all(jobs, cfg.workers);

  std::ostringstream csv;
  csv << "# schema: " << kSweepSchema << '\n'
      << "scenario,kind,n_sites,epsilon,seed,alpha,termination,terminal_type,oracle_type,oracle_tier,flag,"
         "initial_defect,terminal_defect,final_ymh,final_residual,holo_residual,monotonicity_violations,"
         "weighted_violations,message\n";
  int status = kExitOk;
  long flagged = 0;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& job = jobs[k];
    csv << csv_field(job.scenario.name) << ',' << to_string(job.kind) << ',' << job.scenario.n_sites << ','
        << cells[k].eps << ',' << cells[k].seed << ',' << cells[k].alpha << ',';
    if (!outcomes[k].result) {
      csv << "error,,,,job-error,,,,,,,," << csv_field(outcomes[k].error) << '\n';
      status = std::max(status, kExitJob);
      continue;
    }
    const JobResult& r = *outcomes[k].result;
    const FlowReport& fr = r.report;
    const bool differs = !fr.terminal_type || !(*fr.terminal_type == r.scenario.oracle.type);
    std::string flag = differs ? "type-differs" : "ok";
    if (r.verdict == Verdict::job_error) flag = "job-error";
    if (differs) ++flagged;
    long wv = 0;
    for (long v : fr.weighted_violations) wv += v;
    csv << to_string(fr.reason) << ',' << csv_field(fr.terminal_type ? fr.terminal_type->str() : "-") << ','
        << csv_field(r.scenario.oracle.type.str()) << ',' << to_string(r.scenario.oracle.tier) << ',' << flag << ','
        << format_double(r.initial_defect) << ',' << format_double(r.terminal_defect) << ','
        << format_double(fr.final_ymh) << ',' << format_double(fr.final_residual) << ','
        << format_double(fr.kind == "pair-gradient" ? holomorphicity_residual(fr.final_pair) : 0.0) << ','
        << fr.monotonicity_violations << ',' << wv << ',' << csv_field(fr.error_message) << '\n';
    if (r.verdict == Verdict::job_error) status = std::max(status, kExitJob);
  }
  for (const auto& o : outcomes)
    if (o.result && o.result->verdict == Verdict::type_mismatch) status = kExitOracle;
  write_text(cfg.output_dir / "sweep.csv", csv.str());
  std::cout << "sweep: " << jobs.size() << " cells, " << flagged << " flagged, written to "
            << (cfg.output_dir / "sweep.csv").string() << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ymhlab: lattice Yang-Mills-Higgs flow experiments"};
  app.require_subcommand(1);

  Common run_opts, verify_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "run every scenario under the configured flow kinds");
  add_common(run, run_opts, true);

  auto* verify = app.add_subcommand("verify", "run flow-free property suites");
  add_common(verify, verify_opts, false);
  std::vector<std::string> suites;
  std::optional<int> v_sites, v_samples;
  bool inject = false;
  auto* suites_opt = verify->add_option("--suites", suites, "suite names")->delimiter(',');
  verify->add_option("--n_sites", v_sites, "lattice size for lattice suites");
  verify->add_option("--samples", v_samples, "random samples per sampling suite");
  verify->add_flag("--inject-curvature-sign-error", inject, "mutation fixture: flip the curvature sign in theta");

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and aggregate sweep.csv");
  add_common(sweep, sweep_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*verify) return cmd_verify(verify_opts, suites, v_sites, v_samples, suites_opt->count() > 0, inject);
    if (*sweep) return cmd_sweep(sweep_opts);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitJob;
  }
  return kExitOk;
}
