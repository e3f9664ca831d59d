#pragma once

// INI run configuration. Key set (all keys optional unless noted):
//
//   [run]       kind = pair-gradient | metric-heat | both
//               output = <dir>            emit_csv = true   emit_json = true
//               checkpoints = false       workers = 1
//   [flow]      dt_initial  dt_min  max_steps  energy_backtrack  stop_residual
//               stop_plateau  checkpoint_stride  seed  cluster_gap  round_tol
//               spread_tol  det_lo  det_hi
//               watch = 1:0, 1.5:0, 3:0   (alpha:shift pairs)
//   [verify]    suites = bracket, convexity, dominance, norms, degree, sections
//               n_sites = 16   samples = 200
//   [sweep]     epsilon = 0, 0.1   seeds = 1, 2   n_sites = 16, 32   alpha = 1, 3
//   [scenario.<name>]   one section per scenario:
//               degrees = 1, -1          (required)
//               n_sites = 16   volume = 6.283185307179586   twist_degree = 0
//               higgs_<r>_<c> = 1, 0.5-0.2i     (1-based block, amplitudes)
//               extension_<r>_<c> = 0.3         (scaling epsilon, r < c)
//               extension_<r>_<c>_amplitudes = 1
//               stable = false   scramble_seed = 7
//
// Complex amplitudes accept a, bi, a+bi and a-bi.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ymh/flow.hpp"
#include "ymh/scenarios.hpp"

namespace ymh {

enum class FlowKind { pair_gradient, metric_heat, both };
std::string to_string(FlowKind k);
FlowKind parse_flow_kind(const std::string& s);

struct SweepGrid {
  std::vector<double> epsilon;
  std::vector<std::uint64_t> seeds;
  std::vector<int> n_sites;
  std::vector<double> alpha;
  bool empty() const { return epsilon.empty() && seeds.empty() && n_sites.empty() && alpha.empty(); }
};

struct RunConfig {
  std::vector<ScenarioSpec> scenarios;
  FlowOptions flow;
  FlowKind kind = FlowKind::pair_gradient;
  std::filesystem::path output_dir = "ymhlab-out";
  bool emit_csv = true;
  bool emit_json = true;
  bool emit_checkpoints = false;
  int workers = 1;
  std::vector<std::string> verify_suites;
  int verify_n_sites = 16;
  int verify_samples = 200;
  SweepGrid sweep;
};

/// All verification suite names, in execution order.
const std::vector<std::string>& all_verify_suites();

/// Throws ConfigError with the offending key in the message.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

const std::vector<std::string>& flow_option_keys();

/// Applies `key = value` overrides using the [flow] key names.
void apply_flow_override(FlowOptions& flow, const std::string& key, const std::string& value);

std::vector<Complex> parse_complex_list(const std::string& text);
std::vector<WatchItem> parse_watch_list(const std::string& text);

}  // namespace ymh
