#include <doctest.h>

#include "ymh/config.hpp"
#include "ymh/errors.hpp"

using namespace ymh;

TEST_CASE("full configuration") {
  const RunConfig c = parse_config_string(R"(
[run]
kind = both
output = out/x
emit_csv = false
workers = 3

[flow]
max_steps = 500
dt_initial = 0.001
stop_residual = 1e-5
watch = 1:0, 2.5:1

[verify]
suites = bracket, norms
samples = 20

[sweep]
epsilon = 0, 0.25
seeds = 1, 2, 3

[scenario.ext]
n_sites = 24
degrees = 2, 0, -2
higgs_1_2 = 1, 0.5-0.2i
extension_2_3 = 0.3
extension_2_3_amplitudes = 2i
scramble_seed = 7
)");
  CHECK(c.kind == FlowKind::both);
  CHECK(c.output_dir == "out/x");
  CHECK_FALSE(c.emit_csv);
  CHECK(c.workers == 3);
  CHECK(c.flow.max_steps == 500);
  CHECK(*c.flow.dt_initial == 0.001);
  CHECK(c.flow.stop_residual == 1e-5);
  REQUIRE(c.flow.watch.size() == 2);
  CHECK(c.flow.watch[1].alpha == 2.5);
  CHECK(c.flow.watch[1].shift == 1.0);
  CHECK(c.verify_suites == std::vector<std::string>{"bracket", "norms"});
  CHECK(c.verify_samples == 20);
  CHECK(c.sweep.epsilon == std::vector<double>{0.0, 0.25});
  CHECK(c.sweep.seeds.size() == 3);
  REQUIRE(c.scenarios.size() == 1);
  const ScenarioSpec& s = c.scenarios[0];
  CHECK(s.name == "ext");
  CHECK(s.n_sites == 24);
  CHECK(s.degrees == std::vector<int>{2, 0, -2});
  REQUIRE(s.higgs.size() == 1);
  CHECK(s.higgs[0].row == 0);
  CHECK(s.higgs[0].col == 1);
  CHECK(s.higgs[0].amplitudes == std::vector<Complex>{{1, 0}, {0.5, -0.2}});
  REQUIRE(s.extensions.size() == 1);
  CHECK(s.extensions[0].row == 1);
  CHECK(s.extensions[0].col == 2);
  CHECK(s.extensions[0].epsilon == 0.3);
  CHECK(s.extensions[0].amplitudes == std::vector<Complex>{{0, 2}});
  CHECK(s.scramble_seed == 7u);
}

TEST_CASE("complex literals") {
  CHECK(parse_complex_list("1, -2, 3i, -i, 1+i, 1+2i, 2.5-0.5i") ==
        std::vector<Complex>{{1, 0}, {-2, 0}, {0, 3}, {0, -1}, {1, 1}, {1, 2}, {2.5, -0.5}});
  CHECK(parse_complex_list("1e-3+2e-1i") == std::vector<Complex>{{1e-3, 2e-1}});
  CHECK_THROWS_AS(parse_complex_list("1+"), ConfigError);
  CHECK_THROWS_AS(parse_complex_list("abc"), ConfigError);
}

TEST_CASE("mistakes are reported as ConfigError") {
  CHECK_THROWS_AS(parse_config_string("[flow]\nmax_step = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[flows]\nmax_steps = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[scenario.a]\nn_sites = 16\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[run]\nkind = sideways\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[run]\nworkers = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[flow]\nmax_steps = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[verify]\nsuites = bracket, nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[flow]\nwatch = 0.5:0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("flow overrides use the config key names") {
  FlowOptions f;
  apply_flow_override(f, "max_steps", "12");
  apply_flow_override(f, "energy_backtrack", "false");
  apply_flow_override(f, "cluster_gap", "0.2");
  CHECK(f.max_steps == 12);
  CHECK_FALSE(f.energy_backtrack);
  CHECK(f.spectral.cluster_gap == 0.2);
  CHECK_THROWS_AS(apply_flow_override(f, "nope", "1"), ConfigError);
  CHECK_THROWS_AS(apply_flow_override(f, "checkpoint_stride", "0"), ConfigError);
  for (const auto& k : flow_option_keys()) CHECK_FALSE(k.empty());
}

TEST_CASE("flow kind names") {
  for (auto k : {FlowKind::pair_gradient, FlowKind::metric_heat, FlowKind::both}) CHECK(parse_flow_kind(to_string(k)) == k);
}
