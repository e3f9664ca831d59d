#include "ymh/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ymh/errors.hpp"

namespace ymh {

namespace pt = boost::property_tree;

std::string to_string(FlowKind k) {
  switch (k) {
    case FlowKind::pair_gradient: return "pair-gradient";
    case FlowKind::metric_heat: return "metric-heat";
    case FlowKind::both: return "both";
  }
  return "?";
}

FlowKind parse_flow_kind(const std::string& s) {
  if (s == "pair-gradient") return FlowKind::pair_gradient;
  if (s == "metric-heat") return FlowKind::metric_heat;
  if (s == "both") return FlowKind::both;
  throw ConfigError("unknown flow kind '" + s + "' (pair-gradient, metric-heat, both)");
}

const std::vector<std::string>& all_verify_suites() {
  static const std::vector<std::string> names{"bracket", "convexity", "dominance", "norms", "degree", "sections"};
  return names;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_number(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError(key + ": '" + v + "' is not a number");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long long x = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError(key + ": '" + v + "' is not an integer");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

template <class T, class F>
std::vector<T> list_of(const std::string& key, const std::string& v, F conv) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<T>(conv(key, item)));
  return out;
}

void check_known(const pt::ptree& section, const std::string& name, const std::vector<std::string>& known) {
  for (const auto& [k, _] : section)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("unknown key '" + k + "' in [" + name + "]");
}

const std::vector<std::string> kFlowKeysList{"dt_initial",     "dt_min",     "max_steps",         "energy_backtrack",
                                         "stop_residual",  "stop_plateau", "checkpoint_stride", "seed",
                                         "cluster_gap",    "round_tol",  "spread_tol",        "det_lo",
                                         "det_hi",         "watch"};

ScenarioSpec parse_scenario(const std::string& name, const pt::ptree& sec) {
  ScenarioSpec spec;
  spec.name = name;
  const std::string where = "scenario." + name;
  static const std::regex higgs_re(R"(higgs_(\d+)_(\d+))");
  static const std::regex ext_re(R"(extension_(\d+)_(\d+))");
  static const std::regex ext_amp_re(R"(extension_(\d+)_(\d+)_amplitudes)");
  std::map<std::pair<int, int>, ExtensionBlock> ext;
  bool have_degrees = false;
  for (const auto& [key, node] : sec) {
    const std::string v = node.data();
    const std::string full = where + "." + key;
    std::smatch m;
    if (key == "degrees") {
      spec.degrees = list_of<int>(full, v, to_integer);
      have_degrees = true;
    } else if (key == "n_sites") {
      spec.n_sites = static_cast<int>(to_integer(full, v));
    } else if (key == "volume") {
      spec.volume = to_number(full, v);
    } else if (key == "twist_degree") {
      spec.twist_degree = static_cast<int>(to_integer(full, v));
    } else if (key == "stable") {
      spec.stable = to_bool(full, v);
    } else if (key == "scramble_seed") {
      spec.scramble_seed = static_cast<std::uint64_t>(to_integer(full, v));
    } else if (std::regex_match(key, m, higgs_re)) {
      spec.higgs.push_back({std::stoi(m[1]) - 1, std::stoi(m[2]) - 1, parse_complex_list(v)});
    } else if (std::regex_match(key, m, ext_amp_re)) {
      auto& e = ext[{std::stoi(m[1]) - 1, std::stoi(m[2]) - 1}];
      e.amplitudes = parse_complex_list(v);
    } else if (std::regex_match(key, m, ext_re)) {
      auto& e = ext[{std::stoi(m[1]) - 1, std::stoi(m[2]) - 1}];
      e.epsilon = to_number(full, v);
    } else {
      throw ConfigError("unknown key '" + key + "' in [" + where + "]");
    }
  }
  if (!have_degrees) throw ConfigError("[" + where + "] needs 'degrees'");
  for (auto& [rc, e] : ext) {
    e.row = rc.first;
    e.col = rc.second;
    spec.extensions.push_back(e);
  }
  return spec;
}

RunConfig from_tree(const pt::ptree& tree) {
  RunConfig cfg;
  for (const auto& [name, sec] : tree) {
    if (name == "run") {
      check_known(sec, name, {"kind", "output", "emit_csv", "emit_json", "checkpoints", "workers"});
      if (auto v = sec.get_optional<std::string>("kind")) cfg.kind = parse_flow_kind(trim(*v));
      if (auto v = sec.get_optional<std::string>("output")) cfg.output_dir = trim(*v);
      if (auto v = sec.get_optional<std::string>("emit_csv")) cfg.emit_csv = to_bool("run.emit_csv", *v);
      if (auto v = sec.get_optional<std::string>("emit_json")) cfg.emit_json = to_bool("run.emit_json", *v);
      if (auto v = sec.get_optional<std::string>("checkpoints")) cfg.emit_checkpoints = to_bool("run.checkpoints", *v);
      if (auto v = sec.get_optional<std::string>("workers")) cfg.workers = static_cast<int>(to_integer("run.workers", *v));
      if (cfg.workers < 1) throw ConfigError("run.workers must be >= 1");
    } else if (name == "flow") {
      check_known(sec, name, flow_option_keys());
      for (const auto& [k, node] : sec) apply_flow_override(cfg.flow, k, node.data());
    } else if (name == "verify") {
      check_known(sec, name, {"suites", "n_sites", "samples"});
      if (auto v = sec.get_optional<std::string>("suites")) cfg.verify_suites = split_list(*v);
      if (auto v = sec.get_optional<std::string>("n_sites"))
        cfg.verify_n_sites = static_cast<int>(to_integer("verify.n_sites", *v));
      if (auto v = sec.get_optional<std::string>("samples"))
        cfg.verify_samples = static_cast<int>(to_integer("verify.samples", *v));
    } else if (name == "sweep") {
      check_known(sec, name, {"epsilon", "seeds", "n_sites", "alpha"});
      if (auto v = sec.get_optional<std::string>("epsilon")) cfg.sweep.epsilon = list_of<double>("sweep.epsilon", *v, to_number);
      if (auto v = sec.get_optional<std::string>("seeds"))
        cfg.sweep.seeds = list_of<std::uint64_t>("sweep.seeds", *v, to_integer);
      if (auto v = sec.get_optional<std::string>("n_sites")) cfg.sweep.n_sites = list_of<int>("sweep.n_sites", *v, to_integer);
      if (auto v = sec.get_optional<std::string>("alpha")) cfg.sweep.alpha = list_of<double>("sweep.alpha", *v, to_number);
    } else if (name.rfind("scenario.", 0) == 0 && name.size() > 9) {
      cfg.scenarios.push_back(parse_scenario(name.substr(9), sec));
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  for (const auto& s : cfg.verify_suites) {
    const auto& all = all_verify_suites();
    if (std::find(all.begin(), all.end(), s) == all.end()) throw ConfigError("unknown verify suite '" + s + "'");
  }
  return cfg;
}

}  // namespace

const std::vector<std::string>& flow_option_keys() { return kFlowKeysList; }

void apply_flow_override(FlowOptions& f, const std::string& key, const std::string& value) {
  const std::string k = "flow." + key;
  if (key == "dt_initial") f.dt_initial = to_number(k, value);
  else if (key == "dt_min") f.dt_min = to_number(k, value);
  else if (key == "max_steps") f.max_steps = to_integer(k, value);
  else if (key == "energy_backtrack") f.energy_backtrack = to_bool(k, value);
  else if (key == "stop_residual") f.stop_residual = to_number(k, value);
  else if (key == "stop_plateau") f.stop_plateau = to_number(k, value);
  else if (key == "checkpoint_stride") f.checkpoint_stride = to_integer(k, value);
  else if (key == "seed") f.seed = static_cast<std::uint64_t>(to_integer(k, value));
  else if (key == "cluster_gap") f.spectral.cluster_gap = to_number(k, value);
  else if (key == "round_tol") f.spectral.round_tol = to_number(k, value);
  else if (key == "spread_tol") f.spectral.spread_tol = to_number(k, value);
  else if (key == "det_lo") f.det_lo = to_number(k, value);
  else if (key == "det_hi") f.det_hi = to_number(k, value);
  else if (key == "watch") f.watch = parse_watch_list(value);
  else throw ConfigError("unknown flow option '" + key + "'");
  if (f.max_steps < 0) throw ConfigError("flow.max_steps must be >= 0");
  if (f.checkpoint_stride < 1) throw ConfigError("flow.checkpoint_stride must be >= 1");
}

std::vector<Complex> parse_complex_list(const std::string& text) {
  auto unit_or_number = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return to_number("amplitude", t[0] == '+' ? t.substr(1) : t);
  };
  std::vector<Complex> out;
  for (const auto& item : split_list(text)) {
    if (item.back() != 'i') {
      out.emplace_back(to_number("amplitude", item), 0.0);
      continue;
    }
    const std::string body = item.substr(0, item.size() - 1);
    // Split at the last sign that is neither leading nor part of an exponent.
    std::size_t cut = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;)
      if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
        cut = k;
        break;
      }
    if (cut == std::string::npos)
      out.emplace_back(0.0, unit_or_number(body));
    else
      out.emplace_back(to_number("amplitude", body.substr(0, cut)), unit_or_number(body.substr(cut)));
  }
  return out;
}

std::vector<WatchItem> parse_watch_list(const std::string& text) {
  std::vector<WatchItem> out;
  for (const auto& item : split_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("watch entry '" + item + "' must be alpha:shift");
    WatchItem w{to_number("flow.watch", item.substr(0, colon)), to_number("flow.watch", item.substr(colon + 1))};
    if (!(w.alpha >= 1.0)) throw ConfigError("watch alpha must be >= 1");
    out.push_back(w);
  }
  return out;
}

RunConfig parse_config_string(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_tree(tree);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

}  // namespace ymh
