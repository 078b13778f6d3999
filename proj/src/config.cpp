// SPDX-License-Identifier: Apache-2.0
#include "qdc/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

namespace {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"name"}},
      {"topology",
       {"kind", "racks", "qpus_per_rack", "data_qubits", "buffer_qubits", "comm_qubits",
        "edge_weight", "bsms_per_tor", "file"}},
      {"workload", {"benchmark", "qubits", "iterations", "demand_file"}},
      {"scheduler",
       {"strategy", "lookahead", "threshold", "distill_k", "split", "reservation", "auto_retry"}},
      {"model",
       {"t_in_rack", "t_reconfig", "t_cross_rack", "f_in_rack", "f_cross_rack", "mode", "tau0",
        "seed"}},
      {"output", {"dir"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto value = sec->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return trim(*value);
  }

  std::string text(const std::string& section, const std::string& key, std::string fallback) const {
    return raw(section, key).value_or(std::move(fallback));
  }

  long integer(const std::string& section, const std::string& key, long fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const long out = std::stol(*v, &used);
      if (used == v->size()) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("[{}] {}: expected an integer, got '{}'", section, key, *v));
  }

  double real(const std::string& section, const std::string& key, double fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const double out = std::stod(*v, &used);
      if (used == v->size()) return out;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("[{}] {}: expected a number, got '{}'", section, key, *v));
  }

  double duration(const std::string& section, const std::string& key, double fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      return parse_duration_ms(*v);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("[{}] {}: {}", section, key, e.what()));
    }
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(fmt::format("[{}] {}: expected true or false, got '{}'", section, key, *v));
  }

 private:
  const ptree& tree_;
};

template <typename F>
auto field(const std::string& section, const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind("[", 0) == 0) throw;
    throw ConfigError(fmt::format("[{}] {}: {}", section, key, what));
  }
}

int narrow(long v, const std::string& section, const std::string& key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("[{}] {}: {} is out of range", section, key, v));
  return static_cast<int>(v);
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

double parse_duration_ms(const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("'{}' is not a duration", text));
  }
  const std::string unit = trim(t.substr(used));
  if (unit.empty() || unit == "ms") return value;
  if (unit == "us") return value / 1000.0;
  if (unit == "s") return value * 1000.0;
  throw ConfigError(fmt::format("unknown time unit '{}' (use ms, us or s)", unit));
}

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.message(), static_cast<int>(e.line()));
  }
  const auto& known = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    if (body.empty() && !body.data().empty())
      throw ConfigError(fmt::format("key '{}' outside of any section", section));
    for (const auto& [key, value] : body)
      if (!it->second.count(key))
        throw ConfigError(fmt::format("[{}] unknown key '{}'", section, key));
  }

  const Reader r(tree);
  ExperimentConfig c;
  c.name = r.text("experiment", "name", c.name);

  auto& t = c.topology;
  t.kind = field("topology", "kind", [&] {
    return parse_topology_kind(r.text("topology", "kind", std::string(to_string(t.kind))));
  });
  t.racks = narrow(r.integer("topology", "racks", t.racks), "topology", "racks");
  t.qpus_per_rack =
      narrow(r.integer("topology", "qpus_per_rack", t.qpus_per_rack), "topology", "qpus_per_rack");
  t.qpu.data_qubits =
      narrow(r.integer("topology", "data_qubits", t.qpu.data_qubits), "topology", "data_qubits");
  t.qpu.buffer_qubits = narrow(r.integer("topology", "buffer_qubits", t.qpu.buffer_qubits),
                               "topology", "buffer_qubits");
  t.qpu.comm_qubits =
      narrow(r.integer("topology", "comm_qubits", t.qpu.comm_qubits), "topology", "comm_qubits");
  t.edge_weight =
      narrow(r.integer("topology", "edge_weight", t.edge_weight), "topology", "edge_weight");
  t.bsms_per_tor =
      narrow(r.integer("topology", "bsms_per_tor", t.bsms_per_tor), "topology", "bsms_per_tor");
  t.file = resolve(r.text("topology", "file", ""), base_dir);

  auto& w = c.workload;
  if (auto b = r.raw("workload", "benchmark"))
    w.benchmark = field("workload", "benchmark", [&] { return parse_benchmark_kind(*b); });
  w.qubits = narrow(r.integer("workload", "qubits", w.qubits), "workload", "qubits");
  w.iterations = narrow(r.integer("workload", "iterations", w.iterations), "workload", "iterations");
  w.demand_file = resolve(r.text("workload", "demand_file", ""), base_dir);
  if (w.benchmark.has_value() == !w.demand_file.empty())
    throw ConfigError("[workload] set exactly one of 'benchmark' and 'demand_file'");
  if (w.benchmark && w.qubits < 2)
    throw ConfigError(fmt::format("[workload] qubits: need at least 2 (got {})", w.qubits));
  if (w.iterations < 1)
    throw ConfigError(fmt::format("[workload] iterations: must be >= 1 (got {})", w.iterations));

  auto& s = c.scheduler;
  s.strategy = field("scheduler", "strategy", [&] {
    return parse_strategy(r.text("scheduler", "strategy", std::string(to_string(s.strategy))));
  });
  s.lookahead = narrow(r.integer("scheduler", "lookahead", s.lookahead), "scheduler", "lookahead");
  s.threshold = narrow(r.integer("scheduler", "threshold", s.threshold), "scheduler", "threshold");
  s.distill_k = narrow(r.integer("scheduler", "distill_k", s.distill_k), "scheduler", "distill_k");
  s.split_enabled = r.flag("scheduler", "split", s.split_enabled);
  s.reservation = r.flag("scheduler", "reservation", s.reservation);
  s.auto_retry = r.flag("scheduler", "auto_retry", s.auto_retry);
  field("scheduler", "", [&] { s.validate(); return 0; });

  auto& l = c.latency;
  l.t_in_rack = r.duration("model", "t_in_rack", l.t_in_rack);
  l.t_reconfig = r.duration("model", "t_reconfig", l.t_reconfig);
  l.t_cross_rack = r.duration("model", "t_cross_rack", l.t_cross_rack);
  l.tau0 = r.duration("model", "tau0", l.tau0);
  const std::string mode = r.text("model", "mode", "deterministic");
  if (mode != "deterministic" && mode != "stochastic")
    throw ConfigError(fmt::format("[model] mode: expected deterministic or stochastic, got '{}'", mode));
  l.stochastic = mode == "stochastic";
  const long seed = r.integer("model", "seed", static_cast<long>(l.seed));
  if (seed < 0) throw ConfigError("[model] seed: must be >= 0");
  l.seed = static_cast<std::uint64_t>(seed);
  field("model", "latency", [&] { l.validate(); return 0; });

  auto& f = c.fidelity;
  f.f_in_rack = r.real("model", "f_in_rack", f.f_in_rack);
  f.f_cross_rack = r.real("model", "f_cross_rack", f.f_cross_rack);
  field("model", "fidelity", [&] { f.validate(); return 0; });

  c.output_dir = resolve(r.text("output", "dir", c.output_dir), base_dir);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  const fs::path p(path);
  ExperimentConfig c = parse_config(in, p.parent_path().empty() ? "." : p.parent_path().string());
  if (c.name == "experiment") c.name = p.stem().string();
  if (const char* env = std::getenv("QDCSIM_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      c.latency.seed = seed;
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("QDCSIM_SEED: expected a nonnegative integer, got '{}'", env));
    }
  }
  return c;
}

NetworkTopology make_topology(const ExperimentConfig& config) {
  const auto& t = config.topology;
  if (!t.file.empty()) return parse_topology_file(t.file);
  const int bsms = t.bsms_per_tor < 0 ? 2 * t.qpus_per_rack : t.bsms_per_tor;
  return build_topology(t.kind, t.racks, t.qpus_per_rack, t.qpu, t.edge_weight, bsms);
}

std::vector<EprDemand> make_workload(const ExperimentConfig& config,
                                     const NetworkTopology& topology) {
  const auto& w = config.workload;
  std::vector<EprDemand> demands;
  if (w.benchmark)
    demands = generate_benchmark(*w.benchmark, w.qubits, w.iterations,
                                 place_qubits(w.qubits, topology));
  else
    demands = parse_demand_file(w.demand_file);
  validate_demands(demands, topology);
  return demands;
}

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"buffer_size",    "lookahead",       "comm_qubits",
                                             "cross_latency",  "in_rack_latency", "cross_fidelity",
                                             "distill_k"};
  return axes;
}

std::vector<std::string> parse_sweep_values(const std::string& text) {
  std::vector<std::string> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    long lo = 0;
    long hi = 0;
    try {
      std::size_t u1 = 0;
      std::size_t u2 = 0;
      const std::string a = trim(text.substr(0, dots));
      const std::string b = trim(text.substr(dots + 2));
      lo = std::stol(a, &u1);
      hi = std::stol(b, &u2);
      if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("bad value range '{}' (use lo..hi)", text));
    }
    if (hi < lo) throw ConfigError(fmt::format("empty value range '{}'", text));
    for (long v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (item.empty()) throw ConfigError(fmt::format("empty entry in value list '{}'", text));
    out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void apply_axis(ExperimentConfig& config, const std::string& axis, const std::string& value) {
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end())
    throw ConfigError(fmt::format("unknown sweep axis '{}'", axis));
  auto as_int = [&] {
    try {
      std::size_t used = 0;
      const int v = std::stoi(value, &used);
      if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("axis {}: '{}' is not an integer", axis, value));
  };
  auto as_real = [&] {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("axis {}: '{}' is not a number", axis, value));
  };
  auto needs_generator = [&] {
    if (!config.topology.file.empty())
      throw ConfigError(fmt::format("axis {} does not apply to a topology file", axis));
  };
  if (axis == "buffer_size") {
    needs_generator();
    config.topology.qpu.buffer_qubits = as_int();
  } else if (axis == "comm_qubits") {
    needs_generator();
    config.topology.qpu.comm_qubits = as_int();
  } else if (axis == "lookahead") {
    config.scheduler.lookahead = as_int();
  } else if (axis == "distill_k") {
    config.scheduler.distill_k = as_int();
  } else if (axis == "cross_latency") {
    config.latency.t_cross_rack = parse_duration_ms(value);
  } else if (axis == "in_rack_latency") {
    config.latency.t_in_rack = parse_duration_ms(value);
  } else if (axis == "cross_fidelity") {
    config.fidelity.f_cross_rack = as_real();
  }
  try {
    config.scheduler.validate();
    config.latency.validate();
    config.fidelity.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("axis {} = {}: {}", axis, value, e.what()));
  }
}

}  // namespace qdc
