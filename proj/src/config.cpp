#include "scramble/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "scramble/errors.hpp"
#include "scramble/format.hpp"

namespace scramble {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ValidationError(field + ": " + why);
}

template <class T>
T parse_integer(const std::string& field, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) fail(field, "expected an integer, got '" + t + "'");
  return value;
}

double parse_real(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument("x");
    return v;
  } catch (const std::exception&) {
    fail(field, "expected a number, got '" + t + "'");
  }
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail(field, "expected true or false, got '" + t + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& field, const std::string& text, F item) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (trim(tok).empty()) fail(field, "empty list element");
    out.push_back(item(field, tok));
  }
  if (out.empty()) fail(field, "expected a comma-separated list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& field, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"kind", [](auto& c, auto&, auto& v) { c.kind = parse_experiment_kind(trim(v)); }},
      {"seed", [](auto& c, auto& f, auto& v) { c.seed = parse_integer<std::uint64_t>(f, v); }},
      {"workers", [](auto& c, auto& f, auto& v) { c.workers = parse_integer<unsigned>(f, v); }},
      {"out", [](auto& c, auto&, auto& v) { c.out_dir = trim(v); }},
      {"plots", [](auto& c, auto& f, auto& v) { c.plots = parse_bool(f, v); }},

      {"graph.family", [](auto& c, auto&, auto& v) { c.graph.family = trim(v); }},
      {"graph.depth", [](auto& c, auto& f, auto& v) { c.graph.depth = parse_integer<int>(f, v); }},
      {"graph.z", [](auto& c, auto& f, auto& v) { c.graph.z = parse_integer<int>(f, v); }},
      {"graph.dims", [](auto& c, auto& f, auto& v) { c.graph.dims = parse_list<int>(f, v, parse_integer<int>); }},
      {"graph.m", [](auto& c, auto& f, auto& v) { c.graph.m = parse_integer<int>(f, v); }},
      {"graph.n", [](auto& c, auto& f, auto& v) { c.graph.n = parse_integer<int>(f, v); }},
      {"graph.file", [](auto& c, auto&, auto& v) { c.graph.file = trim(v); }},
      {"graph.allow_disconnected", [](auto& c, auto& f, auto& v) { c.graph.allow_disconnected = parse_bool(f, v); }},

      {"chain.d", [](auto& c, auto& f, auto& v) { c.d = parse_integer<int>(f, v); }},
      {"chain.schedule",
       [](auto& c, auto& f, auto& v) {
         try {
           c.schedule = parse_schedule_kind(trim(v));
         } catch (const ValidationError& e) {
           fail(f, e.what());
         }
       }},
      {"chain.x", [](auto& c, auto&, auto& v) { c.x = trim(v); }},
      {"chain.y", [](auto& c, auto&, auto& v) { c.y = trim(v); }},
      {"chain.num_traj", [](auto& c, auto& f, auto& v) { c.num_traj = parse_integer<std::size_t>(f, v); }},
      {"chain.horizon", [](auto& c, auto& f, auto& v) { c.horizon = parse_real(f, v); }},
      {"chain.horizon_factor", [](auto& c, auto& f, auto& v) { c.horizon_factor = parse_real(f, v); }},
      {"chain.sample_intervals", [](auto& c, auto& f, auto& v) { c.sample_intervals = parse_integer<std::size_t>(f, v); }},
      {"chain.threshold_fraction", [](auto& c, auto& f, auto& v) { c.threshold_fraction = parse_real(f, v); }},

      {"cut.side_a", [](auto& c, auto&, auto& v) { c.cut = trim(v); }},

      {"scaling.parameter", [](auto& c, auto&, auto& v) { c.scaling_parameter = trim(v); }},
      {"scaling.values", [](auto& c, auto& f, auto& v) { c.scaling_values = parse_list<int>(f, v, parse_integer<int>); }},
      {"scaling.model",
       [](auto& c, auto& f, auto& v) {
         try {
           c.scaling_model = parse_scaling_model(trim(v));
         } catch (const ValidationError& e) {
           fail(f, e.what());
         }
       }},
      {"scaling.axis", [](auto& c, auto&, auto& v) { c.scaling_axis = trim(v); }},

      {"oracle.circuit_samples", [](auto& c, auto& f, auto& v) { c.circuit_samples = parse_integer<std::size_t>(f, v); }},
      {"oracle.num_gates", [](auto& c, auto& f, auto& v) { c.num_gates = parse_integer<std::size_t>(f, v); }},
      {"oracle.entropy_circuits", [](auto& c, auto& f, auto& v) { c.entropy_circuits = parse_integer<std::size_t>(f, v); }},
      {"oracle.entropy_gates", [](auto& c, auto& f, auto& v) { c.entropy_gates = parse_integer<std::size_t>(f, v); }},

      {"schedule_compare.gate_count_targets",
       [](auto& c, auto& f, auto& v) { c.gate_count_targets = parse_list<double>(f, v, parse_real); }},
  };
  return table;
}

void apply(ExperimentConfig& config, const std::string& field, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(field);
  if (it == table.end()) fail(field, "unknown key");
  it->second(config, field, value);
}

bool is_uint(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::otoc: return "otoc";
    case ExperimentKind::ent_bound: return "ent_bound";
    case ExperimentKind::oracle_verify: return "oracle_verify";
    case ExperimentKind::scaling_suite: return "scaling_suite";
    case ExperimentKind::schedule_compare: return "schedule_compare";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::otoc, ExperimentKind::ent_bound, ExperimentKind::oracle_verify,
                 ExperimentKind::scaling_suite, ExperimentKind::schedule_compare}) {
    if (to_string(k) == name) return k;
  }
  fail("kind", "unknown experiment kind '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig config;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      apply(config, key, node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) {
      if (!leaf.empty()) fail(key + "." + sub, "nested sections are not supported");
      apply(config, key + "." + sub, leaf.data());
    }
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(item, "override must look like section.key=value");
    apply(config, trim(item.substr(0, eq)), item.substr(eq + 1));
  }
  validate_config(config);
  return config;
}

void validate_config(const ExperimentConfig& c) {
  static const std::set<std::string> families{"binary_tree", "zary_tree", "lattice", "dumbbell",
                                              "complete", "star", "file"};
  if (!families.contains(c.graph.family)) fail("graph.family", "unknown family '" + c.graph.family + "'");
  if (c.graph.depth < 0) fail("graph.depth", "must be non-negative");
  if (c.graph.z < 2) fail("graph.z", "must be at least 2");
  if (c.graph.dims.empty()) fail("graph.dims", "needs at least one dimension");
  for (int side : c.graph.dims) {
    if (side < 1) fail("graph.dims", "side lengths must be at least 1");
  }
  if (c.graph.m < 2) fail("graph.m", "must be at least 2");
  if (c.graph.n < 2) fail("graph.n", "must be at least 2");
  if (c.graph.family == "file" && c.graph.file.empty()) fail("graph.file", "required when graph.family = file");

  if (c.d < 2) fail("chain.d", "must be at least 2");
  if (c.x != "farthest_pair" && !is_uint(c.x)) fail("chain.x", "expected farthest_pair or a vertex index");
  if (c.y != "farthest_pair" && !is_uint(c.y)) fail("chain.y", "expected farthest_pair or a vertex index");
  if (c.num_traj < 1) fail("chain.num_traj", "must be at least 1");
  if (c.horizon && !(*c.horizon > 0.0)) fail("chain.horizon", "must be positive");
  if (!(c.horizon_factor > 0.0)) fail("chain.horizon_factor", "must be positive");
  if (c.sample_intervals < 1) fail("chain.sample_intervals", "must be at least 1");
  if (c.threshold_fraction && !(*c.threshold_fraction > 0.0 && *c.threshold_fraction < 1.0)) {
    fail("chain.threshold_fraction", "must lie in (0, 1)");
  }
  if (c.cut.empty()) fail("cut.side_a", "must not be empty");
  if (c.cut != "auto" && c.cut != "tree_left_subtree" && c.cut != "dumbbell_half" && c.cut != "lattice_half") {
    parse_list<int>("cut.side_a", c.cut, [](const std::string& f, const std::string& v) {
      const int value = parse_integer<int>(f, v);
      if (value < 0) fail(f, "vertex indices must be non-negative");
      return value;
    });
  }

  static const std::set<std::string> params{"depth", "m", "n", "side"};
  if (!params.contains(c.scaling_parameter)) fail("scaling.parameter", "expected depth, m, n or side");
  if (c.scaling_axis != "parameter" && c.scaling_axis != "vertices") {
    fail("scaling.axis", "expected parameter or vertices");
  }
  if (c.kind == ExperimentKind::scaling_suite && c.scaling_values.size() < 4) {
    fail("scaling.values", "a scaling fit needs at least 4 family points");
  }
  if (c.circuit_samples < 2) fail("oracle.circuit_samples", "must be at least 2");
  if (c.num_gates < 1) fail("oracle.num_gates", "must be at least 1");
  for (double t : c.gate_count_targets) {
    if (!(t > 0.0)) fail("schedule_compare.gate_count_targets", "values must be positive");
  }
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "kind = " << to_string(c.kind) << '\n'
      << "seed = " << c.seed << '\n'
      << "workers = " << c.workers << '\n'
      << "out = " << c.out_dir << '\n'
      << "plots = " << (c.plots ? "true" : "false") << "\n\n";
  out << "[graph]\n"
      << "family = " << c.graph.family << '\n'
      << "depth = " << c.graph.depth << '\n'
      << "z = " << c.graph.z << '\n'
      << "dims = " << join(c.graph.dims) << '\n'
      << "m = " << c.graph.m << '\n'
      << "n = " << c.graph.n << '\n';
  if (!c.graph.file.empty()) out << "file = " << c.graph.file << '\n';
  out << "allow_disconnected = " << (c.graph.allow_disconnected ? "true" : "false") << "\n\n";
  out << "[chain]\n"
      << "d = " << c.d << '\n'
      << "schedule = " << to_string(c.schedule) << '\n'
      << "x = " << c.x << '\n'
      << "y = " << c.y << '\n'
      << "num_traj = " << c.num_traj << '\n';
  if (c.horizon) out << "horizon = " << format_double(*c.horizon) << '\n';
  out << "horizon_factor = " << format_double(c.horizon_factor) << '\n'
      << "sample_intervals = " << c.sample_intervals << '\n';
  if (c.threshold_fraction) out << "threshold_fraction = " << format_double(*c.threshold_fraction) << '\n';
  out << "\n[cut]\nside_a = " << c.cut << "\n\n";
  out << "[scaling]\n"
      << "parameter = " << c.scaling_parameter << '\n'
      << "values = " << join(c.scaling_values) << '\n'
      << "model = " << to_string(c.scaling_model) << '\n'
      << "axis = " << c.scaling_axis << "\n\n";
  out << "[oracle]\n"
      << "circuit_samples = " << c.circuit_samples << '\n'
      << "num_gates = " << c.num_gates << '\n'
      << "entropy_circuits = " << c.entropy_circuits << '\n'
      << "entropy_gates = " << c.entropy_gates << "\n\n";
  out << "[schedule_compare]\n"
      << "gate_count_targets = " << join(c.gate_count_targets) << '\n';
  return out.str();
}

}  // namespace scramble
