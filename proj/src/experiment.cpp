#include "scramble/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "scramble/chain.hpp"
#include "scramble/errors.hpp"
#include "scramble/estimators.hpp"
#include "scramble/format.hpp"
#include "scramble/oracle.hpp"
#include "scramble/parallel.hpp"
#include "scramble/svg.hpp"

#ifndef SCRAMBLE_BUILD_ID
#define SCRAMBLE_BUILD_ID "unknown"
#endif

namespace scramble {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr int kSchemaVersion = 1;

Json graph_summary(const Graph& g, const GraphSpec& spec, int d) {
  Json j;
  j["family"] = spec.family;
  j["vertices"] = g.num_vertices();
  j["edges"] = g.num_edges();
  j["diameter"] = diameter(g);
  j["max_degree"] = g.max_degree();
  j["degree_bound_d2"] = satisfies_degree_bound(g, d);
  return j;
}

Json parsed(const std::string& text) { return Json::parse(text); }

std::string times_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
    out << '\n';
  }
  return out.str();
}

PlotSeries curve_series(const SaturationCurve& c, const std::string& label) {
  PlotSeries s;
  s.label = label;
  s.x = c.times;
  s.y = c.estimates;
  s.err = c.std_errors;
  return s;
}

PlotSeries flat_series(double x0, double x1, double y, const std::string& label) {
  PlotSeries s;
  s.label = label;
  s.x = {x0, x1};
  s.y = {y, y};
  s.dashed = true;
  return s;
}

struct TauMeasurement {
  OccupancyRun run;
  SaturationResult tau;
  double horizon = 0.0;
};

// Doubles the horizon up to `extensions` times while the crossing is censored.
TauMeasurement measure_tau(const Graph& g, int d, Vertex x, Vertex y, ScheduleKind kind, double horizon,
                           std::size_t intervals, std::size_t num_traj, std::optional<double> fraction,
                           const RngPolicy& policy, unsigned workers, int extensions) {
  const ChainParams params(d);
  for (;;) {
    const auto times = uniform_sample_times(horizon, intervals);
    TauMeasurement m;
    m.horizon = horizon;
    m.run = run_occupancy(g, params, x, y, Schedule::of_kind(kind, horizon), times, num_traj, policy, workers);
    m.tau = tau_otoc(m.run.curve, d, g.num_vertices(), fraction);
    if (!m.tau.censored || extensions-- <= 0) return m;
    horizon *= 2.0;
  }
}

Json first_hit_summary(const std::vector<std::optional<double>>& hits) {
  std::vector<double> h;
  for (const auto& v : hits) {
    if (v) h.push_back(*v);
  }
  Json j;
  j["fraction_hit"] = hits.empty() ? 0.0 : static_cast<double>(h.size()) / hits.size();
  if (h.empty()) {
    j["mean"] = nullptr;
    j["min"] = nullptr;
    return j;
  }
  j["mean"] = std::accumulate(h.begin(), h.end(), 0.0) / h.size();
  j["min"] = *std::min_element(h.begin(), h.end());
  return j;
}

std::string first_hits_csv(const std::vector<std::optional<double>>& hits) {
  std::ostringstream out;
  out << "trajectory,first_hit\n";
  for (std::size_t k = 0; k < hits.size(); ++k) {
    out << k << ',';
    if (hits[k]) out << format_double(*hits[k]);
    out << '\n';
  }
  return out.str();
}

// Bound curve from the gate schedule alone: the crossing count does not
// depend on gate outcomes.
SaturationCurve ent_bound_mc(const Graph& g, const Cut& cut, int d, const Schedule& schedule,
                             std::span<const double> times, std::size_t num_traj, const RngPolicy& policy,
                             unsigned workers) {
  std::vector<std::vector<double>> values(num_traj);
  parallel_for(num_traj, workers, [&](std::size_t k) {
    Rng rng = policy.stream(k);
    EventStream stream(g, schedule, rng);
    Trajectory t;
    t.has_event_log = true;
    t.horizon = schedule.horizon(g);
    GateEvent ev;
    while (stream.next(ev)) {
      const Edge& e = g.edge(ev.edge);
      t.events.push_back({ev.time, e.u, e.v, Outcome::II});
    }
    t.num_events = t.events.size();
    values[k] = ent_bound_values(t, cut, d, times);
  });
  SaturationCurve c;
  c.observable = "ent_bound";
  c.times.assign(times.begin(), times.end());
  c.num_traj = num_traj;
  for (std::size_t s = 0; s < times.size(); ++s) {
    double sum = 0.0, sq = 0.0;
    for (const auto& v : values) {
      sum += v[s];
      sq += v[s] * v[s];
    }
    const double n = static_cast<double>(num_traj);
    const double mean = sum / n;
    const double var = num_traj > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) : 0.0;
    c.estimates.push_back(mean);
    c.std_errors.push_back(std::sqrt(var / n));
  }
  return c;
}

Json base_report(std::string_view kind) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["build_id"] = build_id();
  j["kind"] = kind;
  return j;
}

Report finish(OutputDir& out, Json report, Clock::time_point start, int code, std::string summary) {
  report["exit_code"] = code;
  report["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  Json manifest = Json::array();
  for (const auto& f : out.files()) manifest.push_back(f);
  manifest.push_back("report.json");
  report["manifest"] = manifest;
  Report r;
  r.exit_code = code;
  r.out_dir = out.root();
  r.json = report.dump(2) + "\n";
  out.write("report.json", r.json);
  r.manifest = out.files();
  r.summary = std::move(summary);
  return r;
}

std::vector<Vertex> lattice_half(const GraphSpec& spec) {
  if (spec.dims.empty() || spec.dims.front() < 2) {
    throw ValidationError("cut.side_a: lattice_half needs a first dimension of at least 2");
  }
  std::size_t stride = 1;
  for (std::size_t i = 1; i < spec.dims.size(); ++i) stride *= static_cast<std::size_t>(spec.dims[i]);
  const std::size_t rows = static_cast<std::size_t>(spec.dims.front() / 2);
  std::vector<Vertex> side(rows * stride);
  std::iota(side.begin(), side.end(), Vertex{0});
  return side;
}

// ---------------------------------------------------------------------------

Report run_otoc(const ExperimentConfig& cfg, OutputDir& out, Clock::time_point start) {
  const Graph g = build_graph(cfg.graph);
  const auto [x, y] = resolve_pair(g, cfg.x, cfg.y);
  const double horizon = resolve_horizon(g, cfg);
  const RngPolicy policy{cfg.seed};
  const auto m = measure_tau(g, cfg.d, x, y, cfg.schedule, horizon, cfg.sample_intervals, cfg.num_traj,
                             cfg.threshold_fraction, policy, cfg.workers, 0);
  const SaturationCurve otoc = otoc_curve_from_occupancy(m.run.curve, cfg.d);

  out.write("occupancy.csv", curve_to_csv(m.run.curve));
  out.write("otoc.csv", curve_to_csv(otoc));
  out.write("first_hits.csv", first_hits_csv(m.run.first_hits));
  if (cfg.plots) {
    PlotOptions po{"OTOC between " + std::to_string(x) + " and " + std::to_string(y), "time", "OTOC"};
    out.write("otoc.svg", svg_plot({curve_series(otoc, "OTOC"),
                                    flat_series(0, m.horizon, m.tau.threshold, "saturation threshold"),
                                    flat_series(0, m.horizon, m.tau.equilibrium, "equilibrium")},
                                   po));
  }

  Json report = base_report("otoc");
  report["config"] = echo_config(cfg);
  Json& res = report["results"];
  res["graph"] = graph_summary(g, cfg.graph, cfg.d);
  res["x"] = x;
  res["y"] = y;
  res["distance"] = distance(g, x, y);
  res["horizon"] = m.horizon;
  res["num_traj"] = cfg.num_traj;
  res["occupancy_equilibrium"] = equilibrium_occupancy(cfg.d, g.num_vertices());
  res["tau_otoc"] = parsed(result_to_json(m.tau));
  res["first_hit"] = first_hit_summary(m.run.first_hits);
  const double at_tau = m.tau.threshold;
  const FidelityBound fb = decoding_fidelity_bound(at_tau, cfg.d);
  res["decoding_fidelity_bound_at_tau"] = {{"otoc", at_tau}, {"d_a", cfg.d}, {"value", fb.value}, {"capped", fb.capped}};

  std::ostringstream summary;
  summary << "tau_otoc = " << format_double(m.tau.tau) << " (ci " << format_double(m.tau.ci_low) << " .. "
          << format_double(m.tau.ci_high) << ")" << (m.tau.censored ? " censored" : "") << '\n';
  return finish(out, std::move(report), start, exit_code::ok, summary.str());
}

Report run_ent_bound(const ExperimentConfig& cfg, OutputDir& out, Clock::time_point start) {
  const Graph g = build_graph(cfg.graph);
  const Cut cut = resolve_cut(g, cfg.graph, cfg.cut);
  const double horizon = resolve_horizon(g, cfg);
  const auto times = uniform_sample_times(horizon, cfg.sample_intervals);
  const Schedule schedule = Schedule::of_kind(cfg.schedule, horizon);
  const SaturationCurve curve = ent_bound_mc(g, cut, cfg.d, schedule, times, cfg.num_traj, RngPolicy{cfg.seed}, cfg.workers);
  const double fraction = cfg.threshold_fraction.value_or(default_threshold_fraction(cfg.d));
  const double saturation = static_cast<double>(cut.smaller_side()) * std::log(static_cast<double>(cfg.d));
  const SaturationResult crossing = tau_from_curve(curve, saturation, fraction);
  const double bound = tau_ent_lower_bound(g, cut, cfg.d, cfg.threshold_fraction);

  out.write("ent_bound.csv", curve_to_csv(curve));
  if (cfg.plots) {
    PlotOptions po{"Entropy bound across the cut", "time", "bound on S (nats)"};
    out.write("ent_bound.svg", svg_plot({curve_series(curve, "mean bound"),
                                         flat_series(0, horizon, fraction * saturation, "threshold")},
                                        po));
  }

  Json report = base_report("ent_bound");
  report["config"] = echo_config(cfg);
  Json& res = report["results"];
  res["graph"] = graph_summary(g, cfg.graph, cfg.d);
  res["cut"] = {{"size_a", cut.size_a()}, {"size_b", cut.size_b()}, {"crossing_edges", cut_size(g, cut)}};
  res["saturation_value_nats"] = saturation;
  res["threshold_fraction"] = fraction;
  res["tau_ent_lower_bound"] = bound;
  res["bound_curve_crossing"] = parsed(result_to_json(crossing));

  std::ostringstream summary;
  summary << "tau_ent >= " << format_double(bound) << " (crossing count bound reaches threshold at "
          << format_double(crossing.tau_point) << ")\n";
  return finish(out, std::move(report), start, exit_code::ok, summary.str());
}

Report run_schedule_compare(const ExperimentConfig& cfg, OutputDir& out, Clock::time_point start) {
  const Graph g = build_graph(cfg.graph);
  const auto [x, y] = resolve_pair(g, cfg.x, cfg.y);
  ScheduleComparisonOptions opt;
  opt.sample_times = uniform_sample_times(resolve_horizon(g, cfg), cfg.sample_intervals);
  opt.gate_count_targets = cfg.gate_count_targets;
  opt.workers = cfg.workers;
  const auto cmp = schedule_equivalence_report(g, ChainParams(cfg.d), x, y, cfg.num_traj, RngPolicy{cfg.seed}, opt);

  out.write("schedule_compare.csv",
            times_csv({"time", "poisson", "poisson_stderr", "uniform", "uniform_stderr", "z"},
                      {cmp.poisson.times, cmp.poisson.estimates, cmp.poisson.std_errors, cmp.uniform.estimates,
                       cmp.uniform.std_errors, cmp.z_scores}));
  std::vector<double> et, tt, frac, mean;
  for (const auto& gc : cmp.gate_counts) {
    et.push_back(gc.expected);
    tt.push_back(gc.time);
    frac.push_back(gc.fraction_deviating);
    mean.push_back(gc.mean_count);
  }
  out.write("gate_counts.csv", times_csv({"expected", "time", "fraction_deviating", "mean_count"}, {et, tt, frac, mean}));
  if (cfg.plots) {
    PlotOptions po{"Occupancy of y under two schedules", "time", "P(N at y)"};
    out.write("schedule_compare.svg",
              svg_plot({curve_series(cmp.poisson, "poisson_rate_one"), curve_series(cmp.uniform, "uniform_random_edge")}, po));
  }

  Json report = base_report("schedule_compare");
  report["config"] = echo_config(cfg);
  Json& res = report["results"];
  res["graph"] = graph_summary(g, cfg.graph, cfg.d);
  res["x"] = x;
  res["y"] = y;
  res["max_abs_difference"] = cmp.max_abs_difference;
  res["max_z"] = cmp.max_z;
  Json counts = Json::array();
  for (const auto& gc : cmp.gate_counts) {
    counts.push_back({{"expected", gc.expected}, {"time", gc.time}, {"fraction_deviating", gc.fraction_deviating},
                      {"mean_count", gc.mean_count}});
  }
  res["gate_counts"] = counts;

  std::ostringstream summary;
  summary << "max |poisson - uniform| = " << format_double(cmp.max_abs_difference) << ", max z = "
          << format_double(cmp.max_z) << '\n';
  return finish(out, std::move(report), start, exit_code::ok, summary.str());
}

GraphSpec with_parameter(GraphSpec spec, const std::string& parameter, int value) {
  if (parameter == "depth") {
    spec.depth = value;
  } else if (parameter == "m") {
    spec.m = value;
  } else if (parameter == "n") {
    spec.n = value;
    if (spec.family == "lattice") spec.dims = {value};
  } else if (parameter == "side") {
    std::fill(spec.dims.begin(), spec.dims.end(), value);
  }
  return spec;
}

struct ScalingRow {
  int parameter = 0;
  std::size_t vertices = 0;
  std::uint32_t diameter = 0;
  TauMeasurement m;
  std::optional<double> ent_bound;
};

std::string scaling_rows_csv(const std::vector<ScalingRow>& rows) {
  std::ostringstream out;
  out << "parameter,vertices,diameter,tau,tau_ci_low,tau_ci_high,censored,tau_ent_lower_bound,ratio\n";
  for (const auto& r : rows) {
    out << r.parameter << ',' << r.vertices << ',' << r.diameter << ',' << format_double(r.m.tau.tau) << ','
        << format_double(r.m.tau.ci_low) << ',' << format_double(r.m.tau.ci_high) << ','
        << (r.m.tau.censored ? 1 : 0) << ',';
    if (r.ent_bound) {
      out << format_double(*r.ent_bound) << ',';
      out << (r.m.tau.tau > 0 ? format_double(*r.ent_bound / r.m.tau.tau) : std::string());
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

ScalingPoint to_point(const ScalingRow& r, bool by_vertices) {
  ScalingPoint p;
  p.n = by_vertices ? static_cast<double>(r.vertices) : static_cast<double>(r.parameter);
  p.tau = r.m.tau.tau;
  p.tau_err = 0.5 * (r.m.tau.ci_high - r.m.tau.ci_low);
  p.censored = r.m.tau.censored;
  return p;
}

PlotSeries fit_series(const ScalingFit& fit, const std::vector<ScalingPoint>& pts) {
  PlotSeries s;
  s.label = std::string(to_string(fit.model)) + " fit, R2 = " + format_double(std::round(fit.r2 * 1e4) / 1e4);
  s.dashed = true;
  const double lo = pts.front().n, hi = pts.back().n;
  for (int i = 0; i <= 50; ++i) {
    const double n = lo + (hi - lo) * i / 50.0;
    s.x.push_back(n);
    s.y.push_back(fit.predict(n));
  }
  return s;
}

PlotSeries point_series(const std::vector<ScalingPoint>& pts, const std::string& label) {
  PlotSeries s;
  s.label = label;
  s.markers = true;
  for (const auto& p : pts) {
    s.x.push_back(p.n);
    s.y.push_back(p.tau);
    s.err.push_back(p.tau_err);
  }
  return s;
}

Report run_scaling_suite(const ExperimentConfig& cfg, OutputDir& out, Clock::time_point start) {
  const RngPolicy policy{cfg.seed};
  std::vector<ScalingRow> rows;
  // Build every graph before simulating so a bad value fails fast.
  std::vector<Graph> graphs;
  std::vector<GraphSpec> specs;
  for (int v : cfg.scaling_values) {
    specs.push_back(with_parameter(cfg.graph, cfg.scaling_parameter, v));
    try {
      graphs.push_back(build_graph(specs.back()));
    } catch (const std::exception& e) {
      throw ValidationError("scaling.values: value " + std::to_string(v) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = graphs[i];
    const auto [x, y] = resolve_pair(g, cfg.x, cfg.y);
    ScalingRow row;
    row.parameter = cfg.scaling_values[i];
    row.vertices = g.num_vertices();
    row.diameter = diameter(g);
    row.m = measure_tau(g, cfg.d, x, y, cfg.schedule, resolve_horizon(g, cfg), cfg.sample_intervals, cfg.num_traj,
                        cfg.threshold_fraction, policy.fork(std::to_string(row.parameter)), cfg.workers, 0);
    try {
      row.ent_bound = tau_ent_lower_bound(g, resolve_cut(g, specs[i], cfg.cut), cfg.d, cfg.threshold_fraction);
    } catch (const ValidationError&) {
      if (cfg.cut != "auto") throw;
    }
    rows.push_back(std::move(row));
  }

  out.write("scaling_points.csv", scaling_rows_csv(rows));
  Json report = base_report("scaling_suite");
  report["config"] = echo_config(cfg);
  Json& res = report["results"];
  res["parameter"] = cfg.scaling_parameter;
  res["axis"] = cfg.scaling_axis;
  Json pts = Json::array();
  std::vector<int> censored;
  for (const auto& r : rows) {
    Json p{{"parameter", r.parameter}, {"vertices", r.vertices}, {"diameter", r.diameter},
           {"tau_otoc", parsed(result_to_json(r.m.tau))}, {"horizon", r.m.horizon}};
    p["tau_ent_lower_bound"] = r.ent_bound ? Json(*r.ent_bound) : Json(nullptr);
    pts.push_back(p);
    if (r.m.tau.censored) censored.push_back(r.parameter);
  }
  res["points"] = pts;

  if (!censored.empty()) {
    std::ostringstream msg;
    msg << "censored tau at " << cfg.scaling_parameter << " =";
    for (int c : censored) msg << ' ' << c;
    msg << "; increase chain.horizon or chain.horizon_factor";
    res["error"] = msg.str();
    return finish(out, std::move(report), start, exit_code::censored, msg.str() + "\n");
  }

  std::vector<ScalingPoint> points;
  for (const auto& r : rows) points.push_back(to_point(r, cfg.scaling_axis == "vertices"));
  const ScalingFit fit = fit_scaling(points, cfg.scaling_model);
  out.write("scaling_fit.csv", fit_to_csv(fit));
  out.write("scaling_fit.json", fit_to_json(fit));
  res["fit"] = parsed(fit_to_json(fit));
  if (cfg.plots) {
    PlotOptions po{"tau_OTOC scaling", cfg.scaling_axis == "vertices" ? "vertices" : cfg.scaling_parameter, "tau_OTOC"};
    out.write("scaling.svg", svg_plot({point_series(points, "measured"), fit_series(fit, points)}, po));
  }
  std::ostringstream summary;
  summary << to_string(fit.model) << " fit: a = " << format_double(fit.a) << ", b = " << format_double(fit.b)
          << ", c = " << format_double(fit.c) << ", R2 = " << format_double(fit.r2) << '\n';
  return finish(out, std::move(report), start, exit_code::ok, summary.str());
}

// ---------------------------------------------------------------------------

struct Table1Row {
  std::string name;
  std::string otoc_expected;
  std::string ent_expected;
  GraphSpec graph;
  std::string parameter;
  std::vector<int> values;
  std::size_t num_traj;
  double horizon_factor;
  ScalingModel otoc_model;
};

std::vector<Table1Row> table1_rows(Table1Profile profile) {
  GraphSpec tree;
  tree.family = "binary_tree";
  GraphSpec ztree;
  ztree.family = "zary_tree";
  ztree.z = 8;
  GraphSpec line;
  line.family = "lattice";
  line.dims = {8};
  GraphSpec grid;
  grid.family = "lattice";
  grid.dims = {4, 4};
  GraphSpec bell;
  bell.family = "dumbbell";

  switch (profile) {
    case Table1Profile::smoke:
      return {
          {"binary_tree", "log n", "n", tree, "depth", {2, 3, 4, 5}, 300, 4.0, ScalingModel::log},
          {"lattice_1d", "n", "n", line, "n", {4, 6, 8, 10}, 300, 4.0, ScalingModel::power},
          {"dumbbell", "log n / n", "n", bell, "m", {3, 4, 5, 6}, 300, 4.0, ScalingModel::power},
      };
    case Table1Profile::desk:
      return {
          {"lattice_1d", "n", "n", line, "n", {8, 16, 24, 32, 48, 64}, 10000, 4.0, ScalingModel::power},
          {"lattice_2d", "n^(1/2)", "n^(1/2)", grid, "side", {3, 4, 5, 6, 7, 8}, 10000, 4.0, ScalingModel::power},
          {"binary_tree", "log n", "n", tree, "depth", {3, 4, 5, 6, 7, 8, 9}, 10000, 3.0, ScalingModel::log},
          {"zary_tree_z8", "n^(1 - log d^2 / log z)", "n / z", ztree, "depth", {1, 2, 3, 4}, 2000, 4.0,
           ScalingModel::power},
          {"dumbbell", "log n / n", "n", bell, "m", {4, 8, 16, 32, 64}, 4000, 4.0, ScalingModel::power},
      };
    case Table1Profile::extended:
      return {
          {"lattice_1d", "n", "n", line, "n", {16, 32, 64, 96, 128, 192}, 40000, 4.0, ScalingModel::power},
          {"lattice_2d", "n^(1/2)", "n^(1/2)", grid, "side", {4, 6, 8, 10, 12, 16}, 40000, 4.0, ScalingModel::power},
          {"binary_tree", "log n", "n", tree, "depth", {3, 4, 5, 6, 7, 8, 9, 10, 11}, 40000, 3.0, ScalingModel::log},
          {"zary_tree_z8", "n^(1 - log d^2 / log z)", "n / z", ztree, "depth", {1, 2, 3, 4, 5}, 5000, 4.0,
           ScalingModel::power},
          {"dumbbell", "log n / n", "n", bell, "m", {4, 8, 16, 32, 64, 128}, 20000, 4.0, ScalingModel::power},
      };
  }
  return {};
}

std::string fit_text(const ScalingFit& f) {
  char buf[128];
  switch (f.model) {
    case ScalingModel::log:
      std::snprintf(buf, sizeof buf, "%.3g log n %+.3g (R2 %.3f)", f.a, f.c, f.r2);
      break;
    case ScalingModel::power:
      std::snprintf(buf, sizeof buf, "%.3g n^%.3f (R2 %.3f)", f.a, f.b, f.r2);
      break;
    case ScalingModel::linear:
      std::snprintf(buf, sizeof buf, "%.3g n %+.3g (R2 %.3f)", f.a, f.c, f.r2);
      break;
  }
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {}

void OutputDir::write(const std::string& name, const std::string& content) {
  const std::filesystem::path rel(name);
  if (name.empty() || rel.is_absolute() || rel.has_root_name()) {
    throw ContractError("output name must be a relative path: " + name);
  }
  for (const auto& part : rel) {
    if (part == "..") throw ContractError("output name escapes the output directory: " + name);
  }
  const auto target = root_ / rel;
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream f(target, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("cannot write " + target.string());
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

std::string build_id() { return SCRAMBLE_BUILD_ID; }

Graph build_graph(const GraphSpec& s) {
  if (s.family == "binary_tree") return build_binary_tree(s.depth);
  if (s.family == "zary_tree") return build_zary_tree(s.z, s.depth);
  if (s.family == "lattice") return build_lattice(s.dims);
  if (s.family == "dumbbell") return build_dumbbell(s.m);
  if (s.family == "complete") return build_complete(s.n);
  if (s.family == "star") return build_star(s.n);
  if (s.family == "file") {
    std::ifstream in(s.file, std::ios::binary);
    if (!in) throw ValidationError("graph.file: cannot open '" + s.file + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return load_edge_list(text.str(), s.allow_disconnected);
  }
  throw ValidationError("graph.family: unknown family '" + s.family + "'");
}

std::pair<Vertex, Vertex> resolve_pair(const Graph& g, const std::string& x, const std::string& y) {
  const auto far = farthest_pair(g);
  auto pick = [&](const std::string& text, Vertex fallback, const char* field) -> Vertex {
    if (text == "farthest_pair") return fallback;
    const unsigned long v = std::stoul(text);
    if (v >= g.num_vertices()) {
      throw ValidationError(std::string(field) + ": vertex " + text + " out of range for " +
                            std::to_string(g.num_vertices()) + " vertices");
    }
    return static_cast<Vertex>(v);
  };
  const Vertex vx = pick(x, far.first, "chain.x");
  const Vertex vy = pick(y, far.second, "chain.y");
  if (distance(g, vx, vy) == kUnreachable) throw ValidationError("chain.y: not reachable from chain.x");
  return {vx, vy};
}

Cut resolve_cut(const Graph& g, const GraphSpec& spec, const std::string& cut_spec) {
  std::string kind = cut_spec;
  if (kind == "auto") {
    if (spec.family == "binary_tree" || spec.family == "zary_tree") {
      kind = "tree_left_subtree";
    } else if (spec.family == "dumbbell") {
      kind = "dumbbell_half";
    } else if (spec.family == "lattice") {
      kind = "lattice_half";
    } else {
      throw ValidationError("cut.side_a: no default cut for family '" + spec.family + "'; list the vertices");
    }
  }
  if (kind == "tree_left_subtree") {
    if (spec.family != "binary_tree" && spec.family != "zary_tree") {
      throw ValidationError("cut.side_a: tree_left_subtree needs a tree family");
    }
    if (g.num_vertices() < 2) throw ValidationError("cut.side_a: tree has no subtree");
    return Cut(g, zary_subtree(g, spec.family == "binary_tree" ? 2 : spec.z, 1));
  }
  if (kind == "dumbbell_half") {
    if (spec.family != "dumbbell") throw ValidationError("cut.side_a: dumbbell_half needs the dumbbell family");
    std::vector<Vertex> side(static_cast<std::size_t>(spec.m));
    std::iota(side.begin(), side.end(), Vertex{0});
    return Cut(g, side);
  }
  if (kind == "lattice_half") {
    if (spec.family != "lattice") throw ValidationError("cut.side_a: lattice_half needs the lattice family");
    return Cut(g, lattice_half(spec));
  }
  std::vector<Vertex> side;
  std::stringstream ss(kind);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const unsigned long v = std::stoul(tok);
    if (v >= g.num_vertices()) throw ValidationError("cut.side_a: vertex " + tok + " out of range");
    side.push_back(static_cast<Vertex>(v));
  }
  try {
    return Cut(g, side);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("cut.side_a: ") + e.what());
  }
}

double resolve_horizon(const Graph& g, const ExperimentConfig& c) {
  if (c.horizon) return *c.horizon;
  return c.horizon_factor * std::max<double>(1.0, diameter(g));
}

Report run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  if (config.kind == ExperimentKind::oracle_verify) return oracle_verify(config);
  const auto start = Clock::now();
  OutputDir out(config.out_dir);
  switch (config.kind) {
    case ExperimentKind::otoc: return run_otoc(config, out, start);
    case ExperimentKind::ent_bound: return run_ent_bound(config, out, start);
    case ExperimentKind::scaling_suite: return run_scaling_suite(config, out, start);
    case ExperimentKind::schedule_compare: return run_schedule_compare(config, out, start);
    case ExperimentKind::oracle_verify: break;
  }
  throw ContractError("unreachable experiment kind");
}

Report oracle_verify(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto start = Clock::now();
  const Graph g = build_graph(cfg.graph);
  const std::size_t V = g.num_vertices();
  const OracleLimits limits;
  hilbert_dim(cfg.d, V, limits.max_state_dim);
  if (g.num_edges() == 0) throw ValidationError("graph: oracle checks need at least one edge");
  const auto [x, y] = resolve_pair(g, cfg.x, cfg.y);
  const RngPolicy policy{cfg.seed};
  OutputDir out(cfg.out_dir);

  Json report = base_report("oracle_verify");
  report["config"] = echo_config(cfg);
  Json& res = report["results"];
  res["graph"] = graph_summary(g, cfg.graph, cfg.d);
  bool all_pass = true;
  std::ostringstream summary;

  // Mapping equivalence.
  Json mapping;
  double op_dim = 1.0;
  for (std::size_t i = 0; i < V; ++i) op_dim *= cfg.d;
  if (op_dim > static_cast<double>(limits.max_operator_dim)) {
    mapping["status"] = "skipped";
    mapping["reason"] = "operator dimension " + format_double(op_dim) + " above cap " +
                        std::to_string(limits.max_operator_dim);
  } else {
    Rng rng = policy.fork("schedule").stream(0);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(g.num_edges() - 1));
    std::vector<std::uint32_t> sequence(cfg.num_gates);
    for (auto& e : sequence) e = pick(rng);
    const MappingCheck mc = mapping_equivalence(g, cfg.d, x, y, sequence, cfg.circuit_samples, cfg.circuit_samples,
                                                policy.fork("mapping"), cfg.workers);
    std::vector<double> step(sequence.size());
    std::iota(step.begin(), step.end(), 1.0);
    out.write("mapping.csv", times_csv({"step", "oracle", "oracle_stderr", "chain", "chain_stderr", "z"},
                                       {step, mc.oracle_mean, mc.oracle_se, mc.chain_mean, mc.chain_se, mc.z}));
    const bool pass = mc.max_z <= 4.0;
    all_pass &= pass;
    Json seq = Json::array();
    for (auto e : sequence) seq.push_back({g.edge(e).u, g.edge(e).v});
    mapping = {{"status", pass ? "pass" : "fail"}, {"x", x}, {"y", y}, {"edge_sequence", seq},
               {"samples", cfg.circuit_samples}, {"max_z", mc.max_z}, {"tolerance_z", 4.0}};
    summary << "mapping equivalence: " << (pass ? "pass" : "FAIL") << " (max z " << format_double(mc.max_z) << ")\n";
  }
  res["mapping_equivalence"] = mapping;

  // Entropy increments on the configured cut, every single-vertex cut and a few random halves.
  {
    std::vector<Cut> cuts;
    try {
      cuts.push_back(resolve_cut(g, cfg.graph, cfg.cut));
    } catch (const ValidationError&) {
      if (cfg.cut != "auto") throw;
    }
    for (Vertex v = 0; v < V; ++v) cuts.emplace_back(g, std::vector<Vertex>{v});
    Rng cut_rng = policy.fork("cuts").stream(0);
    std::vector<Vertex> all(V);
    std::iota(all.begin(), all.end(), Vertex{0});
    for (int k = 0; k < 3 && V >= 4; ++k) {
      std::shuffle(all.begin(), all.end(), cut_rng);
      cuts.emplace_back(g, std::vector<Vertex>(all.begin(), all.begin() + V / 2));
    }
    std::vector<IncrementCheck> checks(cfg.entropy_circuits);
    const RngPolicy circuits = policy.fork("entropy");
    parallel_for(cfg.entropy_circuits, cfg.workers, [&](std::size_t k) {
      Rng rng = circuits.stream(k);
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(g.num_edges() - 1));
      std::vector<Edge> edges;
      for (std::size_t i = 0; i < cfg.entropy_gates; ++i) edges.push_back(g.edge(pick(rng)));
      checks[k] = check_entropy_increments(g, cfg.d, sample_circuit(cfg.d, edges, rng), cuts);
    });
    IncrementCheck total;
    for (const auto& c : checks) {
      total.gates += c.gates;
      total.checks += c.checks;
      total.violations += c.violations;
      total.max_crossing_increment = std::max(total.max_crossing_increment, c.max_crossing_increment);
      total.max_noncrossing_increment = std::max(total.max_noncrossing_increment, c.max_noncrossing_increment);
    }
    const bool pass = total.violations == 0;
    all_pass &= pass;
    res["entropy_increments"] = {{"status", pass ? "pass" : "fail"},
                                 {"circuits", cfg.entropy_circuits},
                                 {"cuts", cuts.size()},
                                 {"gates", total.gates},
                                 {"checks", total.checks},
                                 {"violations", total.violations},
                                 {"max_crossing_increment", total.max_crossing_increment},
                                 {"crossing_limit", 2.0 * std::log(static_cast<double>(cfg.d))},
                                 {"max_noncrossing_increment", total.max_noncrossing_increment}};
    summary << "entropy increments: " << (pass ? "pass" : "FAIL") << " (" << total.violations << " violations in "
            << total.checks << " checks)\n";
  }

  // Stationarity of the product measure.
  if (V > 10) {
    res["stationarity"] = {{"status", "skipped"}, {"reason", "more than 10 vertices"}};
  } else {
    const StationarityCheck sc = check_stationarity(g, ChainParams(cfg.d));
    const double eq = equilibrium_occupancy(cfg.d, V);
    double marginal_gap = 0.0;
    for (double m : sc.marginals) marginal_gap = std::max(marginal_gap, std::abs(m - eq));
    const bool pass = sc.residual_inf < 1e-12 && marginal_gap < 1e-12;
    all_pass &= pass;
    res["stationarity"] = {{"status", pass ? "pass" : "fail"},
                           {"residual_inf", sc.residual_inf},
                           {"max_marginal_gap", marginal_gap},
                           {"tolerance", 1e-12}};
    summary << "stationarity: " << (pass ? "pass" : "FAIL") << " (residual " << format_double(sc.residual_inf)
            << ")\n";
  }

  return finish(out, std::move(report), start, all_pass ? exit_code::ok : exit_code::verification_failed,
                summary.str());
}

Table1Profile parse_table1_profile(std::string_view name) {
  if (name == "smoke") return Table1Profile::smoke;
  if (name == "desk") return Table1Profile::desk;
  if (name == "extended") return Table1Profile::extended;
  throw ValidationError("profile: expected desk or extended, got '" + std::string(name) + "'");
}

std::string_view to_string(Table1Profile p) {
  switch (p) {
    case Table1Profile::smoke: return "smoke";
    case Table1Profile::desk: return "desk";
    case Table1Profile::extended: return "extended";
  }
  return "?";
}

Report reproduce_table1(const Table1Options& opt) {
  const auto start = Clock::now();
  OutputDir out(opt.out_dir);
  const RngPolicy policy{opt.seed};
  constexpr int d = 2;

  Json report = base_report("table1");
  report["profile"] = to_string(opt.profile);
  report["seed"] = opt.seed;
  Json rows_json = Json::array();
  std::ostringstream table, points_csv;
  table << "| graph | OTOC (expected) | OTOC (fitted) | entanglement bound (expected) | entanglement bound (fitted) |\n"
        << "|---|---|---|---|---|\n";
  points_csv << "row,parameter,vertices,diameter,tau,tau_ci_low,tau_ci_high,censored,tau_ent_lower_bound,cut_edges\n";
  int code = exit_code::ok;

  for (const auto& row : table1_rows(opt.profile)) {
    const RngPolicy row_policy = policy.fork(row.name);
    std::vector<ScalingPoint> otoc_pts, ent_pts;
    Json pts = Json::array();
    for (int value : row.values) {
      const GraphSpec spec = with_parameter(row.graph, row.parameter, value);
      const Graph g = build_graph(spec);
      const auto [x, y] = farthest_pair(g);
      const Cut cut = resolve_cut(g, spec, "auto");
      const double D = std::max<double>(1.0, diameter(g));
      const auto m = measure_tau(g, d, x, y, ScheduleKind::poisson_rate_one, row.horizon_factor * D, 200, row.num_traj,
                                 std::nullopt, row_policy.fork(std::to_string(value)), opt.workers, 3);
      const double ent = tau_ent_lower_bound(g, cut, d);
      const double n = static_cast<double>(g.num_vertices());
      otoc_pts.push_back({n, m.tau.tau, 0.5 * (m.tau.ci_high - m.tau.ci_low), m.tau.censored});
      ent_pts.push_back({n, ent, 0.0, false});
      points_csv << row.name << ',' << value << ',' << g.num_vertices() << ',' << diameter(g) << ','
                 << format_double(m.tau.tau) << ',' << format_double(m.tau.ci_low) << ','
                 << format_double(m.tau.ci_high) << ',' << (m.tau.censored ? 1 : 0) << ',' << format_double(ent)
                 << ',' << cut_size(g, cut) << '\n';
      pts.push_back({{"parameter", value}, {"vertices", g.num_vertices()}, {"diameter", diameter(g)},
                     {"horizon", m.horizon}, {"tau_otoc", parsed(result_to_json(m.tau))},
                     {"tau_ent_lower_bound", ent}, {"cut_edges", cut_size(g, cut)}});
    }
    Json rj{{"row", row.name}, {"parameter", row.parameter}, {"num_traj", row.num_traj},
            {"otoc_expected", row.otoc_expected}, {"ent_expected", row.ent_expected}, {"points", pts}};
    const bool censored = std::any_of(otoc_pts.begin(), otoc_pts.end(), [](const auto& p) { return p.censored; });
    std::string otoc_text = "censored; increase horizon";
    if (censored) {
      code = exit_code::censored;
      rj["otoc_fit"] = nullptr;
    } else {
      const ScalingFit f = fit_scaling(otoc_pts, row.otoc_model);
      const ScalingFit alt = fit_scaling(otoc_pts, row.otoc_model == ScalingModel::log ? ScalingModel::power
                                                                                        : ScalingModel::log);
      rj["otoc_fit"] = parsed(fit_to_json(f));
      rj["otoc_alternative_fit"] = parsed(fit_to_json(alt));
      otoc_text = fit_text(f);
      if (opt.plots) {
        PlotOptions po{row.name + ": tau_OTOC", "vertices", "tau_OTOC"};
        po.log_x = true;
        out.write(row.name + ".svg", svg_plot({point_series(otoc_pts, "measured"), fit_series(f, otoc_pts)}, po));
      }
    }
    const ScalingFit ef = fit_scaling(ent_pts, ScalingModel::power);
    rj["ent_fit"] = parsed(fit_to_json(ef));
    rows_json.push_back(rj);
    table << "| " << row.name << " | " << row.otoc_expected << " | " << otoc_text << " | " << row.ent_expected
          << " | " << fit_text(ef) << " |\n";
  }
  table << "| hyperbolic_3d | log n | not reproduced | n^(1/2) | not reproduced |\n";

  out.write("table1.md", table.str());
  out.write("table1_points.csv", points_csv.str());
  report["rows"] = rows_json;
  report["not_reproduced"] = Json::array({"hyperbolic_3d"});
  return finish(out, std::move(report), start, code, table.str());
}

}  // namespace scramble
