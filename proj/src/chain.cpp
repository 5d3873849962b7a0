#include "scramble/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "scramble/errors.hpp"
#include "scramble/format.hpp"
#include "scramble/parallel.hpp"

namespace scramble {

std::size_t LabelConfig::count_n() const noexcept {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

bool LabelConfig::any_n() const noexcept {
  return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

std::vector<Vertex> LabelConfig::n_vertices() const {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w != 0) {
      out.push_back(static_cast<Vertex>(i * 64 + std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::II: return "II";
    case Outcome::IN: return "IN";
    case Outcome::NI: return "NI";
    case Outcome::NN: return "NN";
  }
  return "?";
}

ChainParams::ChainParams(int local_dim) : d_(local_dim) {
  if (local_dim < 2) throw ValidationError("local dimension d must be at least 2");
  if (local_dim > 1 << 14) throw ValidationError("local dimension d is unreasonably large");
}

std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::poisson_rate_one: return "poisson_rate_one";
    case ScheduleKind::uniform_random_edge: return "uniform_random_edge";
    case ScheduleKind::round_robin: return "round_robin";
    case ScheduleKind::random_permutation_sweeps: return "random_permutation_sweeps";
    case ScheduleKind::fixed_sequence: return "fixed_sequence";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (auto k : {ScheduleKind::poisson_rate_one, ScheduleKind::uniform_random_edge, ScheduleKind::round_robin,
                 ScheduleKind::random_permutation_sweeps, ScheduleKind::fixed_sequence}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown schedule kind '" + std::string(name) + "'");
}

double Schedule::horizon(const Graph& g) const {
  if (kind == ScheduleKind::fixed_sequence) {
    return g.num_edges() == 0 ? 0.0 : static_cast<double>(sequence.size()) / g.num_edges();
  }
  return t_max;
}

EventStream::EventStream(const Graph& g, const Schedule& schedule, Rng& rng)
    : schedule_(schedule),
      rng_(rng),
      num_edges_(static_cast<std::uint32_t>(g.num_edges())),
      rate_(static_cast<double>(g.num_edges())),
      horizon_(schedule.horizon(g)),
      gap_(num_edges_ == 0 ? 1.0 : rate_),
      pick_(0, num_edges_ == 0 ? 0 : num_edges_ - 1) {
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) throw ContractError("schedule horizon must be finite and >= 0");
  if (schedule.kind == ScheduleKind::fixed_sequence) {
    for (auto e : schedule.sequence) {
      if (e >= num_edges_) throw ContractError("fixed schedule references edge index out of range");
    }
  }
  if (schedule.kind == ScheduleKind::random_permutation_sweeps) {
    sweep_.resize(num_edges_);
  }
}

bool EventStream::next(GateEvent& out) {
  if (num_edges_ == 0) return false;
  if (schedule_.kind == ScheduleKind::poisson_rate_one) {
    double t = time_ + gap_(rng_);
    if (t <= time_) t = std::nextafter(time_, std::numeric_limits<double>::infinity());
    if (t > horizon_) return false;
    time_ = t;
    out = {t, pick_(rng_)};
    return true;
  }

  const std::uint64_t max_steps =
      schedule_.kind == ScheduleKind::fixed_sequence
          ? schedule_.sequence.size()
          : static_cast<std::uint64_t>(std::floor(horizon_ * rate_ * (1.0 + 1e-12)));
  if (step_ >= max_steps) return false;
  const std::uint64_t k = step_++;
  out.time = static_cast<double>(k + 1) / rate_;
  switch (schedule_.kind) {
    case ScheduleKind::uniform_random_edge:
      out.edge = pick_(rng_);
      break;
    case ScheduleKind::round_robin:
      out.edge = static_cast<std::uint32_t>(k % num_edges_);
      break;
    case ScheduleKind::random_permutation_sweeps:
      if (k % num_edges_ == 0) {
        std::iota(sweep_.begin(), sweep_.end(), 0u);
        std::shuffle(sweep_.begin(), sweep_.end(), rng_);
      }
      out.edge = sweep_[k % num_edges_];
      break;
    case ScheduleKind::fixed_sequence:
      out.edge = schedule_.sequence[k];
      break;
    case ScheduleKind::poisson_rate_one:
      break;
  }
  return true;
}

Outcome step_m0(LabelConfig& state, const Edge& e, const ChainParams& params, Rng& rng) {
  if (!state.is_n(e.u) && !state.is_n(e.v)) return Outcome::II;
  std::uniform_int_distribution<std::uint32_t> draw(0, params.outcome_denominator() - 1);
  const std::uint32_t r = draw(rng);
  if (r == 0) {
    state.set(e.u, false);
    state.set(e.v, true);
    return Outcome::IN;
  }
  if (r == 1) {
    state.set(e.u, true);
    state.set(e.v, false);
    return Outcome::NI;
  }
  state.set(e.u, true);
  state.set(e.v, true);
  return Outcome::NN;
}

namespace {

void check_sample_times(std::span<const double> times, double horizon) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw ContractError("sample times must be non-negative");
    if (i > 0 && times[i] < times[i - 1]) throw ContractError("sample times must be sorted");
    if (times[i] > horizon * (1.0 + 1e-12) + 1e-12) {
      throw ContractError("sample time " + format_double(times[i]) + " lies beyond the horizon " +
                          format_double(horizon));
    }
  }
}

}  // namespace

Trajectory run_m0(const Graph& g, const ChainParams& params, Vertex x, const Schedule& schedule,
                  const RunOptions& options, Rng& rng) {
  const std::size_t n = g.num_vertices();
  if (x >= n) throw ContractError("run_m0: start vertex out of range");
  if (options.stop_when_all_hit && !options.sample_times.empty()) {
    throw ContractError("run_m0: early stop cannot be combined with sample times");
  }

  Trajectory traj;
  traj.horizon = schedule.horizon(g);
  traj.has_event_log = options.record_events;
  traj.sample_times = options.sample_times;
  traj.watch = options.watch;
  check_sample_times(traj.sample_times, traj.horizon);

  std::vector<std::int32_t> watch_slot(n, -1);
  for (std::size_t j = 0; j < traj.watch.size(); ++j) {
    if (traj.watch[j] >= n) throw ContractError("run_m0: watched vertex out of range");
    watch_slot[traj.watch[j]] = static_cast<std::int32_t>(j);
  }
  traj.first_hit.assign(traj.watch.size(), std::nullopt);
  traj.watched_labels.reserve(traj.sample_times.size() * traj.watch.size());
  if (options.record_snapshots) traj.snapshots.reserve(traj.sample_times.size());

  LabelConfig state = LabelConfig::single(n, x);
  std::size_t pending = traj.watch.size();
  if (watch_slot[x] >= 0) {
    traj.first_hit[watch_slot[x]] = 0.0;
    --pending;
  }

  std::size_t next_sample = 0;
  auto record_sample = [&] {
    for (Vertex w : traj.watch) traj.watched_labels.push_back(state.is_n(w) ? 1 : 0);
    if (options.record_snapshots) traj.snapshots.push_back(state);
    ++next_sample;
  };

  EventStream stream(g, schedule, rng);
  GateEvent ev{};
  while (stream.next(ev)) {
    while (next_sample < traj.sample_times.size() && traj.sample_times[next_sample] < ev.time) record_sample();
    const Edge& e = g.edge(ev.edge);
    const Outcome o = step_m0(state, e, params, rng);
    ++traj.num_events;
    if (options.record_events) traj.events.push_back({ev.time, e.u, e.v, o});
    if (pending > 0 && o != Outcome::II) {
      for (Vertex w : {e.u, e.v}) {
        const auto slot = watch_slot[w];
        if (slot >= 0 && !traj.first_hit[slot] && state.is_n(w)) {
          traj.first_hit[slot] = ev.time;
          --pending;
        }
      }
      if (pending == 0 && options.stop_when_all_hit) break;
    }
  }
  while (next_sample < traj.sample_times.size()) record_sample();
  return traj;
}

void retain_closest(LabelConfig& state, std::span<const std::uint32_t> distance_to_target) {
  const auto support = state.n_vertices();
  if (support.empty()) return;
  Vertex keep = support.front();
  for (Vertex v : support) {
    if (distance_to_target[v] < distance_to_target[keep]) keep = v;
  }
  for (Vertex v : support) {
    if (v != keep) state.set(v, false);
  }
}

Trajectory run_modified(const Graph& g, const ChainParams& params, Vertex x, Vertex y,
                        const Schedule& schedule, Rng& rng, const ModifiedOptions& options) {
  const std::size_t n = g.num_vertices();
  if (x >= n || y >= n) throw ContractError("run_modified: vertex out of range");
  const auto dist = bfs_distances(g, y);

  Trajectory traj;
  traj.horizon = schedule.horizon(g);
  traj.has_event_log = options.record_events;
  traj.watch = {y};
  traj.first_hit.assign(1, std::nullopt);

  LabelConfig state = LabelConfig::single(n, x);
  Vertex walker = x;
  traj.walker_distance.emplace_back(0.0, dist[walker]);
  if (walker == y) {
    traj.first_hit[0] = 0.0;
    if (options.stop_at_hit) return traj;
  }

  EventStream stream(g, schedule, rng);
  GateEvent ev{};
  while (stream.next(ev)) {
    const Edge& e = g.edge(ev.edge);
    ++traj.num_events;
    if (e.u != walker && e.v != walker) {
      if (options.record_events) traj.events.push_back({ev.time, e.u, e.v, Outcome::II});
      continue;
    }
    step_m0(state, e, params, rng);
    // Only the endpoints can carry N now; keep the one nearer y.
    Vertex keep = walker;
    if (state.is_n(e.u) && state.is_n(e.v)) {
      keep = (dist[e.u] < dist[e.v] || (dist[e.u] == dist[e.v] && e.u < e.v)) ? e.u : e.v;
      state.set(keep == e.u ? e.v : e.u, false);
    } else {
      keep = state.is_n(e.u) ? e.u : e.v;
    }
    if (options.record_events) {
      const Outcome o = keep == e.u ? Outcome::NI : Outcome::IN;
      traj.events.push_back({ev.time, e.u, e.v, o});
    }
    if (keep != walker) {
      walker = keep;
      traj.walker_distance.emplace_back(ev.time, dist[walker]);
      if (walker == y && !traj.first_hit[0]) {
        traj.first_hit[0] = ev.time;
        if (options.stop_at_hit) break;
      }
    }
  }
  return traj;
}

OccupancyRun run_occupancy(const Graph& g, const ChainParams& params, Vertex x, Vertex y,
                           const Schedule& schedule, std::span<const double> sample_times,
                           std::size_t num_traj, const RngPolicy& policy, unsigned workers) {
  if (num_traj == 0) throw ContractError("occupancy: num_traj must be at least 1");
  if (y >= g.num_vertices()) throw ContractError("occupancy: target vertex out of range");
  check_sample_times(sample_times, schedule.horizon(g));

  const std::size_t samples = sample_times.size();
  std::vector<std::uint8_t> labels(num_traj * samples, 0);
  OccupancyRun out;
  out.first_hits.assign(num_traj, std::nullopt);

  RunOptions options;
  options.watch = {y};
  options.sample_times.assign(sample_times.begin(), sample_times.end());

  parallel_for(num_traj, workers, [&](std::size_t k) {
    Rng rng = policy.stream(k);
    const Trajectory traj = run_m0(g, params, x, schedule, options, rng);
    std::copy(traj.watched_labels.begin(), traj.watched_labels.end(), labels.begin() + k * samples);
    out.first_hits[k] = traj.first_hit[0];
  });

  SaturationCurve& curve = out.curve;
  curve.observable = "occupancy";
  curve.num_traj = num_traj;
  curve.times.assign(sample_times.begin(), sample_times.end());
  curve.estimates.resize(samples);
  curve.std_errors.resize(samples);
  const double count = static_cast<double>(num_traj);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < num_traj; ++k) hits += labels[k * samples + s];
    const double p = static_cast<double>(hits) / count;
    curve.estimates[s] = p;
    curve.std_errors[s] = std::sqrt(p * (1.0 - p) / count);
  }
  return out;
}

SaturationCurve occupancy_curve(const Graph& g, const ChainParams& params, Vertex x, Vertex y,
                                const Schedule& schedule, std::span<const double> sample_times,
                                std::size_t num_traj, const RngPolicy& policy, unsigned workers) {
  return run_occupancy(g, params, x, y, schedule, sample_times, num_traj, policy, workers).curve;
}

std::vector<std::pair<double, std::size_t>> crossing_counter(const Trajectory& trajectory, const Cut& cut) {
  if (!trajectory.has_event_log) throw ContractError("crossing_counter: trajectory has no event log");
  std::vector<std::pair<double, std::size_t>> out{{0.0, 0}};
  std::size_t count = 0;
  for (const auto& ev : trajectory.events) {
    if (cut.in_a(ev.u) != cut.in_a(ev.v)) out.emplace_back(ev.time, ++count);
  }
  return out;
}

std::size_t crossings_by(std::span<const std::pair<double, std::size_t>> counter, double t) {
  auto it = std::upper_bound(counter.begin(), counter.end(), t,
                             [](double value, const auto& entry) { return value < entry.first; });
  return it == counter.begin() ? 0 : std::prev(it)->second;
}

ScheduleComparison schedule_equivalence_report(const Graph& g, const ChainParams& params, Vertex x,
                                               Vertex y, std::size_t num_traj, const RngPolicy& policy,
                                               const ScheduleComparisonOptions& options) {
  if (options.sample_times.empty()) throw ContractError("schedule comparison needs sample times");
  const double horizon = options.sample_times.back();

  ScheduleComparison out;
  out.poisson = occupancy_curve(g, params, x, y, Schedule::of_kind(ScheduleKind::poisson_rate_one, horizon),
                                options.sample_times, num_traj, policy.fork("poisson"), options.workers);
  out.uniform = occupancy_curve(g, params, x, y, Schedule::of_kind(ScheduleKind::uniform_random_edge, horizon),
                                options.sample_times, num_traj, policy.fork("uniform"), options.workers);
  out.z_scores.resize(options.sample_times.size());
  for (std::size_t s = 0; s < options.sample_times.size(); ++s) {
    const double diff = std::abs(out.poisson.estimates[s] - out.uniform.estimates[s]);
    const double pooled = std::hypot(out.poisson.std_errors[s], out.uniform.std_errors[s]);
    out.max_abs_difference = std::max(out.max_abs_difference, diff);
    out.z_scores[s] = diff == 0.0 ? 0.0 : (pooled > 0.0 ? diff / pooled : std::numeric_limits<double>::infinity());
    out.max_z = std::max(out.max_z, out.z_scores[s]);
  }

  const double edges = static_cast<double>(g.num_edges());
  for (double target : options.gate_count_targets) {
    GateCountConcentration conc{target, edges > 0 ? target / edges : 0.0, 0.0, 0.0};
    if (edges == 0) {
      out.gate_counts.push_back(conc);
      continue;
    }
    const Schedule poisson = Schedule::of_kind(ScheduleKind::poisson_rate_one, conc.time);
    const RngPolicy stream_policy = policy.fork("gate-count:" + format_double(target));
    std::vector<std::size_t> counts(num_traj);
    parallel_for(num_traj, options.workers, [&](std::size_t k) {
      Rng rng = stream_policy.stream(k);
      EventStream stream(g, poisson, rng);
      GateEvent ev{};
      std::size_t c = 0;
      while (stream.next(ev)) ++c;
      counts[k] = c;
    });
    std::size_t deviating = 0;
    double total = 0.0;
    for (auto c : counts) {
      total += static_cast<double>(c);
      if (std::abs(static_cast<double>(c) - target) > 0.5 * target) ++deviating;
    }
    conc.fraction_deviating = static_cast<double>(deviating) / static_cast<double>(num_traj);
    conc.mean_count = total / static_cast<double>(num_traj);
    out.gate_counts.push_back(conc);
  }
  return out;
}

namespace {

constexpr std::size_t kMaxExactVertices = 10;

}  // namespace

Eigen::MatrixXd exact_transition_matrix(const Graph& g, const ChainParams& params) {
  const std::size_t n = g.num_vertices();
  if (n > kMaxExactVertices) {
    throw SizeError("exact transition matrix limited to " + std::to_string(kMaxExactVertices) + " vertices");
  }
  const std::size_t states = (std::size_t{1} << n) - 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(states, states);
  if (g.num_edges() == 0) return Eigen::MatrixXd::Identity(states, states);
  const double per_edge = 1.0 / static_cast<double>(g.num_edges());
  const double ps = params.p_single() * per_edge;
  const double pd = params.p_double() * per_edge;
  for (std::size_t mask = 1; mask <= states; ++mask) {
    for (const Edge& e : g.edges()) {
      const std::size_t bu = std::size_t{1} << e.u;
      const std::size_t bv = std::size_t{1} << e.v;
      if (!(mask & (bu | bv))) {
        P(mask - 1, mask - 1) += per_edge;
        continue;
      }
      const std::size_t rest = mask & ~(bu | bv);
      P(mask - 1, (rest | bv) - 1) += ps;
      P(mask - 1, (rest | bu) - 1) += ps;
      P(mask - 1, (rest | bu | bv) - 1) += pd;
    }
  }
  return P;
}

Eigen::VectorXd product_stationary_distribution(std::size_t num_vertices, const ChainParams& params) {
  if (num_vertices > kMaxExactVertices) throw SizeError("stationary distribution: too many vertices");
  const std::size_t states = (std::size_t{1} << num_vertices) - 1;
  const double weight = static_cast<double>(params.local_dim() * params.local_dim() - 1);
  Eigen::VectorXd pi(states);
  for (std::size_t mask = 1; mask <= states; ++mask) {
    pi(mask - 1) = std::pow(weight, std::popcount(mask));
  }
  return pi / pi.sum();
}

StationarityCheck check_stationarity(const Graph& g, const ChainParams& params) {
  const Eigen::MatrixXd P = exact_transition_matrix(g, params);
  const Eigen::VectorXd pi = product_stationary_distribution(g.num_vertices(), params);
  StationarityCheck out;
  out.residual_inf = (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
  out.marginals.assign(g.num_vertices(), 0.0);
  for (std::size_t mask = 1; mask <= static_cast<std::size_t>(pi.size()); ++mask) {
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      if (mask & (std::size_t{1} << v)) out.marginals[v] += pi(mask - 1);
    }
  }
  return out;
}

std::string events_to_csv(const Trajectory& trajectory) {
  if (!trajectory.has_event_log) throw ContractError("events_to_csv: trajectory has no event log");
  std::ostringstream out;
  out << "time,edge_u,edge_v,outcome\n";
  for (const auto& ev : trajectory.events) {
    out << format_double(ev.time) << ',' << ev.u << ',' << ev.v << ',' << to_string(ev.outcome) << '\n';
  }
  return out.str();
}

}  // namespace scramble
