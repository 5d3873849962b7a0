#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scramble/curve.hpp"
#include "scramble/graph.hpp"
#include "scramble/rng.hpp"

namespace scramble {

/// State of the operator-spreading chain: one bit per vertex, set = N
/// (non-identity Pauli support), clear = I.
class LabelConfig {
 public:
  LabelConfig() = default;
  explicit LabelConfig(std::size_t num_vertices)
      : size_(num_vertices), words_((num_vertices + 63) / 64, 0) {}

  static LabelConfig single(std::size_t num_vertices, Vertex x) {
    LabelConfig c(num_vertices);
    c.set(x, true);
    return c;
  }

  bool is_n(Vertex v) const noexcept { return (words_[v >> 6] >> (v & 63)) & 1u; }
  void set(Vertex v, bool n) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (v & 63);
    if (n) {
      words_[v >> 6] |= bit;
    } else {
      words_[v >> 6] &= ~bit;
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t count_n() const noexcept;
  bool any_n() const noexcept;
  std::vector<Vertex> n_vertices() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const LabelConfig&, const LabelConfig&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Resulting (label(u), label(v)) of one gate on edge (u, v).
enum class Outcome : std::uint8_t { II, IN, NI, NN };
std::string_view to_string(Outcome o);

/// Update probabilities for local dimension d. Outcomes are drawn as one
/// integer r in [0, d^2 + 1): r = 0 -> IN, r = 1 -> NI, otherwise NN, so the
/// three probabilities come from a single rational definition.
class ChainParams {
 public:
  explicit ChainParams(int local_dim);

  int local_dim() const noexcept { return d_; }
  std::uint32_t outcome_denominator() const noexcept { return static_cast<std::uint32_t>(d_ * d_ + 1); }
  double p_single() const noexcept { return 1.0 / outcome_denominator(); }
  double p_double() const noexcept { return static_cast<double>(d_ * d_ - 1) / outcome_denominator(); }

 private:
  int d_;
};

enum class ScheduleKind {
  poisson_rate_one,
  uniform_random_edge,
  round_robin,
  random_permutation_sweeps,
  fixed_sequence,
};
std::string_view to_string(ScheduleKind k);
ScheduleKind parse_schedule_kind(std::string_view name);

/// Rule producing time-stamped gates. Discrete schedules place gate k (1-based)
/// at time k/E, so every edge receives one gate per time unit on average.
struct Schedule {
  ScheduleKind kind = ScheduleKind::poisson_rate_one;
  double t_max = 0.0;
  std::vector<std::uint32_t> sequence;  // edge indices, fixed_sequence only

  static Schedule of_kind(ScheduleKind kind, double t_max) { return {kind, t_max, {}}; }
  static Schedule fixed(std::vector<std::uint32_t> edge_indices) {
    return {ScheduleKind::fixed_sequence, 0.0, std::move(edge_indices)};
  }

  /// Time of the last possible event.
  double horizon(const Graph& g) const;
};

struct GateEvent {
  double time;
  std::uint32_t edge;
};

/// Lazily generated gate events for one trajectory.
///
/// The Poisson schedule superposes E independent rate-1 streams as a single
/// rate-E stream with a uniformly chosen edge per event.
class EventStream {
 public:
  EventStream(const Graph& g, const Schedule& schedule, Rng& rng);

  /// Writes the next event and returns true, or returns false past the horizon.
  bool next(GateEvent& out);

 private:
  const Schedule& schedule_;
  Rng& rng_;
  std::uint32_t num_edges_;
  double rate_;
  double horizon_;
  double time_ = 0.0;
  std::uint64_t step_ = 0;
  std::exponential_distribution<double> gap_;
  std::uniform_int_distribution<std::uint32_t> pick_;
  std::vector<std::uint32_t> sweep_;
};

/// One chain step on `e`. Leaves II alone; otherwise resamples the endpoint
/// pair to IN, NI or NN. Returns the resulting pair.
Outcome step_m0(LabelConfig& state, const Edge& e, const ChainParams& params, Rng& rng);

struct RecordedEvent {
  double time;
  Vertex u;
  Vertex v;
  Outcome outcome;
};

struct RunOptions {
  std::vector<Vertex> watch;
  std::vector<double> sample_times;  // sorted, within the horizon
  bool record_events = false;
  bool record_snapshots = false;
  /// Stop once every watched vertex has been hit. Not allowed with sample times.
  bool stop_when_all_hit = false;
};

struct Trajectory {
  double horizon = 0.0;
  std::size_t num_events = 0;
  bool has_event_log = false;
  std::vector<RecordedEvent> events;
  std::vector<double> sample_times;
  std::vector<LabelConfig> snapshots;
  std::vector<Vertex> watch;
  /// Row-major [sample][watched vertex], 1 = N.
  std::vector<std::uint8_t> watched_labels;
  /// Per watched vertex; nullopt means never within the horizon.
  std::vector<std::optional<double>> first_hit;
  /// Modified chain only: (time, distance of the retained N to the target) at
  /// time 0 and after every change.
  std::vector<std::pair<double, std::uint32_t>> walker_distance;

  bool watched_is_n(std::size_t sample, std::size_t watch_index) const {
    return watched_labels[sample * watch.size() + watch_index] != 0;
  }
};

/// Chain M0 from a single N at x.
Trajectory run_m0(const Graph& g, const ChainParams& params, Vertex x, const Schedule& schedule,
                  const RunOptions& options, Rng& rng);

/// Clears every N except one at minimal distance (ties: smallest index).
/// No-op on an all-I state.
void retain_closest(LabelConfig& state, std::span<const std::uint32_t> distance_to_target);

struct ModifiedOptions {
  bool stop_at_hit = true;
  bool record_events = false;
};

/// Modified chain M: an M0 step followed by retain_closest toward y. Watches y.
Trajectory run_modified(const Graph& g, const ChainParams& params, Vertex x, Vertex y,
                        const Schedule& schedule, Rng& rng, const ModifiedOptions& options = {});

struct OccupancyRun {
  SaturationCurve curve;  // P(label(y) = N) per sample time
  std::vector<std::optional<double>> first_hits;  // per trajectory
};

/// Runs num_traj independent M0 trajectories; trajectory k uses policy.stream(k).
OccupancyRun run_occupancy(const Graph& g, const ChainParams& params, Vertex x, Vertex y,
                           const Schedule& schedule, std::span<const double> sample_times,
                           std::size_t num_traj, const RngPolicy& policy, unsigned workers = 0);

SaturationCurve occupancy_curve(const Graph& g, const ChainParams& params, Vertex x, Vertex y,
                                const Schedule& schedule, std::span<const double> sample_times,
                                std::size_t num_traj, const RngPolicy& policy, unsigned workers = 0);

/// Cumulative count of gates on cut-crossing edges: (0, 0) followed by one
/// entry per crossing event. Requires an event log.
std::vector<std::pair<double, std::size_t>> crossing_counter(const Trajectory& trajectory, const Cut& cut);

/// Value of a crossing_counter step function at time t.
std::size_t crossings_by(std::span<const std::pair<double, std::size_t>> counter, double t);

struct GateCountConcentration {
  double expected;            // E * t
  double time;
  double fraction_deviating;  // |count - Et| > 0.5 Et
  double mean_count;
};

struct ScheduleComparison {
  SaturationCurve poisson;
  SaturationCurve uniform;
  std::vector<double> z_scores;  // |difference| / pooled standard error
  double max_abs_difference = 0.0;
  double max_z = 0.0;
  std::vector<GateCountConcentration> gate_counts;
};

struct ScheduleComparisonOptions {
  std::vector<double> sample_times;
  std::vector<double> gate_count_targets{10.0, 30.0, 100.0, 300.0};  // values of E*t
  unsigned workers = 0;
};

ScheduleComparison schedule_equivalence_report(const Graph& g, const ChainParams& params, Vertex x,
                                               Vertex y, std::size_t num_traj, const RngPolicy& policy,
                                               const ScheduleComparisonOptions& options);

/// Exact one-step transition matrix of uniform_random_edge dynamics over the
/// non-all-I configurations. Row/column i is the configuration with bitmask
/// i + 1 (bit v set = N at v). Graphs without edges give the identity.
Eigen::MatrixXd exact_transition_matrix(const Graph& g, const ChainParams& params);

/// pi(config) proportional to (d^2 - 1)^(#N), same indexing as above.
Eigen::VectorXd product_stationary_distribution(std::size_t num_vertices, const ChainParams& params);

struct StationarityCheck {
  double residual_inf;                 // max |(pi P - pi)_i|
  std::vector<double> marginals;       // P(N at v) under pi
};
StationarityCheck check_stationarity(const Graph& g, const ChainParams& params);

/// Writes time,edge_u,edge_v,outcome rows.
std::string events_to_csv(const Trajectory& trajectory);

}  // namespace scramble
