#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scramble/chain.hpp"
#include "scramble/estimators.hpp"
#include "scramble/graph.hpp"

namespace scramble {

enum class ExperimentKind { otoc, ent_bound, oracle_verify, scaling_suite, schedule_compare };
std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view name);

struct GraphSpec {
  std::string family = "binary_tree";  // binary_tree zary_tree lattice dumbbell complete star file
  int depth = 5;
  int z = 8;
  std::vector<int> dims{8};
  int m = 4;
  int n = 8;
  std::string file;
  bool allow_disconnected = false;

  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

/// Everything an experiment needs. Parsed from an INI-style file:
///
///   kind = otoc
///   seed = 7
///   [graph]
///   family = binary_tree
///   depth = 5
///   [chain]
///   num_traj = 10000
///
/// Top-level keys: kind seed workers out plots. Sections: graph, chain, cut,
/// scaling, oracle, schedule_compare. Unknown sections or keys are errors.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::otoc;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out_dir = "out";
  bool plots = true;

  GraphSpec graph;

  int d = 2;
  ScheduleKind schedule = ScheduleKind::poisson_rate_one;
  std::string x = "farthest_pair";
  std::string y = "farthest_pair";
  std::size_t num_traj = 10000;
  std::optional<double> horizon;
  double horizon_factor = 20.0;
  std::size_t sample_intervals = 200;
  std::optional<double> threshold_fraction;

  std::string cut = "auto";  // auto tree_left_subtree dumbbell_half lattice_half or "v1,v2,..."

  std::string scaling_parameter = "depth";  // depth m n side
  std::vector<int> scaling_values{3, 4, 5, 6, 7, 8};
  ScalingModel scaling_model = ScalingModel::linear;
  std::string scaling_axis = "parameter";  // parameter or vertices

  std::size_t circuit_samples = 10000;
  std::size_t num_gates = 8;
  std::size_t entropy_circuits = 100;
  std::size_t entropy_gates = 60;

  std::vector<double> gate_count_targets{10.0, 30.0, 100.0, 300.0};

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// `overrides` are "section.key=value" (or "key=value" for top-level keys),
/// applied on top of the text before validation. Throws ValidationError with
/// a field-qualified message on any problem.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(echo_config(c)) == c.
std::string echo_config(const ExperimentConfig& config);

/// Checks ranges and cross-field consistency. Called by parse_config.
void validate_config(const ExperimentConfig& config);

}  // namespace scramble
