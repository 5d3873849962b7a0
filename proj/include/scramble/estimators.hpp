#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scramble/chain.hpp"
#include "scramble/curve.hpp"
#include "scramble/graph.hpp"

namespace scramble {

/// Stationary probability that a given vertex carries N:
/// (d^2-1) d^(2(V-1)) / (d^(2V) - 1), evaluated without overflow.
double equilibrium_occupancy(int d, std::size_t num_vertices);

/// OTOC value implied by an occupancy probability: d^2/(d^2-1) * p.
double otoc_from_occupancy(double p, int d);

/// Default saturation fraction 1/(d^2+1).
double default_threshold_fraction(int d);

/// Curve scaled point-wise (estimates and error bars) by otoc_from_occupancy.
SaturationCurve otoc_curve_from_occupancy(const SaturationCurve& occupancy, int d);

struct SaturationResult {
  double tau = 0.0;           // conservative crossing: estimate - 2 se >= threshold
  double tau_point = 0.0;     // crossing of the bare estimate
  double ci_low = 0.0;        // crossing of estimate + 2 se
  double ci_high = 0.0;       // equals tau
  double threshold = 0.0;
  double equilibrium = 0.0;   // reference value; NaN when the caller gave a bare threshold
  bool censored = false;      // threshold not reached within the curve
};

/// Linear interpolation between bracketing samples. Censored results carry
/// tau = last sample time.
SaturationResult tau_from_curve(const SaturationCurve& curve, double threshold);

/// Threshold = fraction * equilibrium.
SaturationResult tau_from_curve(const SaturationCurve& curve, double equilibrium, double fraction);

/// tau_OTOC from an occupancy curve on a graph with V vertices: the OTOC curve
/// is compared against fraction * its closed-form equilibrium value.
SaturationResult tau_otoc(const SaturationCurve& occupancy, int d, std::size_t num_vertices,
                          std::optional<double> fraction = std::nullopt);

/// fraction * min(|A|, |B|) / (2 * cut_size), in time units.
double tau_ent_lower_bound(const Graph& g, const Cut& cut, int d, std::optional<double> fraction = std::nullopt);

/// Per-trajectory bound min(2 log d * crossings(t), min(|A|,|B|) log d) averaged
/// over trajectories with standard errors. Needs event logs.
SaturationCurve ent_bound_curve(std::span<const Trajectory> trajectories, const Cut& cut, int d,
                                std::span<const double> sample_times);

/// The bound for one trajectory at each sample time.
std::vector<double> ent_bound_values(const Trajectory& trajectory, const Cut& cut, int d,
                                     std::span<const double> sample_times);

enum class ScalingModel { log, power, linear };
std::string_view to_string(ScalingModel m);
ScalingModel parse_scaling_model(std::string_view name);

struct ScalingPoint {
  double n = 0.0;
  double tau = 0.0;
  double tau_err = 0.0;
  bool censored = false;
};

/// log:    tau = a log n + c
/// power:  tau = a n^b (fit of log tau = b log n + log a)
/// linear: tau = a n + c
/// R^2 is computed in the transformed domain.
struct ScalingFit {
  ScalingModel model = ScalingModel::linear;
  std::vector<ScalingPoint> points;
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double r2 = 0.0;

  double predict(double n) const;
};

ScalingFit fit_scaling(std::span<const ScalingPoint> points, ScalingModel model);

struct FidelityBound {
  double value;  // min(raw, 1)
  double raw;
  bool capped;
};

/// 1 / (d_A^2 (1 - C)), capped at 1.
FidelityBound decoding_fidelity_bound(double otoc_value, double d_a);

// Serialization. Column names: time,estimate,stderr and n,tau,tau_err.
std::string curve_to_csv(const SaturationCurve& curve);
std::string curve_to_json(const SaturationCurve& curve);
std::string fit_to_csv(const ScalingFit& fit);
std::string fit_to_json(const ScalingFit& fit);
std::string result_to_json(const SaturationResult& result);

}  // namespace scramble
