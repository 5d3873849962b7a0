#include "scramble/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "scramble/errors.hpp"
#include "scramble/format.hpp"

namespace scramble {

void SaturationCurve::validate() const {
  if (estimates.size() != times.size() || std_errors.size() != times.size()) {
    throw ContractError("saturation curve: column lengths differ");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] < times[i - 1]) throw ContractError("saturation curve: times must increase");
    if (!(std_errors[i] >= 0.0)) throw ContractError("saturation curve: negative standard error");
  }
}

std::vector<double> uniform_sample_times(double t_max, std::size_t intervals) {
  if (intervals == 0) return {0.0};
  std::vector<double> out(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) out[i] = t_max * static_cast<double>(i) / static_cast<double>(intervals);
  out.back() = t_max;
  return out;
}

double equilibrium_occupancy(int d, std::size_t num_vertices) {
  if (d < 2) throw DomainError("equilibrium_occupancy: d must be at least 2");
  if (num_vertices < 1) throw DomainError("equilibrium_occupancy: V must be at least 1");
  const double d2 = static_cast<double>(d) * d;
  // ((d^2-1)/d^2) / (1 - d^(-2V)); expm1 keeps the denominator accurate.
  const double denom = -std::expm1(-static_cast<double>(num_vertices) * std::log(d2));
  return ((d2 - 1.0) / d2) / denom;
}

double otoc_from_occupancy(double p, int d) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("otoc_from_occupancy: p must lie in [0, 1]");
  const double d2 = static_cast<double>(d) * d;
  return d2 / (d2 - 1.0) * p;
}

double default_threshold_fraction(int d) { return 1.0 / (static_cast<double>(d) * d + 1.0); }

SaturationCurve otoc_curve_from_occupancy(const SaturationCurve& occupancy, int d) {
  SaturationCurve out = occupancy;
  out.observable = "otoc";
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.estimates[i] = otoc_from_occupancy(occupancy.estimates[i], d);
    out.std_errors[i] = otoc_from_occupancy(std::min(1.0, occupancy.std_errors[i]), d);
  }
  return out;
}

namespace {

/// First crossing of `value(i) >= threshold`, linearly interpolated; nullopt if none.
template <class F>
std::optional<double> first_crossing(const SaturationCurve& curve, double threshold, F value) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double vi = value(i);
    if (vi >= threshold) {
      if (i == 0) return curve.times[0];
      const double prev = value(i - 1);
      const double t0 = curve.times[i - 1];
      const double t1 = curve.times[i];
      return t0 + (threshold - prev) / (vi - prev) * (t1 - t0);
    }
  }
  return std::nullopt;
}

}  // namespace

SaturationResult tau_from_curve(const SaturationCurve& curve, double threshold) {
  curve.validate();
  if (curve.size() == 0) throw ContractError("tau_from_curve: empty curve");
  if (!(threshold > 0.0)) throw ContractError("tau_from_curve: threshold must be positive");
  SaturationResult r;
  r.threshold = threshold;
  r.equilibrium = std::numeric_limits<double>::quiet_NaN();
  const auto& est = curve.estimates;
  const auto& se = curve.std_errors;
  const auto conservative = first_crossing(curve, threshold, [&](std::size_t i) { return est[i] - 2.0 * se[i]; });
  const auto point = first_crossing(curve, threshold, [&](std::size_t i) { return est[i]; });
  const auto optimistic = first_crossing(curve, threshold, [&](std::size_t i) { return est[i] + 2.0 * se[i]; });
  const double last = curve.times.back();
  r.censored = !conservative.has_value();
  r.tau = conservative.value_or(last);
  r.tau_point = point.value_or(last);
  r.ci_low = optimistic.value_or(last);
  r.ci_high = r.tau;
  return r;
}

SaturationResult tau_from_curve(const SaturationCurve& curve, double equilibrium, double fraction) {
  SaturationResult r = tau_from_curve(curve, fraction * equilibrium);
  r.equilibrium = equilibrium;
  return r;
}

SaturationResult tau_otoc(const SaturationCurve& occupancy, int d, std::size_t num_vertices,
                          std::optional<double> fraction) {
  const double eq = otoc_from_occupancy(equilibrium_occupancy(d, num_vertices), d);
  return tau_from_curve(otoc_curve_from_occupancy(occupancy, d), eq, fraction.value_or(default_threshold_fraction(d)));
}

double tau_ent_lower_bound(const Graph& g, const Cut& cut, int d, std::optional<double> fraction) {
  const double f = fraction.value_or(default_threshold_fraction(d));
  if (!(f > 0.0 && f < 1.0)) throw ValidationError("threshold fraction must lie in (0, 1)");
  const std::size_t crossing = cut_size(g, cut);
  if (crossing == 0) throw ValidationError("cut has no crossing edges");
  // Saturation needs fraction * min(|A|,|B|) log d of entropy; each crossing
  // gate adds at most 2 log d and crossing gates arrive at rate cut_size.
  return f * static_cast<double>(cut.smaller_side()) / (2.0 * static_cast<double>(crossing));
}

std::vector<double> ent_bound_values(const Trajectory& trajectory, const Cut& cut, int d,
                                     std::span<const double> sample_times) {
  const auto counter = crossing_counter(trajectory, cut);
  const double log_d = std::log(static_cast<double>(d));
  const double cap = static_cast<double>(cut.smaller_side()) * log_d;
  std::vector<double> out;
  out.reserve(sample_times.size());
  for (double t : sample_times) {
    out.push_back(std::min(2.0 * log_d * static_cast<double>(crossings_by(counter, t)), cap));
  }
  return out;
}

SaturationCurve ent_bound_curve(std::span<const Trajectory> trajectories, const Cut& cut, int d,
                                std::span<const double> sample_times) {
  if (trajectories.empty()) throw ContractError("ent_bound_curve: no trajectories");
  SaturationCurve curve;
  curve.observable = "entropy_bound";
  curve.num_traj = trajectories.size();
  curve.times.assign(sample_times.begin(), sample_times.end());
  std::vector<double> sum(sample_times.size(), 0.0);
  std::vector<double> sum_sq(sample_times.size(), 0.0);
  for (const auto& traj : trajectories) {
    const auto values = ent_bound_values(traj, cut, d, sample_times);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[i] += values[i];
      sum_sq[i] += values[i] * values[i];
    }
  }
  const double n = static_cast<double>(trajectories.size());
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double mean = sum[i] / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq[i] - n * mean * mean) / (n - 1.0)) : 0.0;
    curve.estimates.push_back(mean);
    curve.std_errors.push_back(std::sqrt(var / n));
  }
  return curve;
}

std::string_view to_string(ScalingModel m) {
  switch (m) {
    case ScalingModel::log: return "log";
    case ScalingModel::power: return "power";
    case ScalingModel::linear: return "linear";
  }
  return "?";
}

ScalingModel parse_scaling_model(std::string_view name) {
  for (auto m : {ScalingModel::log, ScalingModel::power, ScalingModel::linear}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown scaling model '" + std::string(name) + "' (expected log, power or linear)");
}

double ScalingFit::predict(double n) const {
  switch (model) {
    case ScalingModel::log: return a * std::log(n) + c;
    case ScalingModel::power: return a * std::pow(n, b);
    case ScalingModel::linear: return a * n + c;
  }
  return 0.0;
}

ScalingFit fit_scaling(std::span<const ScalingPoint> points, ScalingModel model) {
  if (points.size() < 4) throw ContractError("fit_scaling: at least 4 points are required");
  for (const auto& p : points) {
    if (p.censored) {
      throw ContractError("fit_scaling: censored point at n=" + format_double(p.n) +
                          "; increase the simulation horizon");
    }
    if (!(p.n > 0.0)) throw ContractError("fit_scaling: n must be positive");
    if (model == ScalingModel::power && !(p.tau > 0.0)) throw ContractError("fit_scaling: power fit needs tau > 0");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    switch (model) {
      case ScalingModel::log: xs.push_back(std::log(p.n)); ys.push_back(p.tau); break;
      case ScalingModel::power: xs.push_back(std::log(p.n)); ys.push_back(std::log(p.tau)); break;
      case ScalingModel::linear: xs.push_back(p.n); ys.push_back(p.tau); break;
    }
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw ContractError("fit_scaling: all family parameters are equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    ss_res += r * r;
  }

  ScalingFit fit;
  fit.model = model;
  fit.points.assign(points.begin(), points.end());
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (model == ScalingModel::power) {
    fit.a = std::exp(intercept);
    fit.b = slope;
    fit.c = 0.0;
  } else {
    fit.a = slope;
    fit.b = 1.0;
    fit.c = intercept;
  }
  return fit;
}

FidelityBound decoding_fidelity_bound(double otoc_value, double d_a) {
  if (!(otoc_value >= 0.0)) throw DomainError("decoding_fidelity_bound: OTOC value must be non-negative");
  if (otoc_value >= 1.0) throw DomainError("decoding_fidelity_bound: bound degenerates for OTOC >= 1");
  if (!(d_a >= 2.0)) throw DomainError("decoding_fidelity_bound: d_A must be at least 2");
  const double raw = 1.0 / (d_a * d_a * (1.0 - otoc_value));
  return {std::min(raw, 1.0), raw, raw > 1.0};
}

std::string curve_to_csv(const SaturationCurve& curve) {
  curve.validate();
  std::ostringstream out;
  out << "time,estimate,stderr\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << format_double(curve.times[i]) << ',' << format_double(curve.estimates[i]) << ','
        << format_double(curve.std_errors[i]) << '\n';
  }
  return out.str();
}

std::string curve_to_json(const SaturationCurve& curve) {
  curve.validate();
  nlohmann::ordered_json j;
  j["observable"] = curve.observable;
  j["num_traj"] = curve.num_traj;
  j["time"] = curve.times;
  j["estimate"] = curve.estimates;
  j["stderr"] = curve.std_errors;
  return j.dump(2);
}

std::string fit_to_csv(const ScalingFit& fit) {
  std::ostringstream out;
  out << "n,tau,tau_err\n";
  for (const auto& p : fit.points) {
    out << format_double(p.n) << ',' << format_double(p.tau) << ',' << format_double(p.tau_err) << '\n';
  }
  return out.str();
}

std::string fit_to_json(const ScalingFit& fit) {
  nlohmann::ordered_json j;
  j["model"] = to_string(fit.model);
  j["a"] = fit.a;
  j["b"] = fit.b;
  j["c"] = fit.c;
  j["r2"] = fit.r2;
  auto& pts = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : fit.points) pts.push_back({{"n", p.n}, {"tau", p.tau}, {"tau_err", p.tau_err}});
  return j.dump(2);
}

std::string result_to_json(const SaturationResult& r) {
  nlohmann::ordered_json j;
  j["tau"] = r.tau;
  j["tau_point"] = r.tau_point;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["threshold"] = r.threshold;
  j["equilibrium"] = std::isnan(r.equilibrium) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.equilibrium);
  j["censored"] = r.censored;
  return j.dump(2);
}

}  // namespace scramble
