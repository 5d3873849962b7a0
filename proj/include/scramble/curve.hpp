#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace scramble {

/// Monte Carlo estimate of a time-dependent observable.
struct SaturationCurve {
  std::string observable;
  std::vector<double> times;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::size_t num_traj = 0;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws ContractError when lengths differ, times decrease or an error bar is negative.
  void validate() const;
};

/// intervals + 1 equally spaced points covering [0, t_max].
std::vector<double> uniform_sample_times(double t_max, std::size_t intervals);

}  // namespace scramble
