#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scramble/config.hpp"
#include "scramble/graph.hpp"

namespace scramble {

/// Exit codes shared by the library drivers and the command-line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int invalid_config = 2;
inline constexpr int censored = 3;
inline constexpr int verification_failed = 4;
}  // namespace exit_code

struct Report {
  int exit_code = exit_code::ok;
  std::filesystem::path out_dir;
  std::vector<std::string> manifest;  // relative to out_dir, report.json last
  std::string json;
  std::string summary;
};

/// Restricts writes to one directory; names must be plain relative paths.
/// Directories are created on first write, so a failed run leaves nothing behind.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);
  void write(const std::string& name, const std::string& content);
  const std::filesystem::path& root() const noexcept { return root_; }
  const std::vector<std::string>& files() const noexcept { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

/// Git-style short revision baked in at configure time, or "unknown".
std::string build_id();

Graph build_graph(const GraphSpec& spec);

/// "farthest_pair" or explicit indices; explicit indices are range-checked.
std::pair<Vertex, Vertex> resolve_pair(const Graph& g, const std::string& x, const std::string& y);

/// "auto" picks the family's natural bipartition (left subtree, dumbbell half,
/// lattice half); the named forms force one; anything else is a vertex list.
Cut resolve_cut(const Graph& g, const GraphSpec& spec, const std::string& cut_spec);

/// chain.horizon, or horizon_factor * diameter (at least horizon_factor).
double resolve_horizon(const Graph& g, const ExperimentConfig& config);

Report run_experiment(const ExperimentConfig& config);

/// Mapping equivalence, entropy-increment bound and stationarity on a small graph.
Report oracle_verify(const ExperimentConfig& config);

enum class Table1Profile { smoke, desk, extended };
Table1Profile parse_table1_profile(std::string_view name);
std::string_view to_string(Table1Profile p);

struct Table1Options {
  Table1Profile profile = Table1Profile::desk;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out/table1";
  unsigned workers = 0;
  bool plots = true;
};

Report reproduce_table1(const Table1Options& options);

}  // namespace scramble
