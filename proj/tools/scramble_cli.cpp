// scramble: command-line front end for the operator-spreading simulator.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scramble/config.hpp"
#include "scramble/errors.hpp"
#include "scramble/experiment.hpp"
#include "scramble/graph.hpp"

namespace {

using namespace scramble;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::string graph_file;
  bool no_plots = false;
};

void add_common(CLI::App* app, CommonFlags& f, bool experiment = true) {
  app->add_option("--config", f.config_path, "INI-style experiment config")->check(CLI::ExistingFile);
  app->add_option("--set", f.sets, "Override a config key, e.g. --set graph.depth=6");
  app->add_option("--graph-file", f.graph_file, "Load the graph from an edge-list file");
  if (!experiment) return;
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
  app->add_flag("--no-plots", f.no_plots, "Skip SVG output");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig load(const CommonFlags& f, std::optional<ExperimentKind> kind) {
  const std::string text = f.config_path.empty() ? std::string() : read_file(f.config_path);
  std::vector<std::string> overrides;
  if (kind) overrides.push_back("kind=" + std::string(to_string(*kind)));
  if (!f.graph_file.empty()) {
    overrides.push_back("graph.family=file");
    overrides.push_back("graph.file=" + f.graph_file);
  }
  overrides.insert(overrides.end(), f.sets.begin(), f.sets.end());
  if (f.seed) overrides.push_back("seed=" + std::to_string(*f.seed));
  if (f.out) overrides.push_back("out=" + *f.out);
  if (f.workers) overrides.push_back("workers=" + std::to_string(*f.workers));
  if (f.no_plots) overrides.push_back("plots=false");
  return parse_config(text, overrides);
}

int emit(const Report& r) {
  std::cout << r.summary;
  std::cout << "wrote " << r.manifest.size() << " files to " << r.out_dir.string() << '\n';
  return r.exit_code;
}

int inspect_graph(const CommonFlags& f, const std::string& save_path, int d) {
  const ExperimentConfig cfg = load(f, std::nullopt);
  const Graph g = build_graph(cfg.graph);
  nlohmann::ordered_json j;
  j["family"] = cfg.graph.family;
  j["vertices"] = g.num_vertices();
  j["edges"] = g.num_edges();
  j["connected"] = g.is_connected();
  j["max_degree"] = g.max_degree();
  j["degree_bound_d2"] = satisfies_degree_bound(g, d);
  if (g.is_connected()) {
    const auto [x, y] = farthest_pair(g);
    j["diameter"] = diameter(g);
    j["farthest_pair"] = {x, y};
  }
  std::cout << j.dump(2) << '\n';
  if (!save_path.empty()) {
    std::ofstream out(save_path, std::ios::binary);
    out << save_edge_list(g);
    if (!out) throw std::runtime_error("cannot write " + save_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator spreading and scrambling on graphs"};
  app.set_version_flag("--version", "scramble " + build_id());
  app.require_subcommand(1);

  CommonFlags graph_flags;
  std::string save_path;
  int degree_d = 2;
  auto* graph = app.add_subcommand("graph", "Generate, inspect or save a graph");
  add_common(graph, graph_flags, false);
  graph->add_option("--save", save_path, "Write the graph as an edge list");
  graph->add_option("-d,--local-dim", degree_d, "Local dimension for the degree check");
  std::vector<std::pair<std::string, std::string>> graph_keys{
      {"family", "binary_tree zary_tree lattice dumbbell complete star"},
      {"depth", "Tree depth"}, {"z", "Tree branching"}, {"dims", "Lattice sides, comma separated"},
      {"m", "Dumbbell clique size"}, {"n", "Vertices of complete or star graphs"}};
  std::vector<std::string> graph_values(graph_keys.size());
  for (std::size_t i = 0; i < graph_keys.size(); ++i) {
    graph->add_option("--" + graph_keys[i].first, graph_values[i], graph_keys[i].second);
  }

  struct Kinded {
    const char* name;
    const char* help;
    std::optional<ExperimentKind> kind;
    CommonFlags flags;
    CLI::App* app = nullptr;
  };
  std::vector<Kinded> commands{
      {"otoc", "Estimate the OTOC saturation time", ExperimentKind::otoc, {}},
      {"entbound", "Entanglement lower bound across a cut", ExperimentKind::ent_bound, {}},
      {"oracle-verify", "Check the chain against exact circuits", ExperimentKind::oracle_verify, {}},
      {"schedule-compare", "Compare Poisson and uniform schedules", ExperimentKind::schedule_compare, {}},
      {"scaling", "Fit tau_OTOC across a family", ExperimentKind::scaling_suite, {}},
      {"run", "Run the experiment named by the config's kind", std::nullopt, {}},
  };
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, c.help);
    add_common(c.app, c.flags);
  }

  std::string profile = "desk";
  std::uint64_t t1_seed = 1;
  std::string t1_out = "out/table1";
  unsigned t1_workers = 0;
  bool t1_no_plots = false;
  auto* table1 = app.add_subcommand("table1", "Reproduce the scaling comparison table");
  table1->add_option("--profile", profile, "desk or extended")->check(CLI::IsMember({"desk", "extended", "smoke"}));
  table1->add_option("--seed", t1_seed, "Master seed");
  table1->add_option("--out", t1_out, "Output directory");
  table1->add_option("--workers", t1_workers, "Worker threads (0 = all cores)");
  table1->add_flag("--no-plots", t1_no_plots, "Skip SVG output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (graph->parsed()) {
      for (std::size_t i = 0; i < graph_keys.size(); ++i) {
        if (!graph_values[i].empty()) graph_flags.sets.push_back("graph." + graph_keys[i].first + "=" + graph_values[i]);
      }
      return inspect_graph(graph_flags, save_path, degree_d);
    }
    if (table1->parsed()) {
      Table1Options opt;
      opt.profile = parse_table1_profile(profile);
      opt.seed = t1_seed;
      opt.out_dir = t1_out;
      opt.workers = t1_workers;
      opt.plots = !t1_no_plots;
      return emit(reproduce_table1(opt));
    }
    for (auto& c : commands) {
      if (!c.app->parsed()) continue;
      const ExperimentConfig cfg = load(c.flags, c.kind);
      return emit(run_experiment(cfg));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::invalid_config;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::invalid_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::failure;
  }
  return exit_code::failure;
}
