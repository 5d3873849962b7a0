#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scramble/config.hpp"
#include "scramble/errors.hpp"
#include "scramble/experiment.hpp"

using namespace scramble;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scramble_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text, std::vector<std::string> overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

void check_manifest(const Report& r) {
  REQUIRE_FALSE(r.manifest.empty());
  CHECK(r.manifest.back() == "report.json");
  for (const auto& f : r.manifest) {
    INFO(f);
    CHECK(fs::exists(r.out_dir / f));
    CHECK(fs::file_size(r.out_dir / f) > 0);
  }
  const auto j = nlohmann::json::parse(r.json);
  CHECK(j["schema_version"] == 1);
  CHECK(j["manifest"].size() == r.manifest.size());
  CHECK(j.contains("build_id"));
  CHECK(j.contains("wall_clock_seconds"));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig def = parse_config("");
  CHECK(def.kind == ExperimentKind::otoc);
  CHECK(def.horizon_factor == 20.0);
  CHECK(parse_config(echo_config(def)) == def);

  const std::string text = R"(
kind = scaling_suite
seed = 18446744073709551615
workers = 2
out = results/run one

[graph]
family = lattice
dims = 4,5
file = some/path.txt

[chain]
d = 3
schedule = random_permutation_sweeps
x = 0
y = 7
num_traj = 123
horizon = 12.5
sample_intervals = 17
threshold_fraction = 0.125

[cut]
side_a = 0,1,2

[scaling]
parameter = side
values = 2,3,4,5
model = power
axis = vertices

[oracle]
circuit_samples = 99
num_gates = 5

[schedule_compare]
gate_count_targets = 5,50.5
)";
  const ExperimentConfig c = parse_config(text);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.graph.dims == std::vector<int>{4, 5});
  CHECK(c.horizon == 12.5);
  CHECK(c.threshold_fraction == 0.125);
  CHECK(c.schedule == ScheduleKind::random_permutation_sweeps);
  CHECK(c.out_dir == "results/run one");
  CHECK(parse_config(echo_config(c)) == c);
  CHECK(echo_config(parse_config(echo_config(c))) == echo_config(c));
}

TEST_CASE("config errors name the field") {
  CHECK(error_of("[graph]\nfoo = 1").find("graph.foo") != std::string::npos);
  CHECK(error_of("[nonsense]\nx = 1").find("nonsense.x") != std::string::npos);
  CHECK(error_of("bogus = 1").find("bogus") != std::string::npos);
  CHECK(error_of("[graph]\ndepth = abc").find("graph.depth") != std::string::npos);
  CHECK(error_of("[graph]\ndepth = -1").find("graph.depth") != std::string::npos);
  CHECK(error_of("[graph]\nfamily = moebius").find("graph.family") != std::string::npos);
  CHECK(error_of("[chain]\nd = 1").find("chain.d") != std::string::npos);
  CHECK(error_of("[chain]\nschedule = often").find("chain.schedule") != std::string::npos);
  CHECK(error_of("[chain]\nthreshold_fraction = 1.5").find("chain.threshold_fraction") != std::string::npos);
  CHECK(error_of("[chain]\nx = left").find("chain.x") != std::string::npos);
  CHECK(error_of("[chain]\nhorizon = -2").find("chain.horizon") != std::string::npos);
  CHECK(error_of("[cut]\nside_a = 1,,2").find("cut.side_a") != std::string::npos);
  CHECK(error_of("kind = scaling_suite\n[scaling]\nvalues = 1,2,3").find("scaling.values") != std::string::npos);
  CHECK(error_of("kind = teleport").find("kind") != std::string::npos);
  CHECK(error_of("[graph]\nfamily = file").find("graph.file") != std::string::npos);
  CHECK(error_of("[graph\nx=1").find("line") != std::string::npos);
  CHECK(error_of("", {"graph.depth"}).find("override") != std::string::npos);
  CHECK(error_of("", {"graph.depth=x"}).find("graph.depth") != std::string::npos);
}

TEST_CASE("overrides apply after the file") {
  const auto c = parse_config("[graph]\ndepth = 3", {"graph.depth=6", "seed=9", "chain.num_traj=10"});
  CHECK(c.graph.depth == 6);
  CHECK(c.seed == 9);
  CHECK(c.num_traj == 10);
}

TEST_CASE("output directory guard") {
  OutputDir out(scratch("guard"));
  CHECK_FALSE(fs::exists(out.root()));
  CHECK_THROWS_AS(out.write("../escape.txt", "x"), ContractError);
  CHECK_THROWS_AS(out.write("/tmp/abs.txt", "x"), ContractError);
  CHECK_THROWS_AS(out.write("a/../../b", "x"), ContractError);
  out.write("sub/ok.txt", "x");
  CHECK(fs::exists(out.root() / "sub/ok.txt"));
  CHECK(out.files() == std::vector<std::string>{"sub/ok.txt"});
}

TEST_CASE("cut and pair resolution") {
  GraphSpec tree;
  tree.depth = 3;
  const Graph t = build_graph(tree);
  CHECK(resolve_cut(t, tree, "auto").size_a() == 7);
  CHECK(resolve_cut(t, tree, "0,1").size_a() == 2);
  CHECK_THROWS_AS(resolve_cut(t, tree, "dumbbell_half"), ValidationError);
  CHECK_THROWS_AS(resolve_cut(t, tree, "99"), ValidationError);
  GraphSpec grid;
  grid.family = "lattice";
  grid.dims = {4, 3};
  const Graph g = build_graph(grid);
  CHECK(resolve_cut(g, grid, "auto").size_a() == 6);
  CHECK(cut_size(g, resolve_cut(g, grid, "auto")) == 3);
  GraphSpec star;
  star.family = "star";
  CHECK_THROWS_AS(resolve_cut(build_graph(star), star, "auto"), ValidationError);

  CHECK(resolve_pair(t, "farthest_pair", "farthest_pair") == farthest_pair(t));
  CHECK(resolve_pair(t, "3", "4") == std::pair<Vertex, Vertex>{3, 4});
  CHECK_THROWS_AS(resolve_pair(t, "3", "40"), ValidationError);
}

TEST_CASE("otoc experiment on a depth-5 tree") {
  const fs::path dir = scratch("otoc");
  const auto cfg = parse_config("kind = otoc\nseed = 3\n[graph]\ndepth = 5\n[chain]\nnum_traj = 10000",
                                {"out=" + dir.string(), "workers=0"});
  const Report r = run_experiment(cfg);
  CHECK(r.exit_code == 0);
  check_manifest(r);
  const auto j = nlohmann::json::parse(r.json);
  const auto& tau = j["results"]["tau_otoc"];
  CHECK_FALSE(tau["censored"].get<bool>());
  CHECK(std::isfinite(tau["tau"].get<double>()));
  CHECK(tau["ci_low"].get<double>() <= tau["tau"].get<double>());
  CHECK(tau["tau"].get<double>() > 0.0);
  CHECK(parse_config(j["config"].get<std::string>()) == cfg);
  CHECK(slurp(dir / "otoc.svg").find("<svg") == 0);
}

TEST_CASE("identical config and seed give identical CSV files") {
  const std::string text = "kind = otoc\nseed = 21\n[graph]\ndepth = 4\n[chain]\nnum_traj = 3000\nhorizon_factor = 3";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const Report ra = run_experiment(parse_config(text, {"out=" + a.string(), "workers=1"}));
  const Report rb = run_experiment(parse_config(text, {"out=" + b.string(), "workers=3"}));
  REQUIRE(ra.manifest == rb.manifest);
  int csvs = 0;
  for (const auto& f : ra.manifest) {
    if (fs::path(f).extension() != ".csv") continue;
    ++csvs;
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(csvs == 3);
}

TEST_CASE("scaling suite over depths 3..8") {
  const fs::path dir = scratch("scaling");
  const auto cfg = parse_config(
      "kind = scaling_suite\nseed = 4\n[chain]\nnum_traj = 1500\nhorizon_factor = 4\n[scaling]\nparameter = depth\n"
      "values = 3,4,5,6,7,8\nmodel = linear",
      {"out=" + dir.string()});
  const Report r = run_experiment(cfg);
  CHECK(r.exit_code == 0);
  check_manifest(r);
  const auto fit = nlohmann::json::parse(slurp(dir / "scaling_fit.json"));
  CHECK(fit.contains("r2"));
  CHECK(fit["r2"].get<double>() > 0.9);
  CHECK(fit["points"].size() == 6);
}

TEST_CASE("censored scaling points give a nonzero exit") {
  const fs::path dir = scratch("censored");
  const auto cfg = parse_config(
      "kind = scaling_suite\n[chain]\nnum_traj = 200\nhorizon = 0.5\n[scaling]\nvalues = 3,4,5,6",
      {"out=" + dir.string()});
  const Report r = run_experiment(cfg);
  CHECK(r.exit_code == exit_code::censored);
  CHECK(r.summary.find("horizon") != std::string::npos);
  check_manifest(r);
}

TEST_CASE("entanglement bound and schedule comparison experiments") {
  const fs::path e = scratch("entbound");
  const Report re = run_experiment(parse_config(
      "kind = ent_bound\n[graph]\nfamily = dumbbell\nm = 6\n[chain]\nnum_traj = 500", {"out=" + e.string()}));
  CHECK(re.exit_code == 0);
  check_manifest(re);
  const auto je = nlohmann::json::parse(re.json)["results"];
  CHECK(je["tau_ent_lower_bound"].get<double>() == doctest::Approx(0.6));
  CHECK(je["cut"]["crossing_edges"] == 1);

  const fs::path s = scratch("schedcmp");
  const Report rs = run_experiment(parse_config(
      "kind = schedule_compare\n[graph]\ndepth = 3\n[chain]\nnum_traj = 2000\nhorizon_factor = 3\nsample_intervals = 30",
      {"out=" + s.string()}));
  CHECK(rs.exit_code == 0);
  check_manifest(rs);
  CHECK(slurp(s / "schedule_compare.csv").rfind("time,poisson,poisson_stderr,uniform,uniform_stderr,z\n", 0) == 0);
}

TEST_CASE("oracle verification") {
  SUBCASE("4-vertex path mapping") {
    const fs::path dir = scratch("oracle_path");
    const Report r = run_experiment(parse_config(
        "kind = oracle_verify\n[graph]\nfamily = lattice\ndims = 4\n[oracle]\ncircuit_samples = 10000\n"
        "entropy_circuits = 5\nentropy_gates = 20",
        {"out=" + dir.string()}));
    CHECK(r.exit_code == 0);
    check_manifest(r);
    const auto j = nlohmann::json::parse(r.json)["results"];
    CHECK(j["mapping_equivalence"]["status"] == "pass");
    CHECK(j["mapping_equivalence"]["max_z"].get<double>() <= 4.0);
  }
  SUBCASE("triangle stationarity") {
    const fs::path dir = scratch("oracle_triangle");
    const Report r = run_experiment(parse_config(
        "kind = oracle_verify\n[graph]\nfamily = complete\nn = 3\n[cut]\nside_a = 0\n[oracle]\n"
        "circuit_samples = 2000\nentropy_circuits = 4",
        {"out=" + dir.string()}));
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.json)["results"];
    CHECK(j["stationarity"]["residual_inf"].get<double>() < 1e-12);
  }
  SUBCASE("10-qubit dumbbell entropy increments") {
    const fs::path dir = scratch("oracle_dumbbell");
    const Report r = run_experiment(parse_config(
        "kind = oracle_verify\n[graph]\nfamily = dumbbell\nm = 5\n[oracle]\nentropy_circuits = 10\nentropy_gates = 40",
        {"out=" + dir.string()}));
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.json)["results"];
    CHECK(j["entropy_increments"]["violations"] == 0);
    CHECK(j["mapping_equivalence"]["status"] == "skipped");
  }
  SUBCASE("too many qubits") {
    CHECK_THROWS_AS(run_experiment(parse_config("kind = oracle_verify\n[graph]\ndepth = 4",
                                                {"out=" + scratch("oracle_big").string()})),
                    SizeError);
  }
}

TEST_CASE("table1 smoke profile") {
  Table1Options opt;
  opt.profile = Table1Profile::smoke;
  opt.out_dir = scratch("table1");
  opt.seed = 2;
  const Report r = reproduce_table1(opt);
  CHECK(r.exit_code == 0);
  check_manifest(r);
  const std::string table = slurp(opt.out_dir / "table1.md");
  CHECK(table.find("| binary_tree |") != std::string::npos);
  CHECK(table.find("hyperbolic_3d | log n | not reproduced") != std::string::npos);
  const auto j = nlohmann::json::parse(r.json);
  for (const auto& row : j["rows"]) {
    if (row["row"] == "dumbbell") CHECK(std::abs(row["ent_fit"]["b"].get<double>() - 1.0) < 1e-9);
    if (row["row"] == "binary_tree") CHECK(row["otoc_fit"]["model"] == "log");
  }
  CHECK_THROWS_AS(parse_table1_profile("huge"), ValidationError);
}

TEST_CASE("command-line tool") {
  const char* cli = std::getenv("SCRAMBLE_CLI");
  if (!cli) {
    MESSAGE("SCRAMBLE_CLI not set; skipping");
    return;
  }
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const std::string bin = std::string("\"") + cli + "\"";
  auto run = [&](const std::string& args) {
    const int status = std::system((bin + " " + args + " > \"" + (dir / "stdout.txt").string() + "\" 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(run("graph --family binary_tree --depth 3 --save \"" + (dir / "tree.txt").string() + "\"") == 0);
  CHECK(slurp(dir / "stdout.txt").find("\"diameter\": 6") != std::string::npos);
  CHECK(run("otoc --graph-file \"" + (dir / "tree.txt").string() + "\" --set chain.num_traj=200 --seed 5 --out \"" +
            (dir / "otoc").string() + "\"") == 0);
  CHECK(fs::exists(dir / "otoc" / "report.json"));
  CHECK(run("otoc --set graph.bogus=1") == exit_code::invalid_config);
  CHECK(slurp(dir / "stdout.txt").find("graph.bogus") != std::string::npos);
  CHECK(run("entbound --set graph.family=star") == exit_code::invalid_config);
  CHECK(run("frobnicate") != 0);
}

}
