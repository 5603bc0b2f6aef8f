#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "seacgd/errors.hpp"
#include "seacgd/experiment.hpp"

using namespace seacgd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("seacgd_test_" + name);
  fs::remove_all(p);
  return p;
}

RunTrace trace_with(std::size_t n, const std::string& label = "virtual") {
  RunTrace t;
  t.time_label = label;
  for (std::size_t i = 0; i < n; ++i) t.samples.push_back({double(i) * 0.5, i, -double(i), -double(i) + 0.1, 1.0, Phase::LG});
  return t;
}

const nlohmann::json* find_cell(const nlohmann::json& cells, const std::string& alg, std::uint64_t W, double delay) {
  for (const auto& c : cells)
    if (c["algorithm"] == alg && c["W"] == W && c["expected_delay"].get<double>() == delay) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("config defaults and strict parsing") {
  auto c = ExperimentConfig::from_json({{"experiment", "SaddleEvasion"}});
  CHECK(c.dims == std::vector<std::size_t>{100, 10000, 1000000});
  CHECK_FALSE(c.algorithms.empty());
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "SaddleEvasion"}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "Nope"}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "SaddleEvasion"}, {"dims", "many"}}), ConfigError);
}

TEST_CASE("config round trip") {
  auto c = ExperimentConfig::defaults(ExperimentKind::DelaySweep);
  c.tau = 12;
  c.objective_options["box_radius"] = 1.0;
  const auto j = c.to_json();
  const auto back = ExperimentConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.tau_for(8) == 12);
  CHECK(ExperimentConfig::defaults(ExperimentKind::DelaySweep).tau_for(8) == 16);
  CHECK(ExperimentConfig::defaults(ExperimentKind::Scalability).tau_for(8) == 7);
  CHECK(ExperimentConfig::defaults(ExperimentKind::Scalability).tau_for(1) == 1);
}

TEST_CASE("config validation") {
  auto c = ExperimentConfig::defaults(ExperimentKind::SaddleEvasion);
  c.dims = {20000000};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.allow_large_dims = true;
  CHECK_NOTHROW(c.validate());
  c = ExperimentConfig::defaults(ExperimentKind::SaddleEvasion);
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig::defaults(ExperimentKind::SaddleEvasion);
  c.tau = 1;
  c.workers = {8};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("expand_cells runs SerialGD once per dimension and seed") {
  auto c = ExperimentConfig::defaults(ExperimentKind::SaddleEvasion);
  c.dims = {100};
  c.workers = {2, 4};
  c.expected_delays = {0.0, 0.1};
  c.seeds = {0, 1};
  const auto cells = expand_cells(c);
  std::map<std::string, int> n;
  for (const auto& cell : cells) ++n[to_string(cell.algorithm)];
  CHECK(n["SerialGD"] == 2);
  CHECK(n["SEACGD"] == 8);
  CHECK(n["SyncParallelPGD"] == 8);
  CellSpec s{AlgorithmKind::SEACGD, 100, 4, 3, 0.05, 2};
  CHECK(s.run_id() == "SEACGD_d100_W4_tau3_delay0.05_seed2");
}

TEST_CASE("emit_plot_data") {
  const auto dir = fresh_dir("plot");
  fs::create_directories(dir);
  emit_plot_data({}, (dir / "empty.csv").string());
  CHECK(slurp(dir / "empty.csv") == "run_id,time,j,f,E\n");

  emit_plot_data({{"a", trace_with(5)}}, (dir / "one.csv").string());
  CHECK(count_lines(dir / "one.csv") == 6);

  emit_plot_data({{"a", trace_with(5)}, {"b", trace_with(3)}}, (dir / "two.csv").string());
  CHECK(count_lines(dir / "two.csv") == 9);
  const auto text = slurp(dir / "two.csv");
  CHECK(text.find("\na,") != std::string::npos);
  CHECK(text.find("\nb,") != std::string::npos);
  emit_plot_data({{"a", trace_with(5)}, {"b", trace_with(3)}}, (dir / "two.csv").string());
  CHECK(slurp(dir / "two.csv") == text);

  CHECK_THROWS_AS(emit_plot_data({{"a", trace_with(2)}, {"b", trace_with(2, "wall")}}, (dir / "bad.csv").string()),
                  SchemaError);
}

TEST_CASE("trace CSV round trip") {
  const auto dir = fresh_dir("csv");
  fs::create_directories(dir);
  auto t = trace_with(4);
  t.samples[2].f = 0.1 + 0.2;
  t.write_csv((dir / "t.csv").string());
  const auto back = load_trace_csv((dir / "t.csv").string());
  REQUIRE(back.samples.size() == 4);
  CHECK(back.samples[2].f == 0.1 + 0.2);
  CHECK(back.time_label == "virtual");
  std::ofstream(dir / "junk.csv") << "a,b,c\n";
  CHECK_THROWS_AS(load_trace_csv((dir / "junk.csv").string()), SchemaError);
}

TEST_CASE("unwritable output directory fails before any run") {
  const auto dir = fresh_dir("blocker");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  auto c = ExperimentConfig::defaults(ExperimentKind::SaddleEvasion);
  c.dims = {100};
  c.seeds = {0};
  c.output_dir = (dir / "file" / "sub").string();
  CHECK_THROWS_AS(run_experiment(c), IoError);
}

TEST_CASE("saddle evasion at d=100 and reproducible summaries") {
  const auto dir = fresh_dir("saddle");
  auto c = ExperimentConfig::defaults(ExperimentKind::SaddleEvasion);
  c.dims = {100};
  c.workers = {4};
  c.seeds = {0};
  c.output_dir = dir.string();
  const auto rep = run_experiment(c);
  CHECK(rep.failures == 0);
  for (const auto& cell : rep.summary["cells"]) {
    const double f = cell["final_f"].get<double>();
    if (cell["algorithm"] == "SerialGD") {
      CHECK(f == 0.0);
    } else {
      CHECK(f <= -25.0 + 0.1);
      CHECK(cell["outcome"] == "SecondOrderStationary");
      CHECK(cell["audit"]["age_violations"] == 0);
    }
    CHECK(fs::exists(dir / cell["trace_file"].get<std::string>()));
    CHECK(fs::exists(dir / cell["events_file"].get<std::string>()));
  }
  CHECK(fs::exists(dir / "plot_data.csv"));
  CHECK(fs::exists(dir / "summary.csv"));

  const auto first_json = slurp(dir / "summary.json");
  const auto first_csv = slurp(dir / "summary.csv");
  run_experiment(c);
  CHECK(slurp(dir / "summary.json") == first_json);
  CHECK(slurp(dir / "summary.csv") == first_csv);
  run_experiment(c, 3);
  CHECK(slurp(dir / "summary.json") == first_json);

  // The embedded config re-parses to the same run.
  const auto parsed = nlohmann::json::parse(first_json);
  CHECK(ExperimentConfig::from_json(parsed["config"]).to_json() == c.to_json());
}

TEST_CASE("delay sweep ordering at small scale") {
  const auto dir = fresh_dir("sweep");
  auto c = ExperimentConfig::defaults(ExperimentKind::DelaySweep);
  c.dims = {10000};
  c.workers = {8};
  c.expected_delays = {0.0, 0.05};
  c.seeds = {0};
  c.algorithms = {AlgorithmKind::SEACGD, AlgorithmKind::SyncParallelPGD};
  c.record_events = false;
  c.output_dir = dir.string();
  const auto rep = run_experiment(c);
  REQUIRE(rep.failures == 0);
  const auto& cells = rep.summary["cells"];
  auto ttt = [&](const char* alg, double delay) {
    const auto* cell = find_cell(cells, alg, 8, delay);
    REQUIRE(cell != nullptr);
    REQUIRE((*cell)["reached_target"] == true);
    return (*cell)["time_to_target"].get<double>();
  };
  const double async_factor = ttt("SEACGD", 0.05) / ttt("SEACGD", 0.0);
  const double sync_factor = ttt("SyncParallelPGD", 0.05) / ttt("SyncParallelPGD", 0.0);
  CHECK(async_factor < sync_factor);
}

TEST_CASE("scalability ordering at small scale") {
  const auto dir = fresh_dir("scale");
  auto c = ExperimentConfig::defaults(ExperimentKind::Scalability);
  c.dims = {10000};
  c.workers = {2, 8};
  c.seeds = {0};
  c.algorithms = {AlgorithmKind::SEACGD};
  c.record_events = false;
  c.output_dir = dir.string();
  const auto rep = run_experiment(c);
  REQUIRE(rep.failures == 0);
  const auto* w2 = find_cell(rep.summary["cells"], "SEACGD", 2, 0.0);
  const auto* w8 = find_cell(rep.summary["cells"], "SEACGD", 8, 0.0);
  REQUIRE(w2);
  REQUIRE(w8);
  CHECK((*w8)["time_to_target"].get<double>() < (*w2)["time_to_target"].get<double>());
}

TEST_CASE("CLI exit codes") {
  const std::string bin = BENCH_BIN;
  const auto dir = fresh_dir("cli");
  auto code = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(code(bin + " --help") == 0);
  CHECK(code(bin + " NoSuchExperiment") == 2);
  CHECK(code(bin + " SaddleEvasion --config /nonexistent/cfg.json") == 2);
  CHECK(code(bin + " SaddleEvasion --dim 100 --workers 3 --tau 1") == 2);
  CHECK(code(bin + " SaddleEvasion --dim 100 --workers 2 --seed 0 --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "summary.json"));
  std::ofstream(dir / "blocker") << "x";
  CHECK(code(bin + " SaddleEvasion --dim 100 --seed 0 --out " + (dir / "blocker" / "x").string()) == 1);
}
