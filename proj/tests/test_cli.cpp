#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "greendc/serialization.hpp"
#include "greendc/tuning.hpp"

using namespace greendc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("greendc_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& file) const { return (dir / file).string(); }
  std::string write(const std::string& file, const std::string& text) const {
    const auto path = dir / file;
    std::ofstream(path) << text;
    return path.string();
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help lists every command and flag") {
  const Run r = cli({"--help"});
  CHECK(r.code == 0);
  for (const char* cmd : {"init", "generate", "tune", "run", "compare", "sweep"}) {
    CHECK(r.out.find(cmd) != std::string::npos);
  }
  const Run all = cli({"--help-all"});
  for (const char* flag : {"--config", "--data", "--params", "--seed", "--train-slots", "--jobs", "--out"}) {
    CHECK(all.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("unknown command and missing flags fail") {
  CHECK(cli({}).code != 0);
  CHECK(cli({"frobnicate"}).code != 0);
  CHECK(cli({"generate"}).code != 0);
}

TEST_CASE("generate is deterministic per seed") {
  Scratch s("generate");
  REQUIRE(cli({"generate", "--slots", "200", "--seed", "9", "--out", s / "a.csv"}).code == 0);
  REQUIRE(cli({"generate", "--slots", "200", "--seed", "9", "--out", s / "b.csv"}).code == 0);
  REQUIRE(cli({"generate", "--slots", "200", "--seed", "10", "--out", s / "c.csv"}).code == 0);
  CHECK(slurp(s / "a.csv") == slurp(s / "b.csv"));
  CHECK(slurp(s / "a.csv") != slurp(s / "c.csv"));
  CHECK(line_count(slurp(s / "a.csv")) == 201);
}

TEST_CASE("generate rejects an empty horizon") {
  Scratch s("generate_zero");
  const Run r = cli({"generate", "--slots", "0", "--out", s / "a.csv"});
  CHECK(r.code != 0);
  CHECK(r.err.find("slots") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "a.csv"));
}

TEST_CASE("default generation has the full horizon") {
  Scratch s("generate_default");
  REQUIRE(cli({"generate", "--out", s / "a.csv"}).code == 0);
  CHECK(line_count(slurp(s / "a.csv")) == 10001);
}

TEST_CASE("config precedence: flag over file over default") {
  Scratch s("precedence");
  const auto cfg = s.write("cfg.json", R"({"seed": 4, "slots": 50})");
  REQUIRE(cli({"generate", "--config", cfg, "--out", s / "file.csv"}).code == 0);
  REQUIRE(cli({"generate", "--seed", "4", "--slots", "50", "--out", s / "flag.csv"}).code == 0);
  CHECK(slurp(s / "file.csv") == slurp(s / "flag.csv"));
  REQUIRE(cli({"generate", "--config", cfg, "--slots", "20", "--out", s / "over.csv"}).code == 0);
  CHECK(line_count(slurp(s / "over.csv")) == 21);
  REQUIRE(cli({"init", "--config", cfg, "--seed", "8", "--out", s / "eff.json"}).code == 0);
  const Json eff = load_json(s / "eff.json");
  CHECK(eff.at("seed") == 8);
  CHECK(eff.at("slots") == 50);
  CHECK(eff.at("train_slots") == 1000);
}

TEST_CASE("tuned parameters satisfy the feasibility conditions and rerun identically") {
  Scratch s("tune");
  REQUIRE(cli({"generate", "--slots", "1500", "--out", s / "data.csv"}).code == 0);
  REQUIRE(cli({"tune", "--data", s / "data.csv", "--out", s / "p1.json", "--history-csv", s / "h.csv"}).code == 0);
  REQUIRE(cli({"tune", "--data", s / "data.csv", "--out", s / "p2.json"}).code == 0);
  CHECK(slurp(s / "p1.json") == slurp(s / "p2.json"));
  const Json j = load_json(s / "p1.json");
  const StrategyParams p = params_from_json(j.at("params"));
  const UncertaintyBounds b = bounds_from_json(j.at("bounds"));
  const SystemConfig c = default_experiment().system;
  for (double r : constraint_residuals(c, b, p)) CHECK(r >= -1e-8);
  CHECK(j.at("converged") == true);
  CHECK(line_count(slurp(s / "h.csv")) == 1 + j.at("history").size());
}

TEST_CASE("a cap that never binds tunes to a zero queue cap") {
  Scratch s("tune_loose");
  const auto cfg = s.write("cfg.json", R"({"system": {"emission_cap_tCO2_per_slot": 1000000}})");
  REQUIRE(cli({"generate", "--slots", "1200", "--out", s / "data.csv"}).code == 0);
  REQUIRE(cli({"tune", "--config", cfg, "--data", s / "data.csv", "--out", s / "p.json"}).code == 0);
  CHECK(load_json(s / "p.json").at("params").at("emission_queue_cap") == 0.0);
}

TEST_CASE("infeasible tuning exits nonzero with the reason") {
  Scratch s("tune_bad");
  const auto cfg = s.write("cfg.json", R"({"system": {"temp_max_degC": [17, 17, 17]}})");
  REQUIRE(cli({"generate", "--slots", "1200", "--out", s / "data.csv"}).code == 0);
  const Run r = cli({"tune", "--config", cfg, "--data", s / "data.csv", "--out", s / "p.json"});
  CHECK(r.code != 0);
  CHECK(r.err.find("no feasible strategy parameters") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "p.json"));
}

TEST_CASE("run writes a report and a trace") {
  Scratch s("run");
  REQUIRE(cli({"generate", "--slots", "1300", "--out", s / "data.csv"}).code == 0);
  REQUIRE(cli({"tune", "--data", s / "data.csv", "--out", s / "p.json"}).code == 0);
  REQUIRE(cli({"run", "--data", s / "data.csv", "--params", s / "p.json", "--out", s / "r.json",
               "--trace", s / "t.csv"}).code == 0);
  const Json r = load_json(s / "r.json");
  CHECK(r.at("violation_count") == 0);
  CHECK(r.at("window_end").get<std::size_t>() - r.at("window_begin").get<std::size_t>() == 300);
  CHECK(line_count(slurp(s / "t.csv")) == 301);
  CHECK(cli({"run", "--data", s / "data.csv", "--out", s / "r.json"}).code != 0);
}

TEST_CASE("compare writes one row per requested variant in the cost order") {
  Scratch s("compare");
  const auto cfg = s.write("cfg.json", R"({"slots": 3000})");
  REQUIRE(cli({"generate", "--config", cfg, "--out", s / "data.csv"}).code == 0);
  REQUIRE(cli({"tune", "--config", cfg, "--data", s / "data.csv", "--out", s / "p.json"}).code == 0);
  REQUIRE(cli({"compare", "--config", cfg, "--data", s / "data.csv", "--params", s / "p.json",
               "--variants", "C1,proposed,C2", "--jobs", "2", "--out", s / "cmp.csv",
               "--json", s / "cmp.json"}).code == 0);
  std::istringstream csv(slurp(s / "cmp.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line ==
        "variant,cost_rate_usd_per_slot,emission_rate_tCO2_per_slot,cost_standard_error,"
        "emission_standard_error,violations");
  std::vector<std::string> names;
  std::vector<double> cost, emission;
  while (std::getline(csv, line)) {
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    names.push_back(cell);
    std::getline(row, cell, ',');
    cost.push_back(std::stod(cell));
    std::getline(row, cell, ',');
    emission.push_back(std::stod(cell));
  }
  REQUIRE(names == std::vector<std::string>{"C1", "proposed", "C2"});
  CHECK(cost[0] < cost[1]);
  CHECK(cost[1] < cost[2]);
  CHECK(emission[1] <= default_experiment().system.emission_cap);
  CHECK(load_json(s / "cmp.json").size() == 3);
}

TEST_CASE("compare without parameters for the proposed policy fails") {
  Scratch s("compare_missing");
  REQUIRE(cli({"generate", "--slots", "1100", "--out", s / "data.csv"}).code == 0);
  const Run r = cli({"compare", "--data", s / "data.csv", "--variants", "proposed", "--out", s / "c.csv"});
  CHECK(r.code != 0);
  CHECK(r.err.find("--params") != std::string::npos);
  CHECK(cli({"compare", "--data", s / "data.csv", "--variants", "C7", "--out", s / "c.csv"}).code != 0);
}

TEST_CASE("sweep writes one row per value and flags failures") {
  Scratch s("sweep");
  REQUIRE(cli({"generate", "--slots", "1400", "--out", s / "data.csv"}).code == 0);
  const Run ok = cli({"sweep", "--data", s / "data.csv", "--axis", "QE", "--values", "10,30",
                      "--out", s / "q.csv"});
  CHECK(ok.code == 0);
  CHECK(line_count(slurp(s / "q.csv")) == 3);
  const Run partial = cli({"sweep", "--data", s / "data.csv", "--axis", "QE", "--values",
                           "10,1000000", "--out", s / "bad.csv"});
  CHECK(partial.code == 3);
  CHECK(slurp(s / "bad.csv").find("failed") != std::string::npos);
  CHECK(cli({"sweep", "--data", s / "data.csv", "--axis", "QE", "--values", "30,10",
             "--out", s / "x.csv"}).code != 0);
}

}  // TEST_SUITE
