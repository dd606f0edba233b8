#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "greendc/scenario.hpp"

using namespace greendc;

namespace {

ScenarioSpec uniform_spec(double lo, double hi) {
  ScenarioSpec s;
  s.demand = {Distribution::uniform(lo, hi)};
  s.ambient_effect = {Distribution::truncated_normal(-0.5, 0.3, -1.0, 0.0)};
  s.price = {Distribution::uniform(10.0, 60.0)};
  s.carbon_intensity = {Distribution::uniform(0.0, 0.5)};
  return s;
}

bool same(const std::vector<UncertaintySample>& a, const std::vector<UncertaintySample>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].demand != b[t].demand || a[t].ambient_effect != b[t].ambient_effect ||
        a[t].price != b[t].price || a[t].carbon_intensity != b[t].carbon_intensity) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("same seed, same samples") {
  const ScenarioSpec spec = default_experiment().scenario;
  CHECK(same(generate(spec, 42, 500), generate(spec, 42, 500)));
  CHECK_FALSE(same(generate(spec, 42, 500), generate(spec, 43, 500)));
}

TEST_CASE("engine output is pinned") {
  // The 64-bit Mersenne Twister's 10000th output is fixed by the standard.
  std::mt19937_64 engine;
  engine.discard(9999);
  CHECK(engine() == 9981545732273789042ULL);
  Rng rng(5489);
  CHECK(rng.uniform() == static_cast<double>(14514284786278117030ULL >> 11) * 0x1.0p-53);
}

TEST_CASE("uniform support and mean") {
  const auto samples = generate(uniform_spec(2.0, 4.0), 9, 10000);
  double lo = 1e9, hi = -1e9, sum = 0.0;
  for (const auto& s : samples) {
    lo = std::min(lo, s.demand(0));
    hi = std::max(hi, s.demand(0));
    sum += s.demand(0);
  }
  CHECK(lo >= 2.0);
  CHECK(hi <= 4.0);
  // Standard error of the mean is sqrt(1/3 / 10000) ~ 0.0058; 0.05 is over 8 of them.
  CHECK(std::abs(sum / 10000.0 - 3.0) <= 0.05);
}

TEST_CASE("truncated normal stays in its support and is nonnegative where required") {
  const auto samples = generate(default_experiment().scenario, 4, 5000);
  for (const auto& s : samples) {
    CHECK((s.demand.array() >= 0.0).all());
    CHECK((s.demand.array() <= 3.0).all());
    CHECK((s.ambient_effect.array() >= -1.0).all());
    CHECK((s.ambient_effect.array() <= -0.1).all());
    CHECK((s.carbon_intensity.array() >= 0.0).all());
  }
}

TEST_CASE("degenerate truncation falls back to the interval") {
  Distribution d = Distribution::truncated_normal(0.0, 0.01, 5.0, 6.0);
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const double x = rng.draw(d);
    CHECK(x >= 5.0);
    CHECK(x <= 6.0);
  }
}

TEST_CASE("invalid distributions and horizons are rejected") {
  CHECK_THROWS_AS(Distribution::uniform(2.0, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::truncated_normal(0.0, -1.0, 0.0, 1.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_family("lognormal"), std::invalid_argument);
  CHECK(parse_family("truncated_normal") == Distribution::Family::TruncatedNormal);
  CHECK_THROWS_AS(generate(uniform_spec(0.0, 1.0), 1, 0), std::invalid_argument);
}

TEST_CASE("bounds of a constant series") {
  ScenarioSpec spec = uniform_spec(2.0, 4.0);
  spec.price = {Distribution::constant(25.0)};
  const auto samples = generate(spec, 3, 100);
  const auto b = estimate_bounds(samples, 0.05);
  CHECK(b.price_min(0) == 25.0);
  CHECK(b.price_max(0) == 25.0);
}

TEST_CASE("zero margin gives the observed extrema") {
  const auto samples = generate(uniform_spec(2.0, 4.0), 3, 300);
  const auto b = estimate_bounds(samples, 0.0);
  double hi = -1e9, cmin = 1e9, amin = 1e9, amax = -1e9;
  for (const auto& s : samples) {
    hi = std::max(hi, s.demand(0));
    cmin = std::min(cmin, s.carbon_intensity(0));
    amin = std::min(amin, s.ambient_effect(0));
    amax = std::max(amax, s.ambient_effect(0));
  }
  CHECK(b.demand_max(0) == hi);
  CHECK(b.carbon_min(0) == cmin);
  CHECK(b.ambient_min(0) == amin);
  CHECK(b.ambient_max(0) == amax);
  for (const auto& s : samples) CHECK(b.contains(s));
}

TEST_CASE("held-out draws rarely escape widened bounds") {
  const ScenarioSpec spec = default_experiment().scenario;
  const auto b = estimate_bounds(generate(spec, 1, 1000), 0.05);
  std::size_t outside = 0;
  const auto held_out = generate(spec, 2, 9000);
  for (const auto& s : held_out) outside += b.contains(s) ? 0 : 1;
  CHECK(static_cast<double>(outside) / 9000.0 <= 0.001);
}

TEST_CASE("csv round trip is exact") {
  const auto samples = generate(default_experiment().scenario, 8, 100);
  const auto path = std::filesystem::temp_directory_path() / "greendc_roundtrip.csv";
  save_csv(path, samples);
  CHECK(same(load_csv(path), samples));
  std::filesystem::remove(path);
}

TEST_CASE("csv header and empty data") {
  std::ostringstream out;
  write_csv(out, {}, 2, 3);
  CHECK(out.str() ==
        "t,alpha_F_0,alpha_F_1,beta_C_0,beta_C_1,beta_C_2,gamma_G_0,gamma_G_1,gamma_G_2,"
        "gamma_E_0,gamma_E_1,gamma_E_2\n");
  std::istringstream in(out.str());
  CHECK(read_csv(in).empty());
}

TEST_CASE("malformed rows name their location") {
  std::istringstream bad_cell("t,alpha_F_0,beta_C_0,gamma_G_0,gamma_E_0\n0,1,2,3,0.5\n1,1,x,3,0.5\n");
  try {
    read_csv(bad_cell);
    FAIL("expected a parse error");
  } catch (const CsvError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("beta_C_0") != std::string::npos);
  }
  std::istringstream short_row("t,alpha_F_0,beta_C_0,gamma_G_0,gamma_E_0\n0,1,2\n");
  CHECK_THROWS_AS(read_csv(short_row), CsvError);
  std::istringstream bad_header("t,demand,beta_C_0,gamma_G_0,gamma_E_0\n");
  CHECK_THROWS_AS(read_csv(bad_header), CsvError);
}

TEST_CASE("default experiment is consistent") {
  const Experiment e = default_experiment();
  CHECK_NOTHROW(e.validate());
  CHECK(e.system.num_nodes() == 2);
  CHECK(e.system.num_centers() == 3);
  CHECK(e.system.emission_cap == 1.2);
  CHECK(e.caps.front_cap == 90.0);
  CHECK(e.caps.back_cap == 70.0);
  CHECK(e.slots == 10000);
  CHECK(e.train_slots == 1000);
}

}  // TEST_SUITE
