#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "greendc/model.hpp"

namespace greendc {

/// Marginal law of one uncertain series. Truncated normals are sampled by
/// rejection on [low, high]; `mean` and `stddev` refer to the untruncated law.
struct Distribution {
  enum class Family { Constant, Uniform, TruncatedNormal };
  Family family = Family::Constant;
  double low = 0.0;
  double high = 0.0;
  double mean = 0.0;
  double stddev = 0.0;

  static Distribution constant(double value);
  static Distribution uniform(double low, double high);
  static Distribution truncated_normal(double mean, double stddev, double low, double high);

  void validate() const;
};

std::string to_string(Distribution::Family family);
Distribution::Family parse_family(const std::string& name);

/// Per-series laws; every slot is drawn independently.
struct ScenarioSpec {
  std::vector<Distribution> demand;            // per node
  std::vector<Distribution> ambient_effect;    // per center
  std::vector<Distribution> price;             // per center
  std::vector<Distribution> carbon_intensity;  // per center

  std::size_t num_nodes() const { return demand.size(); }
  std::size_t num_centers() const { return price.size(); }
  void validate() const;
};

/// Portable generator: the 64-bit Mersenne Twister is fully specified by the
/// standard, while std::*_distribution output is not, so the transforms are
/// written out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1) with 53 random bits
  double uniform(double low, double high);
  double normal();
  double draw(const Distribution& d);
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::vector<UncertaintySample> generate(const ScenarioSpec& spec, std::uint64_t seed,
                                        std::size_t slots);

/// Componentwise extrema widened by `margin` times the observed range on each
/// side. Demand keeps an implicit lower bound of zero and carbon intensity is
/// never widened below zero.
UncertaintyBounds estimate_bounds(const std::vector<UncertaintySample>& samples,
                                  double margin = 0.05);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header `t,alpha_F_<i>...,beta_C_<j>...,gamma_G_<j>...,gamma_E_<j>...`,
/// indices from 0, values written with 17 significant digits.
void save_csv(const std::filesystem::path& path, const std::vector<UncertaintySample>& samples);
void write_csv(std::ostream& out, const std::vector<UncertaintySample>& samples,
               std::size_t nodes, std::size_t centers);
std::vector<UncertaintySample> load_csv(const std::filesystem::path& path);
std::vector<UncertaintySample> read_csv(std::istream& in);

/// Queue caps for the comparison policies that need them.
struct BaselineCaps {
  double front_cap = 90.0;  // per node
  double back_cap = 70.0;   // per center
  void validate() const;
};

/// Everything a run needs besides the data and the tuned parameters.
struct Experiment {
  SystemConfig system;
  ScenarioSpec scenario;
  BaselineCaps caps;
  std::uint64_t seed = 1;
  std::size_t slots = 10000;
  std::size_t train_slots = 1000;
  double bounds_margin = 0.05;
  double v_max = 1e6;
  double strict_margin = 0.0;

  void validate() const;
};

/// Two mapping nodes feeding three data centers with cheap-but-dirty to
/// expensive-but-clean grid supply, a 1.2 tCO2 per slot emission cap and
/// 90 / 70 queue caps.
Experiment default_experiment();

}  // namespace greendc
