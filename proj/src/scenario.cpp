#include "greendc/scenario.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace greendc {

namespace {

constexpr int kMaxRejections = 10000;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

Distribution Distribution::constant(double value) {
  return Distribution{Family::Constant, value, value, value, 0.0};
}

Distribution Distribution::uniform(double low, double high) {
  return Distribution{Family::Uniform, low, high, 0.5 * (low + high), 0.0};
}

Distribution Distribution::truncated_normal(double mean, double stddev, double low, double high) {
  return Distribution{Family::TruncatedNormal, low, high, mean, stddev};
}

void Distribution::validate() const {
  switch (family) {
    case Family::Constant:
      require(std::isfinite(mean), "constant distribution needs a finite value");
      break;
    case Family::Uniform:
      require(std::isfinite(low) && std::isfinite(high) && low <= high,
              "uniform distribution needs finite low <= high");
      break;
    case Family::TruncatedNormal:
      require(std::isfinite(low) && std::isfinite(high) && low <= high,
              "truncated normal needs finite low <= high");
      require(std::isfinite(mean) && std::isfinite(stddev) && stddev >= 0.0,
              "truncated normal needs finite mean and nonnegative stddev");
      break;
  }
}

std::string to_string(Distribution::Family family) {
  switch (family) {
    case Distribution::Family::Constant: return "constant";
    case Distribution::Family::Uniform: return "uniform";
    case Distribution::Family::TruncatedNormal: return "truncated_normal";
  }
  return "unknown";
}

Distribution::Family parse_family(const std::string& name) {
  if (name == "constant") return Distribution::Family::Constant;
  if (name == "uniform") return Distribution::Family::Uniform;
  if (name == "truncated_normal") return Distribution::Family::TruncatedNormal;
  throw std::invalid_argument("unsupported distribution family '" + name + "'");
}

void ScenarioSpec::validate() const {
  require(!demand.empty(), "scenario needs at least one mapping node");
  require(!price.empty(), "scenario needs at least one data center");
  require(ambient_effect.size() == price.size() && carbon_intensity.size() == price.size(),
          "per-center series must have equal length");
  for (const auto& d : demand) {
    d.validate();
    require(d.family == Distribution::Family::Constant ? d.mean >= 0.0 : d.low >= 0.0,
            "demand support must be nonnegative");
  }
  for (const auto& d : ambient_effect) d.validate();
  for (const auto& d : price) d.validate();
  for (const auto& d : carbon_intensity) {
    d.validate();
    require(d.family == Distribution::Family::Constant ? d.mean >= 0.0 : d.low >= 0.0,
            "carbon intensity support must be nonnegative");
  }
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double low, double high) {
  return low + (high - low) * uniform();
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar form of Box-Muller.
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double Rng::draw(const Distribution& d) {
  switch (d.family) {
    case Distribution::Family::Constant:
      return d.mean;
    case Distribution::Family::Uniform:
      return uniform(d.low, d.high);
    case Distribution::Family::TruncatedNormal: {
      if (d.stddev == 0.0) return std::clamp(d.mean, d.low, d.high);
      for (int k = 0; k < kMaxRejections; ++k) {
        const double x = d.mean + d.stddev * normal();
        if (x >= d.low && x <= d.high) return x;
      }
      // Support far in the tail: fall back to uniform on the support.
      return uniform(d.low, d.high);
    }
  }
  return 0.0;
}

std::vector<UncertaintySample> generate(const ScenarioSpec& spec, std::uint64_t seed,
                                        std::size_t slots) {
  spec.validate();
  require(slots >= 1, "number of slots must be at least 1");
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(spec.num_nodes());
  const auto m = static_cast<Eigen::Index>(spec.num_centers());
  std::vector<UncertaintySample> out(slots);
  for (auto& s : out) {
    s.demand.resize(n);
    s.ambient_effect.resize(m);
    s.price.resize(m);
    s.carbon_intensity.resize(m);
    for (Eigen::Index i = 0; i < n; ++i) s.demand(i) = rng.draw(spec.demand[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      s.ambient_effect(j) = rng.draw(spec.ambient_effect[jj]);
      s.price(j) = rng.draw(spec.price[jj]);
      s.carbon_intensity(j) = rng.draw(spec.carbon_intensity[jj]);
    }
  }
  return out;
}

UncertaintyBounds estimate_bounds(const std::vector<UncertaintySample>& samples, double margin) {
  require(!samples.empty(), "bounds estimation needs at least one sample");
  require(std::isfinite(margin) && margin >= 0.0, "bounds margin must be nonnegative");
  const auto& first = samples.front();
  Vector demand_lo = first.demand, demand_hi = first.demand;
  UncertaintyBounds b;
  b.ambient_min = b.ambient_max = first.ambient_effect;
  b.price_min = b.price_max = first.price;
  b.carbon_min = b.carbon_max = first.carbon_intensity;
  for (const auto& s : samples) {
    demand_lo = demand_lo.cwiseMin(s.demand);
    demand_hi = demand_hi.cwiseMax(s.demand);
    b.ambient_min = b.ambient_min.cwiseMin(s.ambient_effect);
    b.ambient_max = b.ambient_max.cwiseMax(s.ambient_effect);
    b.price_min = b.price_min.cwiseMin(s.price);
    b.price_max = b.price_max.cwiseMax(s.price);
    b.carbon_min = b.carbon_min.cwiseMin(s.carbon_intensity);
    b.carbon_max = b.carbon_max.cwiseMax(s.carbon_intensity);
  }
  auto widen = [margin](Vector& lo, Vector& hi) {
    const Vector pad = margin * (hi - lo);
    lo -= pad;
    hi += pad;
  };
  widen(demand_lo, demand_hi);
  widen(b.ambient_min, b.ambient_max);
  widen(b.price_min, b.price_max);
  widen(b.carbon_min, b.carbon_max);
  b.demand_max = demand_hi;
  b.carbon_min = b.carbon_min.cwiseMax(0.0);
  return b;
}

void write_csv(std::ostream& out, const std::vector<UncertaintySample>& samples,
               std::size_t nodes, std::size_t centers) {
  out << 't';
  for (std::size_t i = 0; i < nodes; ++i) out << ",alpha_F_" << i;
  for (const char* prefix : {"beta_C_", "gamma_G_", "gamma_E_"}) {
    for (std::size_t j = 0; j < centers; ++j) out << ',' << prefix << j;
  }
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto& s = samples[t];
    if (static_cast<std::size_t>(s.demand.size()) != nodes ||
        static_cast<std::size_t>(s.price.size()) != centers ||
        static_cast<std::size_t>(s.ambient_effect.size()) != centers ||
        static_cast<std::size_t>(s.carbon_intensity.size()) != centers) {
      throw std::invalid_argument("sample " + std::to_string(t) + " has inconsistent dimensions");
    }
    out << t;
    for (double v : s.demand) out << ',' << v;
    for (double v : s.ambient_effect) out << ',' << v;
    for (double v : s.price) out << ',' << v;
    for (double v : s.carbon_intensity) out << ',' << v;
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const std::vector<UncertaintySample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::size_t nodes = samples.empty() ? 0 : static_cast<std::size_t>(samples[0].demand.size());
  const std::size_t centers = samples.empty() ? 0 : static_cast<std::size_t>(samples[0].price.size());
  write_csv(out, samples, nodes, centers);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t k = 0;
  while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
  return s.substr(k);
}

// Parses `<prefix><index>` columns in order and returns how many there are.
std::size_t count_prefixed(const std::vector<std::string>& header, std::size_t& pos,
                           const std::string& prefix) {
  std::size_t count = 0;
  while (pos < header.size() && header[pos].rfind(prefix, 0) == 0) {
    if (header[pos] != prefix + std::to_string(count)) {
      throw CsvError("header column " + std::to_string(pos) + ": expected '" + prefix +
                     std::to_string(count) + "', found '" + header[pos] + "'");
    }
    ++count;
    ++pos;
  }
  return count;
}

}  // namespace

std::vector<UncertaintySample> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  auto header = split(trim(line));
  for (auto& h : header) h = trim(h);
  if (header.empty() || header[0] != "t") throw CsvError("header row must start with column 't'");
  std::size_t pos = 1;
  const std::size_t nodes = count_prefixed(header, pos, "alpha_F_");
  const std::size_t c1 = count_prefixed(header, pos, "beta_C_");
  const std::size_t c2 = count_prefixed(header, pos, "gamma_G_");
  const std::size_t c3 = count_prefixed(header, pos, "gamma_E_");
  if (pos != header.size()) {
    throw CsvError("header column " + std::to_string(pos) + ": unexpected '" + header[pos] + "'");
  }
  if (c1 != c2 || c2 != c3) throw CsvError("header: per-center column groups differ in length");
  const std::size_t centers = c1;
  const std::size_t width = 1 + nodes + 3 * centers;

  std::vector<UncertaintySample> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width) {
      throw CsvError("row " + std::to_string(row) + ": expected " + std::to_string(width) +
                     " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string cell = trim(cells[c]);
      // strtod rather than from_chars: the latter lacks double support in
      // some standard libraries still in use.
      char* end = nullptr;
      errno = 0;
      values[c] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE ||
          !std::isfinite(values[c])) {
        throw CsvError("row " + std::to_string(row) + ", column " + std::to_string(c) + " ('" +
                       header[c] + "'): not a finite number: '" + cell + "'");
      }
    }
    UncertaintySample s;
    s.demand.resize(static_cast<Eigen::Index>(nodes));
    s.ambient_effect.resize(static_cast<Eigen::Index>(centers));
    s.price.resize(static_cast<Eigen::Index>(centers));
    s.carbon_intensity.resize(static_cast<Eigen::Index>(centers));
    std::size_t c = 1;
    for (Eigen::Index i = 0; i < s.demand.size(); ++i) s.demand(i) = values[c++];
    for (Eigen::Index j = 0; j < s.ambient_effect.size(); ++j) s.ambient_effect(j) = values[c++];
    for (Eigen::Index j = 0; j < s.price.size(); ++j) s.price(j) = values[c++];
    for (Eigen::Index j = 0; j < s.carbon_intensity.size(); ++j) s.carbon_intensity(j) = values[c++];
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<UncertaintySample> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

void BaselineCaps::validate() const {
  require(std::isfinite(front_cap) && front_cap >= 0.0, "front queue cap must be nonnegative");
  require(std::isfinite(back_cap) && back_cap >= 0.0, "back queue cap must be nonnegative");
}

void Experiment::validate() const {
  system.validate();
  scenario.validate();
  caps.validate();
  require(scenario.num_nodes() == system.num_nodes() &&
              scenario.num_centers() == system.num_centers(),
          "scenario dimensions do not match the system");
  require(slots >= 1, "number of slots must be at least 1");
  // Checked against the data length when a data file is split.
  require(train_slots >= 1, "training slots must be at least 1");
  require(std::isfinite(bounds_margin) && bounds_margin >= 0.0,
          "bounds margin must be nonnegative");
  require(std::isfinite(v_max) && v_max > 0.0, "V cap must be positive");
  require(std::isfinite(strict_margin) && strict_margin >= 0.0,
          "strict margin must be nonnegative");
}

Experiment default_experiment() {
  Experiment e;
  auto& s = e.system;
  const Eigen::Index n = 2, m = 3;
  s.link_capacity = Matrix::Constant(n, m, 3.0);
  s.it_capacity = Vector::Constant(m, 4.0);
  s.charge_capacity = Vector::Constant(m, 2.0);
  s.discharge_capacity = Vector::Constant(m, 2.0);
  s.energy_min = Vector::Constant(m, 2.0);
  s.energy_max = Vector::Constant(m, 62.0);
  s.charge_efficiency = Vector::Constant(m, 0.95);
  s.discharge_efficiency = Vector::Constant(m, 0.95);
  s.cooling_capacity = Vector::Constant(m, 0.875);
  s.temp_min = Vector::Constant(m, 15.0);
  s.temp_max = Vector::Constant(m, 35.0);
  s.heat_coeff = Vector::Constant(m, 0.5);
  s.cool_coeff = Vector::Constant(m, 4.0);
  s.transfer_cost.resize(n, m);
  s.transfer_cost << 2.0, 5.0, 8.0,
                     8.0, 5.0, 2.0;
  s.rejection_penalty = Vector::Constant(n, 300.0);
  s.storage_wear = Vector::Constant(m, 5.0);
  s.emission_cap = 1.2;

  auto& sc = e.scenario;
  sc.demand.assign(2, Distribution::truncated_normal(1.25, 0.6, 0.0, 3.0));
  sc.ambient_effect.assign(3, Distribution::truncated_normal(-0.5, 0.3, -1.0, -0.1));
  sc.price = {Distribution::uniform(10.0, 60.0), Distribution::uniform(15.0, 65.0),
              Distribution::uniform(20.0, 70.0)};
  sc.carbon_intensity = {Distribution::uniform(0.4, 0.64), Distribution::uniform(0.24, 0.48),
                         Distribution::uniform(0.0, 0.32)};
  return e;
}

}  // namespace greendc
