#include "greendc/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace greendc {

namespace {

Json vec(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json mat(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

Vector to_vector(const Json& j, const std::string& name) {
  if (!j.is_array()) throw std::invalid_argument(name + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw std::invalid_argument(name + ": entry " + std::to_string(k) +
                                                       " is not a number");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

Matrix to_matrix(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(name + ": expected a nonempty matrix");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], name + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw std::invalid_argument(name + ": rows differ in length");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

void take(const Json& j, const char* key, Vector& out) {
  if (j.contains(key)) out = to_vector(j.at(key), key);
}

void take(const Json& j, const char* key, Matrix& out) {
  if (j.contains(key)) out = to_matrix(j.at(key), key);
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// JSON has no infinity; NaN and infinities are written as null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const SystemConfig& c) {
  Json j;
  j["link_capacity_per_slot"] = mat(c.link_capacity);
  j["it_capacity_per_slot"] = vec(c.it_capacity);
  j["charge_capacity_MW"] = vec(c.charge_capacity);
  j["discharge_capacity_MW"] = vec(c.discharge_capacity);
  j["energy_min_MWh"] = vec(c.energy_min);
  j["energy_max_MWh"] = vec(c.energy_max);
  j["charge_efficiency"] = vec(c.charge_efficiency);
  j["discharge_efficiency"] = vec(c.discharge_efficiency);
  j["cooling_capacity_MW"] = vec(c.cooling_capacity);
  j["temp_min_degC"] = vec(c.temp_min);
  j["temp_max_degC"] = vec(c.temp_max);
  j["heat_coeff_degC_per_unit"] = vec(c.heat_coeff);
  j["cool_coeff_degC_per_MW"] = vec(c.cool_coeff);
  j["transfer_cost_usd_per_unit"] = mat(c.transfer_cost);
  j["rejection_penalty_usd_per_unit"] = vec(c.rejection_penalty);
  j["storage_wear_usd_per_MWh"] = vec(c.storage_wear);
  j["emission_cap_tCO2_per_slot"] = c.emission_cap;
  return j;
}

void merge_json(const Json& j, SystemConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("system: expected an object");
  take(j, "link_capacity_per_slot", c.link_capacity);
  take(j, "it_capacity_per_slot", c.it_capacity);
  take(j, "charge_capacity_MW", c.charge_capacity);
  take(j, "discharge_capacity_MW", c.discharge_capacity);
  take(j, "energy_min_MWh", c.energy_min);
  take(j, "energy_max_MWh", c.energy_max);
  take(j, "charge_efficiency", c.charge_efficiency);
  take(j, "discharge_efficiency", c.discharge_efficiency);
  take(j, "cooling_capacity_MW", c.cooling_capacity);
  take(j, "temp_min_degC", c.temp_min);
  take(j, "temp_max_degC", c.temp_max);
  take(j, "heat_coeff_degC_per_unit", c.heat_coeff);
  take(j, "cool_coeff_degC_per_MW", c.cool_coeff);
  take(j, "transfer_cost_usd_per_unit", c.transfer_cost);
  take(j, "rejection_penalty_usd_per_unit", c.rejection_penalty);
  take(j, "storage_wear_usd_per_MWh", c.storage_wear);
  take(j, "emission_cap_tCO2_per_slot", c.emission_cap);
}

Json to_json(const Distribution& d) {
  Json j;
  j["family"] = to_string(d.family);
  switch (d.family) {
    case Distribution::Family::Constant:
      j["value"] = d.mean;
      break;
    case Distribution::Family::Uniform:
      j["low"] = d.low;
      j["high"] = d.high;
      break;
    case Distribution::Family::TruncatedNormal:
      j["mean"] = d.mean;
      j["stddev"] = d.stddev;
      j["low"] = d.low;
      j["high"] = d.high;
      break;
  }
  return j;
}

Distribution distribution_from_json(const Json& j) {
  const auto family = parse_family(j.at("family").get<std::string>());
  Distribution d;
  switch (family) {
    case Distribution::Family::Constant:
      d = Distribution::constant(j.at("value").get<double>());
      break;
    case Distribution::Family::Uniform:
      d = Distribution::uniform(j.at("low").get<double>(), j.at("high").get<double>());
      break;
    case Distribution::Family::TruncatedNormal:
      d = Distribution::truncated_normal(j.at("mean").get<double>(), j.at("stddev").get<double>(),
                                         j.at("low").get<double>(), j.at("high").get<double>());
      break;
  }
  d.validate();
  return d;
}

namespace {

Json dists(const std::vector<Distribution>& v) {
  Json a = Json::array();
  for (const auto& d : v) a.push_back(to_json(d));
  return a;
}

std::vector<Distribution> dists_from(const Json& j, const char* key) {
  std::vector<Distribution> out;
  for (const auto& e : j.at(key)) out.push_back(distribution_from_json(e));
  return out;
}

}  // namespace

Json to_json(const ScenarioSpec& s) {
  Json j;
  j["demand_per_slot"] = dists(s.demand);
  j["ambient_effect_degC_per_slot"] = dists(s.ambient_effect);
  j["price_usd_per_MWh"] = dists(s.price);
  j["carbon_intensity_tCO2_per_MWh"] = dists(s.carbon_intensity);
  return j;
}

ScenarioSpec scenario_from_json(const Json& j) {
  ScenarioSpec s;
  s.demand = dists_from(j, "demand_per_slot");
  s.ambient_effect = dists_from(j, "ambient_effect_degC_per_slot");
  s.price = dists_from(j, "price_usd_per_MWh");
  s.carbon_intensity = dists_from(j, "carbon_intensity_tCO2_per_MWh");
  s.validate();
  return s;
}

Json to_json(const UncertaintyBounds& b) {
  Json j;
  j["demand_max"] = vec(b.demand_max);
  j["ambient_min"] = vec(b.ambient_min);
  j["ambient_max"] = vec(b.ambient_max);
  j["price_min"] = vec(b.price_min);
  j["price_max"] = vec(b.price_max);
  j["carbon_min"] = vec(b.carbon_min);
  j["carbon_max"] = vec(b.carbon_max);
  return j;
}

UncertaintyBounds bounds_from_json(const Json& j) {
  UncertaintyBounds b;
  b.demand_max = to_vector(j.at("demand_max"), "demand_max");
  b.ambient_min = to_vector(j.at("ambient_min"), "ambient_min");
  b.ambient_max = to_vector(j.at("ambient_max"), "ambient_max");
  b.price_min = to_vector(j.at("price_min"), "price_min");
  b.price_max = to_vector(j.at("price_max"), "price_max");
  b.carbon_min = to_vector(j.at("carbon_min"), "carbon_min");
  b.carbon_max = to_vector(j.at("carbon_max"), "carbon_max");
  return b;
}

Json to_json(const Experiment& e) {
  Json j;
  j["system"] = to_json(e.system);
  j["scenario"] = to_json(e.scenario);
  j["caps"] = {{"front_cap_per_node", e.caps.front_cap}, {"back_cap_per_center", e.caps.back_cap}};
  j["seed"] = e.seed;
  j["slots"] = e.slots;
  j["train_slots"] = e.train_slots;
  j["bounds_margin"] = e.bounds_margin;
  j["v_max"] = e.v_max;
  j["strict_margin"] = e.strict_margin;
  return j;
}

Experiment experiment_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  Experiment e = default_experiment();
  if (j.contains("system")) merge_json(j.at("system"), e.system);
  if (j.contains("scenario")) e.scenario = scenario_from_json(j.at("scenario"));
  if (j.contains("caps")) {
    take(j.at("caps"), "front_cap_per_node", e.caps.front_cap);
    take(j.at("caps"), "back_cap_per_center", e.caps.back_cap);
  }
  take(j, "seed", e.seed);
  take(j, "slots", e.slots);
  take(j, "train_slots", e.train_slots);
  take(j, "bounds_margin", e.bounds_margin);
  take(j, "v_max", e.v_max);
  take(j, "strict_margin", e.strict_margin);
  e.validate();
  return e;
}

Experiment load_experiment(const std::filesystem::path& path) {
  return experiment_from_json(load_json(path));
}

Json to_json(const StrategyParams& p) {
  Json j;
  j["penalty_weight"] = p.penalty_weight;
  j["front_offset"] = vec(p.front_offset);
  j["back_offset"] = vec(p.back_offset);
  j["storage_offset"] = vec(p.storage_offset);
  j["thermal_offset"] = vec(p.thermal_offset);
  j["emission_queue_cap"] = p.emission_queue_cap;
  return j;
}

StrategyParams params_from_json(const Json& j) {
  StrategyParams p;
  p.penalty_weight = j.at("penalty_weight").get<double>();
  p.front_offset = to_vector(j.at("front_offset"), "front_offset");
  p.back_offset = to_vector(j.at("back_offset"), "back_offset");
  p.storage_offset = to_vector(j.at("storage_offset"), "storage_offset");
  p.thermal_offset = to_vector(j.at("thermal_offset"), "thermal_offset");
  p.emission_queue_cap = j.at("emission_queue_cap").get<double>();
  return p;
}

Json to_json(const TuningReport& r) {
  Json j;
  j["params"] = to_json(r.params);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["weight_capped"] = r.weight_capped;
  Json history = Json::array();
  for (const auto& h : r.history) {
    history.push_back({{"emission_queue_cap", h.emission_queue_cap},
                       {"penalty_weight", h.penalty_weight},
                       {"simulated_peak", h.simulated_peak}});
  }
  j["history"] = std::move(history);
  return j;
}

Json to_json(const Report& r) {
  Json j;
  j["window_begin"] = r.window_begin;
  j["window_end"] = r.window_end;
  j["avg_cost_rate_usd_per_slot"] = r.avg_cost_rate;
  j["cost_standard_error"] = r.cost_standard_error;
  j["avg_emission_rate_tCO2_per_slot"] = r.avg_emission_rate;
  j["emission_standard_error"] = r.emission_standard_error;
  j["emission_cap_tCO2_per_slot"] = r.emission_cap;
  j["exceeds_emission_cap"] = r.exceeds_emission_cap;
  j["max_emission_queue"] = r.max_emission_queue;
  j["violation_count"] = r.violation_count;
  j["out_of_bounds_samples"] = r.out_of_bounds_samples;
  auto range = [](const QueueRange& q) { return Json{{"min", vec(q.min)}, {"max", vec(q.max)}}; };
  j["front_queue"] = range(r.front_queue);
  j["back_queue"] = range(r.back_queue);
  j["stored_energy"] = range(r.stored_energy);
  j["temperature"] = range(r.temperature);
  j["drift_bound"] = number(r.drift_bound);
  j["penalty_weight"] = r.penalty_weight;
  j["gap_bound"] = number(r.gap_bound);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace greendc
