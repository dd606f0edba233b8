#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "greendc/model.hpp"
#include "greendc/online.hpp"
#include "greendc/scenario.hpp"

namespace greendc::testing {

/// One node, one center, unit-ish coefficients. Every capacity is nonzero so
/// that each decision field has a nontrivial box.
inline SystemConfig single_config() {
  SystemConfig c;
  c.link_capacity = Matrix::Constant(1, 1, 4.0);
  c.it_capacity = Vector::Constant(1, 3.0);
  c.charge_capacity = Vector::Constant(1, 1.0);
  c.discharge_capacity = Vector::Constant(1, 1.0);
  c.energy_min = Vector::Constant(1, 1.0);
  c.energy_max = Vector::Constant(1, 9.0);
  c.charge_efficiency = Vector::Constant(1, 0.9);
  c.discharge_efficiency = Vector::Constant(1, 0.9);
  c.cooling_capacity = Vector::Constant(1, 2.0);
  c.temp_min = Vector::Constant(1, 15.0);
  c.temp_max = Vector::Constant(1, 30.0);
  c.heat_coeff = Vector::Constant(1, 0.5);
  c.cool_coeff = Vector::Constant(1, 1.5);
  c.transfer_cost = Matrix::Constant(1, 1, 2.0);
  c.rejection_penalty = Vector::Constant(1, 50.0);
  c.storage_wear = Vector::Constant(1, 1.0);
  c.emission_cap = 1.0;
  return c;
}

/// Two nodes, three centers, heterogeneous coefficients.
inline SystemConfig multi_config() {
  SystemConfig c;
  c.link_capacity = Matrix(2, 3);
  c.link_capacity << 3, 2, 1, 1, 2, 3;
  c.it_capacity = Vector(3);
  c.it_capacity << 4, 3, 5;
  c.charge_capacity = Vector(3);
  c.charge_capacity << 2, 1, 1.5;
  c.discharge_capacity = Vector(3);
  c.discharge_capacity << 2, 1.5, 1;
  c.energy_min = Vector(3);
  c.energy_min << 1, 2, 0;
  c.energy_max = Vector(3);
  c.energy_max << 20, 15, 10;
  c.charge_efficiency = Vector(3);
  c.charge_efficiency << 0.95, 0.9, 0.85;
  c.discharge_efficiency = Vector(3);
  c.discharge_efficiency << 0.9, 0.95, 0.8;
  c.cooling_capacity = Vector(3);
  c.cooling_capacity << 1.5, 1.2, 2.0;
  c.temp_min = Vector(3);
  c.temp_min << 15, 16, 14;
  c.temp_max = Vector(3);
  c.temp_max << 32, 30, 35;
  c.heat_coeff = Vector(3);
  c.heat_coeff << 0.4, 0.5, 0.3;
  c.cool_coeff = Vector(3);
  c.cool_coeff << 3.0, 4.0, 2.5;
  c.transfer_cost = Matrix(2, 3);
  c.transfer_cost << 1, 4, 7, 6, 3, 1;
  c.rejection_penalty = Vector(2);
  c.rejection_penalty << 200, 250;
  c.storage_wear = Vector(3);
  c.storage_wear << 4, 5, 6;
  c.emission_cap = 1.5;
  return c;
}

inline UncertaintySample random_sample(const SystemConfig& c, Rng& rng) {
  UncertaintySample s;
  const auto n = static_cast<Eigen::Index>(c.num_nodes());
  const auto m = static_cast<Eigen::Index>(c.num_centers());
  s.demand.resize(n);
  s.ambient_effect.resize(m);
  s.price.resize(m);
  s.carbon_intensity.resize(m);
  for (Eigen::Index i = 0; i < n; ++i) s.demand(i) = rng.uniform(0.0, 4.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    s.ambient_effect(j) = rng.uniform(-1.0, 0.5);
    s.price(j) = rng.uniform(-10.0, 80.0);
    s.carbon_intensity(j) = rng.uniform(0.0, 0.9);
  }
  return s;
}

/// Arbitrary state; queues may be far from any bound.
inline SystemState random_state(const SystemConfig& c, Rng& rng) {
  SystemState s = SystemState::initial(c);
  for (Eigen::Index i = 0; i < s.front_queue.size(); ++i) s.front_queue(i) = rng.uniform(0.0, 30.0);
  for (Eigen::Index j = 0; j < s.back_queue.size(); ++j) {
    s.back_queue(j) = rng.uniform(0.0, 30.0);
    s.stored_energy(j) = rng.uniform(c.energy_min(j), c.energy_max(j));
    s.temperature(j) = rng.uniform(c.temp_min(j), c.temp_max(j));
  }
  s.emission_queue = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 40.0);
  return s;
}

/// Arbitrary signed offsets; not tuned.
inline StrategyParams random_params(const SystemConfig& c, Rng& rng) {
  StrategyParams p = StrategyParams::zero(c);
  p.penalty_weight = rng.uniform(0.0, 3.0);
  for (Eigen::Index i = 0; i < p.front_offset.size(); ++i) p.front_offset(i) = rng.uniform(-60.0, 20.0);
  for (Eigen::Index j = 0; j < p.back_offset.size(); ++j) {
    p.back_offset(j) = rng.uniform(-40.0, 40.0);
    p.storage_offset(j) = rng.uniform(-60.0, 20.0);
    p.thermal_offset(j) = rng.uniform(-50.0, 10.0);
  }
  return p;
}

/// Bounds that contain every `random_sample` draw.
inline UncertaintyBounds random_sample_bounds(const SystemConfig& c) {
  const auto n = static_cast<Eigen::Index>(c.num_nodes());
  const auto m = static_cast<Eigen::Index>(c.num_centers());
  UncertaintyBounds b;
  b.demand_max = Vector::Constant(n, 4.0);
  b.ambient_min = Vector::Constant(m, -1.0);
  b.ambient_max = Vector::Constant(m, 0.5);
  b.price_min = Vector::Constant(m, -10.0);
  b.price_max = Vector::Constant(m, 80.0);
  b.carbon_min = Vector::Constant(m, 0.0);
  b.carbon_max = Vector::Constant(m, 0.9);
  return b;
}

}  // namespace greendc::testing
