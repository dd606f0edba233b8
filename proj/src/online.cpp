#include "greendc/online.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace greendc {

StrategyParams StrategyParams::zero(const SystemConfig& config) {
  const auto n = static_cast<Eigen::Index>(config.num_nodes());
  const auto m = static_cast<Eigen::Index>(config.num_centers());
  return StrategyParams{0.0, Vector::Zero(n), Vector::Zero(m), Vector::Zero(m), Vector::Zero(m),
                        0.0};
}

void StrategyParams::validate(const SystemConfig& config) const {
  const auto n = static_cast<Eigen::Index>(config.num_nodes());
  const auto m = static_cast<Eigen::Index>(config.num_centers());
  if (front_offset.size() != n || back_offset.size() != m || storage_offset.size() != m ||
      thermal_offset.size() != m) {
    throw std::invalid_argument("strategy offsets do not match the system dimensions");
  }
  if (!std::isfinite(penalty_weight) || penalty_weight < 0.0) {
    throw std::invalid_argument("penalty weight must be finite and nonnegative");
  }
  if (!std::isfinite(emission_queue_cap) || emission_queue_cap < 0.0) {
    throw std::invalid_argument("emission queue cap must be finite and nonnegative");
  }
  if (!front_offset.allFinite() || !back_offset.allFinite() || !storage_offset.allFinite() ||
      !thermal_offset.allFinite()) {
    throw std::invalid_argument("strategy offsets must be finite");
  }
}

VirtualQueues virtual_queues(const SystemState& state, const StrategyParams& params) {
  return VirtualQueues{state.front_queue + params.front_offset,
                       state.back_queue + params.back_offset,
                       state.stored_energy + params.storage_offset,
                       state.temperature + params.thermal_offset, state.emission_queue};
}

double DriftCoefficients::evaluate(const Decision& d) const {
  return accept.dot(d.accept) + transfer.cwiseProduct(d.transfer).sum() + process.dot(d.process) +
         charge.dot(d.charge) + discharge.dot(d.discharge) + cooling.dot(d.cooling) + constant;
}

bool DriftCoefficients::all_finite() const {
  return accept.allFinite() && transfer.allFinite() && process.allFinite() &&
         charge.allFinite() && discharge.allFinite() && cooling.allFinite() &&
         std::isfinite(constant);
}

DriftCoefficients drift_coefficients(const VirtualQueues& vq, const UncertaintySample& sample,
                                     const StrategyParams& params, const SystemConfig& config) {
  const double v = params.penalty_weight;
  const Vector emission_weight = vq.emission * sample.carbon_intensity;
  DriftCoefficients k;
  k.accept = vq.front - v * config.rejection_penalty;
  k.transfer = (-vq.front).replicate(1, static_cast<Eigen::Index>(config.num_centers()));
  k.transfer.rowwise() += vq.back.transpose();
  k.transfer += v * config.transfer_cost;
  k.process = -vq.back + vq.thermal.cwiseProduct(config.heat_coeff) + emission_weight +
              v * sample.price;
  k.charge = vq.storage.cwiseProduct(config.charge_efficiency) + emission_weight +
             v * config.storage_wear + v * sample.price;
  k.discharge = -vq.storage.cwiseQuotient(config.discharge_efficiency) - emission_weight +
                v * config.storage_wear - v * sample.price;
  k.cooling = -vq.thermal.cwiseProduct(config.cool_coeff) + emission_weight + v * sample.price;
  // Terms that do not depend on the decision: emission allowance, the
  // rejection penalty on all arriving demand, and ambient heat exchange.
  k.constant = -vq.emission * config.emission_cap + v * config.rejection_penalty.dot(sample.demand) -
               vq.thermal.dot(sample.ambient_effect);
  return k;
}

double drift_term(const VirtualQueues& vq, const UncertaintySample& sample, const Decision& d,
                  const SystemConfig& config) {
  const Vector front_change = d.accept - d.transfer.rowwise().sum();
  const Vector back_change = d.transfer.colwise().sum().transpose() - d.process;
  const Vector storage_change = d.charge.cwiseProduct(config.charge_efficiency) -
                                d.discharge.cwiseQuotient(config.discharge_efficiency);
  const Vector thermal_change = config.heat_coeff.cwiseProduct(d.process) -
                                config.cool_coeff.cwiseProduct(d.cooling) - sample.ambient_effect;
  const double emission_change =
      sample.carbon_intensity.dot(d.power_demand()) - config.emission_cap;
  return vq.front.dot(front_change) + vq.back.dot(back_change) + vq.storage.dot(storage_change) +
         vq.thermal.dot(thermal_change) + vq.emission * emission_change;
}

double lyapunov_value(const VirtualQueues& vq) {
  return 0.5 * (vq.front.squaredNorm() + vq.back.squaredNorm() + vq.storage.squaredNorm() +
                vq.thermal.squaredNorm() + vq.emission * vq.emission);
}

double compute_drift_bound(const SystemConfig& config, const UncertaintyBounds& bounds) {
  const Vector front = bounds.demand_max + config.link_capacity.rowwise().sum();
  const Vector back = config.link_capacity.colwise().sum().transpose() + config.it_capacity;
  const Vector storage =
      config.charge_capacity.cwiseProduct(config.charge_efficiency) +
      config.discharge_capacity.cwiseQuotient(config.discharge_efficiency);
  const Vector ambient = bounds.ambient_min.cwiseAbs().cwiseMax(bounds.ambient_max.cwiseAbs());
  const Vector thermal = config.heat_coeff.cwiseProduct(config.it_capacity) +
                         config.cool_coeff.cwiseProduct(config.cooling_capacity) + ambient;
  const double emission =
      bounds.carbon_max.dot(config.it_capacity + config.charge_capacity +
                            config.discharge_capacity + config.cooling_capacity) +
      config.emission_cap;
  return front.squaredNorm() + back.squaredNorm() + storage.squaredNorm() +
         thermal.squaredNorm() + emission * emission;
}

Decision minimize_over_box(const DriftCoefficients& k, const UncertaintySample& sample,
                           const SystemConfig& config) {
  if (!k.all_finite()) throw std::domain_error("non-finite drift coefficient");
  auto on_negative = [](const auto& coeff, const auto& cap) {
    return (coeff.array() < 0.0).select(cap.array(), 0.0).matrix().eval();
  };
  Decision d;
  d.accept = (k.accept.array() <= 0.0).select(sample.demand.array(), 0.0).matrix();
  d.transfer = on_negative(k.transfer, config.link_capacity);
  d.process = on_negative(k.process, config.it_capacity);
  d.charge = on_negative(k.charge, config.charge_capacity);
  d.discharge = on_negative(k.discharge, config.discharge_capacity);
  d.cooling = on_negative(k.cooling, config.cooling_capacity);
  return d;
}

Decision online_step(const SystemState& state, const UncertaintySample& sample,
                     const StrategyParams& params, const SystemConfig& config) {
  const auto vq = virtual_queues(state, params);
  return minimize_over_box(drift_coefficients(vq, sample, params, config), sample, config);
}

lp::LinearProgram online_problem(const DriftCoefficients& k, const UncertaintySample& sample,
                                 const SystemConfig& config) {
  const DecisionLayout layout(config);
  Decision as_decision{k.accept, k.transfer, k.process, k.charge, k.discharge, k.cooling};
  lp::LinearProgram lp;
  lp.objective = layout.flatten(as_decision);
  layout.box(config, sample, lp.lower, lp.upper);
  lp.names.assign(lp.objective.size(), {});
  return lp;
}

OnlinePolicy::OnlinePolicy(SystemConfig config, StrategyParams params, bool use_emission_queue)
    : config_(std::move(config)), params_(std::move(params)),
      use_emission_queue_(use_emission_queue) {
  params_.validate(config_);
}

Decision OnlinePolicy::operator()(const SystemState& state, const UncertaintySample& sample) const {
  if (use_emission_queue_) return online_step(state, sample, params_, config_);
  SystemState blind = state;
  blind.emission_queue = 0.0;
  return online_step(blind, sample, params_, config_);
}

}  // namespace greendc
