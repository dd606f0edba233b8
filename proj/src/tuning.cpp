#include "greendc/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace greendc {

std::vector<double> ParamLayout::flatten(const StrategyParams& p) const {
  std::vector<double> x(size());
  x[weight()] = p.penalty_weight;
  for (std::size_t i = 0; i < nodes_; ++i) x[front(i)] = p.front_offset(static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < centers_; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    x[back(j)] = p.back_offset(jj);
    x[storage(j)] = p.storage_offset(jj);
    x[thermal(j)] = p.thermal_offset(jj);
  }
  return x;
}

StrategyParams ParamLayout::unflatten(const std::vector<double>& x, double qe) const {
  StrategyParams p;
  p.penalty_weight = x[weight()];
  p.front_offset.resize(static_cast<Eigen::Index>(nodes_));
  p.back_offset.resize(static_cast<Eigen::Index>(centers_));
  p.storage_offset.resize(static_cast<Eigen::Index>(centers_));
  p.thermal_offset.resize(static_cast<Eigen::Index>(centers_));
  for (std::size_t i = 0; i < nodes_; ++i) p.front_offset(static_cast<Eigen::Index>(i)) = x[front(i)];
  for (std::size_t j = 0; j < centers_; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    p.back_offset(jj) = x[back(j)];
    p.storage_offset(jj) = x[storage(j)];
    p.thermal_offset(jj) = x[thermal(j)];
  }
  p.emission_queue_cap = qe;
  return p;
}

lp::LinearProgram feasibility_constraints(const SystemConfig& config,
                                          const UncertaintyBounds& bounds, double qe,
                                          double margin) {
  config.validate();
  bounds.validate(config);
  if (!(qe >= 0.0)) throw std::invalid_argument("emission queue cap must be nonnegative");
  const ParamLayout layout(config);
  lp::LinearProgram lp;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    lp.add_variable(0.0, -lp::kInfinity, lp::kInfinity);
  }
  lp.names[layout.weight()] = "V";
  for (std::size_t i = 0; i < config.num_nodes(); ++i) {
    lp.names[layout.front(i)] = "theta_F_" + std::to_string(i);
  }
  for (std::size_t j = 0; j < config.num_centers(); ++j) {
    lp.names[layout.back(j)] = "theta_B_" + std::to_string(j);
    lp.names[layout.storage(j)] = "theta_S_" + std::to_string(j);
    lp.names[layout.thermal(j)] = "theta_H_" + std::to_string(j);
  }
  const std::size_t V = layout.weight();

  // Each condition is stored as terms . x >= rhs.
  for (std::size_t i = 0; i < config.num_nodes(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double outflow = config.link_capacity.row(ii).sum();
    for (std::size_t j = 0; j < config.num_centers(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      // No transfer while the front queue cannot cover every outgoing link.
      lp.add_greater_equal({{layout.front(i), -1.0},
                            {layout.back(j), 1.0},
                            {V, config.transfer_cost(ii, jj)}},
                           outflow + margin);
    }
  }
  for (std::size_t j = 0; j < config.num_centers(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double kb = config.heat_coeff(jj);
    const double kc = config.cool_coeff(jj);
    const double eta_c = config.charge_efficiency(jj);
    const double eta_d = config.discharge_efficiency(jj);
    const double wear = config.storage_wear(jj);
    const double tmin = config.temp_min(jj);
    const double tmax = config.temp_max(jj);
    const double carbon_term = qe * bounds.carbon_max(jj);

    // No processing while the back queue holds less than one slot of capacity.
    lp.add_greater_equal({{layout.back(j), -1.0},
                          {layout.thermal(j), kb},
                          {V, bounds.price_min(jj)}},
                         config.it_capacity(jj) - tmin * kb + margin);
    // No discharge near the lower energy limit.
    lp.add_greater_equal({{layout.storage(j), -1.0 / eta_d},
                          {V, wear - bounds.price_max(jj)}},
                         (config.energy_min(jj) + config.discharge_capacity(jj) / eta_d) / eta_d +
                             carbon_term + margin);
    // No charging near the upper energy limit.
    lp.add_greater_equal({{layout.storage(j), eta_c},
                          {V, wear + bounds.price_min(jj)}},
                         -(config.energy_max(jj) - config.charge_capacity(jj) * eta_c) * eta_c +
                             margin);
    // No cooling near the lower temperature limit.
    lp.add_greater_equal({{layout.thermal(j), -kc}, {V, bounds.price_min(jj)}},
                         (tmin + kc * config.cooling_capacity(jj)) * kc + margin);
    // Full cooling near the upper temperature limit.
    lp.add_greater_equal(
        {{layout.thermal(j), kc}, {V, -bounds.price_max(jj)}},
        -(tmax - kb * config.it_capacity(jj) + bounds.ambient_min(jj)) * kc + carbon_term + margin);
  }
  lp.add_greater_equal({{V, 1.0}}, 0.0);
  return lp;
}

std::vector<double> constraint_residuals(const SystemConfig& config,
                                         const UncertaintyBounds& bounds,
                                         const StrategyParams& params, double margin) {
  const auto lp = feasibility_constraints(config, bounds, params.emission_queue_cap, margin);
  const auto x = ParamLayout(config).flatten(params);
  std::vector<double> residuals;
  residuals.reserve(lp.inequalities.size());
  for (const auto& row : lp.inequalities) {
    double activity = 0.0;
    for (const auto& t : row.terms) activity += t.value * x[t.index];
    residuals.push_back(row.rhs - activity);
  }
  return residuals;
}

OptimizedParams optimize_params(const SystemConfig& config, const UncertaintyBounds& bounds,
                                double qe, const TuningOptions& options) {
  const auto undercooled = undercooled_centers(config, bounds);
  if (!undercooled.empty()) {
    std::ostringstream os;
    os << "no feasible strategy parameters: cooling capacity cannot offset full IT load and "
          "ambient heating at center";
    for (auto j : undercooled) os << ' ' << j;
    throw TuningError(os.str());
  }
  auto lp = feasibility_constraints(config, bounds, qe, options.strict_margin);
  const ParamLayout layout(config);
  lp.objective[layout.weight()] = -1.0;
  auto sol = lp::solve(lp);
  bool capped = false;
  if (sol.status == lp::Status::Unbounded) {
    lp.upper[layout.weight()] = options.v_max;
    sol = lp::solve(lp);
    capped = true;
  }
  if (sol.status == lp::Status::Infeasible) {
    std::ostringstream os;
    os << "no feasible strategy parameters for emission queue cap " << qe
       << " (temperature or storage limits too narrow)";
    throw TuningError(os.str());
  }
  if (sol.status != lp::Status::Optimal) {
    throw TuningError("strategy parameter LP failed: " + lp::to_string(sol.status));
  }
  sol.x[layout.weight()] = std::max(sol.x[layout.weight()], 0.0);
  return {layout.unflatten(sol.x, qe), capped};
}

TuningReport tune(const SystemConfig& config, const UncertaintyBounds& bounds,
                  const SimulationHook& simulate, const TuningOptions& options) {
  TuningReport report;
  double qe = 0.0;
  OptimizedParams current = optimize_params(config, bounds, qe, options);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const double peak = simulate(current.params);
    report.history.push_back({qe, current.params.penalty_weight, peak});
    report.iterations = iter + 1;
    // Monotone update keeps the iterates nondecreasing.
    const double next = std::max(qe, peak);
    const double change = next - qe;
    if (change <= options.relative_tolerance * next || change <= 1e-12) {
      report.converged = true;
      if (next != qe) current = optimize_params(config, bounds, next, options);
      qe = next;
      break;
    }
    qe = next;
    current = optimize_params(config, bounds, qe, options);
  }
  if (!report.converged) current = optimize_params(config, bounds, qe, options);
  report.params = current.params;
  report.weight_capped = current.weight_capped;
  return report;
}

TuningReport tune(const SystemConfig& config, const UncertaintyBounds& bounds,
                  const std::vector<UncertaintySample>& historical, const TuningOptions& options) {
  if (historical.empty()) throw std::invalid_argument("tuning needs historical samples");
  auto hook = [&](const StrategyParams& params) {
    SystemState state = SystemState::initial(config);
    double peak = state.emission_queue;
    for (const auto& sample : historical) {
      const Decision d = online_step(state, sample, params, config);
      state = advance_state(state, sample, d, config);
      peak = std::max(peak, state.emission_queue);
    }
    return peak;
  };
  return tune(config, bounds, hook, options);
}

}  // namespace greendc
