#pragma once

#include <cstddef>

#include "greendc/linprog.hpp"
#include "greendc/model.hpp"

namespace greendc {

/// Parameters of the drift-plus-penalty dispatch policy.
struct StrategyParams {
  double penalty_weight = 0.0;  // V
  Vector front_offset;          // per node, shifts the front-end queue
  Vector back_offset;           // per center
  Vector storage_offset;        // per center
  Vector thermal_offset;        // per center
  double emission_queue_cap = 0.0;  // Q^E the offsets were tuned against

  static StrategyParams zero(const SystemConfig& config);
  void validate(const SystemConfig& config) const;
};

/// Queues shifted by the strategy offsets. Entries may be negative except the
/// emission queue.
struct VirtualQueues {
  Vector front;
  Vector back;
  Vector storage;
  Vector thermal;
  double emission = 0.0;
};

VirtualQueues virtual_queues(const SystemState& state, const StrategyParams& params);

/// The per-slot objective `drift term + V * slot cost` written as a linear
/// function of the decision plus a constant.
struct DriftCoefficients {
  Vector accept;
  Matrix transfer;
  Vector process;
  Vector charge;
  Vector discharge;
  Vector cooling;
  double constant = 0.0;

  double evaluate(const Decision& decision) const;
  bool all_finite() const;
};

DriftCoefficients drift_coefficients(const VirtualQueues& vq, const UncertaintySample& sample,
                                     const StrategyParams& params, const SystemConfig& config);

/// Linear part of the one-step Lyapunov drift bound, evaluated directly from
/// the queue dynamics at a given decision.
double drift_term(const VirtualQueues& vq, const UncertaintySample& sample,
                  const Decision& decision, const SystemConfig& config);

/// Half the sum of squared virtual queues.
double lyapunov_value(const VirtualQueues& vq);

/// Constant bounding the quadratic part of the drift over all admissible
/// decisions and uncertainty realizations.
double compute_drift_bound(const SystemConfig& config, const UncertaintyBounds& bounds);

/// Minimizer of the per-slot objective over the decision boxes. Because the
/// objective is linear and the feasible set a box, every field sits at a
/// bound. Zero coefficients: accept at demand, everything else at zero.
/// Throws std::domain_error when a coefficient is not finite.
Decision online_step(const SystemState& state, const UncertaintySample& sample,
                     const StrategyParams& params, const SystemConfig& config);

Decision minimize_over_box(const DriftCoefficients& coeffs, const UncertaintySample& sample,
                           const SystemConfig& config);

/// The same per-slot problem assembled as an LP (constant term excluded),
/// variables ordered by DecisionLayout.
lp::LinearProgram online_problem(const DriftCoefficients& coeffs, const UncertaintySample& sample,
                                 const SystemConfig& config);

/// Stateless wrapper used by the simulator. With `use_emission_queue` off the
/// policy behaves as if the emission queue were always empty.
class OnlinePolicy {
 public:
  OnlinePolicy(SystemConfig config, StrategyParams params, bool use_emission_queue = true);

  Decision operator()(const SystemState& state, const UncertaintySample& sample) const;

  const StrategyParams& params() const { return params_; }
  bool uses_emission_queue() const { return use_emission_queue_; }

 private:
  SystemConfig config_;
  StrategyParams params_;
  bool use_emission_queue_;
};

}  // namespace greendc
