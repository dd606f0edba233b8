#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "greendc/linprog.hpp"
#include "greendc/model.hpp"
#include "greendc/online.hpp"

namespace greendc {

class TuningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index map of the strategy-parameter LP: V first, then the front, back,
/// storage and thermal offsets.
class ParamLayout {
 public:
  ParamLayout(std::size_t nodes, std::size_t centers) : nodes_(nodes), centers_(centers) {}
  explicit ParamLayout(const SystemConfig& config)
      : ParamLayout(config.num_nodes(), config.num_centers()) {}

  std::size_t size() const { return 1 + nodes_ + 3 * centers_; }
  std::size_t weight() const { return 0; }
  std::size_t front(std::size_t i) const { return 1 + i; }
  std::size_t back(std::size_t j) const { return 1 + nodes_ + j; }
  std::size_t storage(std::size_t j) const { return 1 + nodes_ + centers_ + j; }
  std::size_t thermal(std::size_t j) const { return 1 + nodes_ + 2 * centers_ + j; }

  std::vector<double> flatten(const StrategyParams& params) const;
  StrategyParams unflatten(const std::vector<double>& x, double emission_queue_cap) const;

 private:
  std::size_t nodes_;
  std::size_t centers_;
};

/// Sufficient conditions on (V, offsets) under which the online policy keeps
/// every physical queue inside its limits, as LP rows over ParamLayout
/// variables (all free; V >= 0 is one of the rows). Row order: one per link,
/// then per center the processing, discharge, charge, cooling-off and
/// cooling-on conditions, then V >= 0. `margin` tightens every row.
lp::LinearProgram feasibility_constraints(const SystemConfig& config,
                                          const UncertaintyBounds& bounds,
                                          double emission_queue_cap, double margin = 0.0);

/// Row activities minus right-hand sides, sign-flipped so that every entry is
/// >= 0 when the parameters satisfy the conditions.
std::vector<double> constraint_residuals(const SystemConfig& config,
                                         const UncertaintyBounds& bounds,
                                         const StrategyParams& params, double margin = 0.0);

struct TuningOptions {
  double v_max = 1e6;           // cap applied when V is otherwise unbounded
  double strict_margin = 0.0;
  double relative_tolerance = 1e-3;
  std::size_t max_iterations = 50;
};

struct OptimizedParams {
  StrategyParams params;
  bool weight_capped = false;
};

/// Maximizes V subject to the feasibility conditions at the given Q^E.
/// Throws TuningError when no parameters exist, including when some center's
/// cooling capacity cannot cover full IT load plus worst ambient heating.
OptimizedParams optimize_params(const SystemConfig& config, const UncertaintyBounds& bounds,
                                double emission_queue_cap, const TuningOptions& options = {});

struct TuningIteration {
  double emission_queue_cap = 0.0;  // Q^E the LP was solved with
  double penalty_weight = 0.0;      // resulting V
  double simulated_peak = 0.0;      // max emission queue seen in simulation
};

struct TuningReport {
  StrategyParams params;
  std::vector<TuningIteration> history;
  bool converged = false;
  bool weight_capped = false;
  std::size_t iterations = 0;
};

/// Runs the candidate parameters over historical data and returns the peak
/// emission queue.
using SimulationHook = std::function<double(const StrategyParams&)>;

/// Fixed-point search for Q^E: solve the parameter LP, simulate, raise Q^E to
/// the observed peak, repeat until Q^E stops moving.
TuningReport tune(const SystemConfig& config, const UncertaintyBounds& bounds,
                  const SimulationHook& simulate, const TuningOptions& options = {});

/// Same, simulating the online policy from the default initial state.
TuningReport tune(const SystemConfig& config, const UncertaintyBounds& bounds,
                  const std::vector<UncertaintySample>& historical,
                  const TuningOptions& options = {});

}  // namespace greendc
