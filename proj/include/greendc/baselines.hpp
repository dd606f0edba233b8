#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "greendc/linprog.hpp"
#include "greendc/model.hpp"
#include "greendc/online.hpp"
#include "greendc/scenario.hpp"
#include "greendc/sim.hpp"

namespace greendc {

enum class Variant {
  Proposed,
  OfflineLowCarbon,  // C1: clairvoyant horizon LP with the average-emission bound
  GreedyLowCarbon,   // C2: per-slot cost minimization with an emission limit
  Offline,           // C3: C1 without the emission bound
  Greedy,            // C4: C2 without the emission limit
  NoEmissionBound,   // C5: online policy that ignores the emission queue
};

/// Short labels: proposed, C1 ... C5.
std::string to_string(Variant variant);
Variant parse_variant(const std::string& name);
const std::vector<Variant>& all_variants();

class BaselineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OfflineOptions {
  enum class Solver { Auto, Simplex, InteriorPoint };
  bool with_emission_bound = true;
  Solver solver = Solver::Auto;
  /// Auto uses the simplex up to this horizon and the interior-point solver
  /// beyond it.
  std::size_t simplex_max_slots = 40;
  /// Interior-point solutions are not vertices; state bounds are pulled in by
  /// this much so that replaying the decisions stays within the true bounds.
  double interior_state_margin = 1e-6;
};

/// Index map of the horizon LP: per slot, the decision block (DecisionLayout
/// order) followed by the successor state (front, back, energy, temperature).
class HorizonLayout {
 public:
  HorizonLayout(const SystemConfig& config, std::size_t slots);
  std::size_t size() const { return stride_ * slots_; }
  std::size_t slots() const { return slots_; }
  std::size_t decision(std::size_t t, std::size_t k) const { return t * stride_ + k; }
  std::size_t front(std::size_t t, std::size_t i) const { return t * stride_ + dsize_ + i; }
  std::size_t back(std::size_t t, std::size_t j) const {
    return t * stride_ + dsize_ + nodes_ + j;
  }
  std::size_t energy(std::size_t t, std::size_t j) const { return back(t, j) + centers_; }
  std::size_t temperature(std::size_t t, std::size_t j) const {
    return back(t, j) + 2 * centers_;
  }
  const DecisionLayout& decisions() const { return layout_; }

 private:
  DecisionLayout layout_;
  std::size_t nodes_;
  std::size_t centers_;
  std::size_t dsize_;
  std::size_t stride_;
  std::size_t slots_;
};

/// Clairvoyant horizon LP. The constant rejection term sum(gamma_F * alpha)
/// is left out of the objective. `state_margin` shrinks the state boxes.
lp::LinearProgram offline_problem(const SystemConfig& config,
                                  const std::vector<UncertaintySample>& samples,
                                  const BaselineCaps& caps, const SystemState& initial_state,
                                  bool with_emission_bound, double state_margin = 0.0);

struct OfflineResult {
  std::vector<Decision> decisions;
  double average_cost = 0.0;      // recomputed from the decisions
  double average_emission = 0.0;  // recomputed from the decisions
  std::size_t solver_iterations = 0;
  bool used_interior_point = false;
};

/// Throws BaselineError when the horizon LP is infeasible or the solver fails.
OfflineResult offline_solve(const SystemConfig& config,
                            const std::vector<UncertaintySample>& samples,
                            const BaselineCaps& caps, const SystemState& initial_state,
                            const OfflineOptions& options = {});

/// Single-slot LP over the decision (DecisionLayout order): slot cost without
/// the constant rejection term, successor bounds including the queue caps,
/// and `sum(gamma_E * p_G) <= emission_limit` when a limit is given.
lp::LinearProgram greedy_problem(const SystemState& state, const UncertaintySample& sample,
                                 const SystemConfig& config, const BaselineCaps& caps,
                                 std::optional<double> emission_limit);

/// Throws BaselineError when the slot LP is infeasible.
Decision greedy_step(const SystemState& state, const UncertaintySample& sample,
                     const SystemConfig& config, const BaselineCaps& caps,
                     std::optional<double> emission_limit);

struct VariantInputs {
  std::optional<StrategyParams> params;           // Proposed
  std::optional<StrategyParams> unbounded_params;  // C5, tuned with Q^E = 0
  BaselineCaps caps;
  OfflineOptions offline;
  /// C2 limit: per slot at C^E, or C^E plus whatever the run has banked
  /// below its cumulative allowance so far.
  bool cumulative_greedy_limit = false;
  std::optional<UncertaintyBounds> bounds;  // out-of-bound tally and B
};

/// Runs one policy over the samples. Online variants record bound
/// violations; baselines abort on any (they are infeasible by construction
/// otherwise). Throws std::invalid_argument when required inputs are missing.
Trace run_variant(Variant variant, const SystemConfig& config,
                  const std::vector<UncertaintySample>& samples, const SystemState& initial_state,
                  const VariantInputs& inputs);

}  // namespace greendc
