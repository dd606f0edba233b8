#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "greendc/model.hpp"
#include "greendc/online.hpp"
#include "greendc/tuning.hpp"

namespace greendc {

/// Slot-decision function. `t` is the slot index within the run.
using Policy =
    std::function<Decision(std::size_t t, const SystemState& state, const UncertaintySample& sample)>;

Policy make_policy(const OnlinePolicy& policy);

struct SlotRecord {
  SystemState state;  // before the decision
  UncertaintySample sample;
  Decision decision;
  SlotCosts costs;
  double drift_term = 0.0;      // I_t at the chosen decision
  double lyapunov = 0.0;        // L_t
  double drift = 0.0;           // L_{t+1} - L_t
  double emission_queue = 0.0;  // after the update
  std::size_t violations = 0;
};

struct SlotViolation {
  std::size_t slot = 0;
  Violation violation;
};

struct Trace {
  SystemConfig config;
  StrategyParams params;  // offsets used for the drift diagnostics
  SystemState initial_state;
  SystemState final_state;
  std::vector<SlotRecord> records;
  std::vector<SlotViolation> violations;
  std::size_t out_of_bounds_samples = 0;

  std::size_t size() const { return records.size(); }
};

class InfeasibleDecision : public std::runtime_error {
 public:
  InfeasibleDecision(std::size_t slot, std::vector<Violation> violations);
  std::size_t slot() const { return slot_; }
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::size_t slot_;
  std::vector<Violation> violations_;
};

struct SimOptions {
  /// Abort with InfeasibleDecision on the first violated constraint. When
  /// off, violations are recorded and the raw successor state is kept.
  bool strict = true;
  /// Offsets and V for the Lyapunov diagnostics; zero offsets when unset.
  std::optional<StrategyParams> diagnostics;
  /// Samples outside these bounds are counted.
  std::optional<UncertaintyBounds> bounds;
  /// Called once per slot, in order, before the record is stored.
  std::function<void(std::size_t t, const SlotRecord&)> on_record;
  /// Drop per-slot records after `on_record` to bound memory.
  bool keep_records = true;
};

/// Observe, decide, account costs, advance. The emission virtual queue is
/// updated for every policy so that runs are comparable.
Trace simulate(const Policy& policy, const std::vector<UncertaintySample>& samples,
               const SystemConfig& config, const SystemState& initial_state,
               const SimOptions& options = {});

struct QueueRange {
  Vector min;
  Vector max;
};

struct Report {
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  double avg_cost_rate = 0.0;      // $ per slot
  double avg_emission_rate = 0.0;  // tCO2 per slot
  double cost_standard_error = 0.0;
  double emission_standard_error = 0.0;
  double emission_cap = 0.0;
  bool exceeds_emission_cap = false;
  double max_emission_queue = 0.0;
  std::size_t violation_count = 0;
  std::size_t out_of_bounds_samples = 0;
  QueueRange front_queue;
  QueueRange back_queue;
  QueueRange stored_energy;
  QueueRange temperature;
  double drift_bound = std::numeric_limits<double>::quiet_NaN();  // B
  double penalty_weight = 0.0;                                      // V
  double gap_bound = std::numeric_limits<double>::quiet_NaN();    // B / V
};

struct MetricsOptions {
  std::optional<double> drift_bound;
  std::size_t bootstrap_block = 50;
  std::size_t bootstrap_replicates = 400;
  std::uint64_t bootstrap_seed = 12345;
};

/// Window averages over slots [begin, end). Throws std::invalid_argument for
/// an empty or out-of-range window.
Report metrics(const Trace& trace, std::size_t begin, std::size_t end,
               const MetricsOptions& options = {});
Report metrics(const Trace& trace, const MetricsOptions& options = {});

/// Moving-block bootstrap standard error of the mean. Deterministic for a
/// fixed seed.
double block_bootstrap_se(const std::vector<double>& series, std::size_t block,
                          std::size_t replicates, std::uint64_t seed);

std::vector<double> cost_series(const Trace& trace, std::size_t begin, std::size_t end);
std::vector<double> emission_series(const Trace& trace, std::size_t begin, std::size_t end);

/// Standard error of mean(a) - mean(b) for two runs over the same samples.
double paired_standard_error(const std::vector<double>& a, const std::vector<double>& b,
                             const MetricsOptions& options = {});

/// Streams trace rows as CSV, one row per slot, 17 significant digits.
class TraceCsvWriter {
 public:
  TraceCsvWriter(std::ostream& out, std::size_t nodes, std::size_t centers);
  void write(std::size_t t, const SlotRecord& record);

 private:
  std::ostream& out_;
  std::size_t nodes_;
  std::size_t centers_;
};

void write_trace_csv(std::ostream& out, const Trace& trace);

enum class SweepAxis { EmissionQueueCap, EmissionCap };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepInputs {
  SystemConfig config;
  UncertaintyBounds bounds;
  std::vector<UncertaintySample> training;
  std::vector<UncertaintySample> evaluation;
  TuningOptions tuning;
  std::size_t jobs = 1;
};

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  StrategyParams params;
  Report report;
  std::vector<double> costs;      // per evaluation slot
  std::vector<double> emissions;  // per evaluation slot
};

/// For each value: fix Q^E and maximize V (EmissionQueueCap), or set C^E and
/// rerun the full tuning loop (EmissionCap); then evaluate on the held-out
/// samples from the default initial state. Values must be strictly
/// increasing. Failed points carry their error message.
std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& values,
                              const SweepInputs& inputs);

/// Runs `task(k)` for k in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

}  // namespace greendc
