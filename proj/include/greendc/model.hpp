#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace greendc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Violations smaller than this (absolute) are treated as round-off.
inline constexpr double kFeasibilityTolerance = 1e-9;

/// Static description of the plant. One slot is one hour; every rate below is
/// already expressed per slot.
///
/// Index conventions: `i` ranges over mapping nodes, `j` over data centers.
/// Per-link quantities are `num_nodes() x num_centers()` matrices.
struct SystemConfig {
  Matrix link_capacity;        // workload per slot, node i -> center j
  Vector it_capacity;          // workload per slot
  Vector charge_capacity;      // MW
  Vector discharge_capacity;   // MW
  Vector energy_min;           // MWh
  Vector energy_max;           // MWh
  Vector charge_efficiency;    // (0, 1]
  Vector discharge_efficiency; // (0, 1]
  Vector cooling_capacity;     // MW
  Vector temp_min;             // degC
  Vector temp_max;             // degC
  Vector heat_coeff;           // degC per unit of processed workload
  Vector cool_coeff;           // degC per MW of cooling
  Matrix transfer_cost;        // $ per unit transferred
  Vector rejection_penalty;    // $ per unit rejected, per node
  Vector storage_wear;         // $ per MWh charged or discharged
  double emission_cap = 0.0;   // tCO2 per slot, long-run average

  std::size_t num_nodes() const { return static_cast<std::size_t>(link_capacity.rows()); }
  std::size_t num_centers() const { return static_cast<std::size_t>(link_capacity.cols()); }

  /// Throws std::invalid_argument on inconsistent dimensions, negative
  /// capacities or costs, efficiencies outside (0, 1], or inverted bounds.
  void validate() const;
};

/// One slot's realization of the uncertain quantities.
struct UncertaintySample {
  Vector demand;            // per node, workload >= 0
  Vector ambient_effect;    // per center, degC drop per slot (negative heats)
  Vector price;             // per center, $/MWh
  Vector carbon_intensity;  // per center, tCO2/MWh >= 0

  void validate(const SystemConfig& config) const;
};

/// Support of the uncertainty process, usually estimated from history.
struct UncertaintyBounds {
  Vector demand_max;
  Vector ambient_min;
  Vector ambient_max;
  Vector price_min;
  Vector price_max;
  Vector carbon_min;
  Vector carbon_max;

  void validate(const SystemConfig& config) const;
  bool contains(const UncertaintySample& sample, double tolerance = 0.0) const;
};

struct SystemState {
  Vector front_queue;      // per node
  Vector back_queue;       // per center
  Vector stored_energy;    // per center, MWh
  Vector temperature;      // per center, degC
  double emission_queue = 0.0;

  /// Empty queues, storage half full, temperature at its lower limit.
  static SystemState initial(const SystemConfig& config);
};

struct Decision {
  Vector accept;     // per node
  Matrix transfer;   // node x center
  Vector process;    // per center
  Vector charge;     // per center
  Vector discharge;  // per center
  Vector cooling;    // per center

  static Decision zero(const SystemConfig& config);

  /// Net grid draw per center; negative when discharge exceeds local load.
  Vector power_demand() const;
};

struct SlotCosts {
  double workload = 0.0;
  double storage = 0.0;
  double electricity = 0.0;
  double total = 0.0;
  double emission = 0.0;
};

enum class ConstraintKind {
  AcceptRange,
  TransferRange,
  ProcessRange,
  ChargeRange,
  DischargeRange,
  CoolingRange,
  FrontQueueNonnegative,
  BackQueueNonnegative,
  StoredEnergyRange,
  TemperatureRange,
};

std::string to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  std::size_t index = 0;      // node or center
  std::size_t center = 0;     // second index, transfers only
  double amount = 0.0;        // distance outside the feasible interval

  std::string describe() const;
};

/// Flat ordering of decision fields used wherever a Decision becomes an LP
/// variable block: accept, transfer (row major), process, charge, discharge,
/// cooling.
class DecisionLayout {
 public:
  DecisionLayout(std::size_t nodes, std::size_t centers);
  explicit DecisionLayout(const SystemConfig& config);

  std::size_t size() const { return nodes_ + nodes_ * centers_ + 4 * centers_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t centers() const { return centers_; }

  std::size_t accept(std::size_t i) const { return i; }
  std::size_t transfer(std::size_t i, std::size_t j) const { return nodes_ + i * centers_ + j; }
  std::size_t process(std::size_t j) const { return nodes_ + nodes_ * centers_ + j; }
  std::size_t charge(std::size_t j) const { return process(j) + centers_; }
  std::size_t discharge(std::size_t j) const { return process(j) + 2 * centers_; }
  std::size_t cooling(std::size_t j) const { return process(j) + 3 * centers_; }

  std::vector<double> flatten(const Decision& decision) const;
  Decision unflatten(const double* values) const;

  /// Lower and upper box bounds per flat index for the given slot.
  void box(const SystemConfig& config, const UncertaintySample& sample,
           std::vector<double>& lower, std::vector<double>& upper) const;

 private:
  std::size_t nodes_;
  std::size_t centers_;
};

SlotCosts slot_costs(const SystemConfig& config, const UncertaintySample& sample,
                     const Decision& decision);

SystemState advance_state(const SystemState& state, const UncertaintySample& sample,
                          const Decision& decision, const SystemConfig& config);

/// Every violated decision box and successor-state bound; empty means feasible.
std::vector<Violation> check_feasible(const SystemConfig& config, const UncertaintySample& sample,
                                      const SystemState& state, const Decision& decision);

/// Bound violations of a state on its own (used for traces).
std::vector<Violation> check_state(const SystemConfig& config, const SystemState& state);

/// Centers whose cooling cannot offset full IT load plus the worst ambient
/// heating: kappa_C * P_C < kappa_B * P_B - beta_min.
std::vector<std::size_t> undercooled_centers(const SystemConfig& config,
                                             const UncertaintyBounds& bounds);

}  // namespace greendc
