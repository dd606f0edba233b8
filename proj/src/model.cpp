#include "greendc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace greendc {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

void require_size(const Vector& v, std::size_t n, const char* name) {
  require(static_cast<std::size_t>(v.size()) == n,
          std::string(name) + ": expected " + std::to_string(n) + " entries, got " +
              std::to_string(v.size()));
}

void require_nonnegative(const Eigen::Ref<const Matrix>& m, const char* name) {
  require(m.allFinite(), std::string(name) + " must be finite");
  require((m.array() >= 0.0).all(), std::string(name) + " must be nonnegative");
}

void check_interval(std::vector<Violation>& out, ConstraintKind kind, std::size_t index,
                    std::size_t center, double value, double lo, double hi) {
  if (value < lo - kFeasibilityTolerance) {
    out.push_back({kind, index, center, lo - value});
  } else if (value > hi + kFeasibilityTolerance) {
    out.push_back({kind, index, center, value - hi});
  }
}

}  // namespace

void SystemConfig::validate() const {
  const auto n = num_nodes();
  const auto m = num_centers();
  require(n > 0 && m > 0, "config needs at least one mapping node and one data center");
  require(transfer_cost.rows() == link_capacity.rows() &&
              transfer_cost.cols() == link_capacity.cols(),
          "transfer_cost must match link_capacity dimensions");
  require_size(rejection_penalty, n, "rejection_penalty");
  for (const auto& [v, name] :
       {std::pair{&it_capacity, "it_capacity"}, {&charge_capacity, "charge_capacity"},
        {&discharge_capacity, "discharge_capacity"}, {&energy_min, "energy_min"},
        {&energy_max, "energy_max"}, {&charge_efficiency, "charge_efficiency"},
        {&discharge_efficiency, "discharge_efficiency"}, {&cooling_capacity, "cooling_capacity"},
        {&temp_min, "temp_min"}, {&temp_max, "temp_max"}, {&heat_coeff, "heat_coeff"},
        {&cool_coeff, "cool_coeff"}, {&storage_wear, "storage_wear"}}) {
    require_size(*v, m, name);
  }
  require_nonnegative(link_capacity, "link_capacity");
  require_nonnegative(it_capacity, "it_capacity");
  require_nonnegative(charge_capacity, "charge_capacity");
  require_nonnegative(discharge_capacity, "discharge_capacity");
  require_nonnegative(cooling_capacity, "cooling_capacity");
  require_nonnegative(transfer_cost, "transfer_cost");
  require_nonnegative(rejection_penalty, "rejection_penalty");
  require_nonnegative(storage_wear, "storage_wear");
  require(std::isfinite(emission_cap) && emission_cap >= 0.0, "emission_cap must be >= 0");
  require((charge_efficiency.array() > 0.0).all() && (charge_efficiency.array() <= 1.0).all(),
          "charge_efficiency must lie in (0, 1]");
  require((discharge_efficiency.array() > 0.0).all() &&
              (discharge_efficiency.array() <= 1.0).all(),
          "discharge_efficiency must lie in (0, 1]");
  require((heat_coeff.array() > 0.0).all(), "heat_coeff must be positive");
  require((cool_coeff.array() > 0.0).all(), "cool_coeff must be positive");
  require(energy_min.allFinite() && energy_max.allFinite() && temp_min.allFinite() &&
              temp_max.allFinite(),
          "energy and temperature limits must be finite");
  require((energy_min.array() <= energy_max.array()).all(), "energy_min exceeds energy_max");
  require((temp_min.array() <= temp_max.array()).all(), "temp_min exceeds temp_max");
}

void UncertaintySample::validate(const SystemConfig& config) const {
  require_size(demand, config.num_nodes(), "demand");
  require_size(ambient_effect, config.num_centers(), "ambient_effect");
  require_size(price, config.num_centers(), "price");
  require_size(carbon_intensity, config.num_centers(), "carbon_intensity");
  require(demand.allFinite() && ambient_effect.allFinite() && price.allFinite() &&
              carbon_intensity.allFinite(),
          "uncertainty sample must be finite");
  require((demand.array() >= 0.0).all(), "demand must be nonnegative");
  require((carbon_intensity.array() >= 0.0).all(), "carbon_intensity must be nonnegative");
}

void UncertaintyBounds::validate(const SystemConfig& config) const {
  require_size(demand_max, config.num_nodes(), "demand_max");
  for (const auto& [v, name] :
       {std::pair{&ambient_min, "ambient_min"}, {&ambient_max, "ambient_max"},
        {&price_min, "price_min"}, {&price_max, "price_max"}, {&carbon_min, "carbon_min"},
        {&carbon_max, "carbon_max"}}) {
    require_size(*v, config.num_centers(), name);
  }
  require((demand_max.array() >= 0.0).all(), "demand_max must be nonnegative");
  require((carbon_min.array() >= 0.0).all(), "carbon_min must be nonnegative");
  require((ambient_min.array() <= ambient_max.array()).all(), "ambient bounds inverted");
  require((price_min.array() <= price_max.array()).all(), "price bounds inverted");
  require((carbon_min.array() <= carbon_max.array()).all(), "carbon bounds inverted");
}

bool UncertaintyBounds::contains(const UncertaintySample& s, double tol) const {
  return (s.demand.array() >= -tol).all() && (s.demand.array() <= demand_max.array() + tol).all() &&
         (s.ambient_effect.array() >= ambient_min.array() - tol).all() &&
         (s.ambient_effect.array() <= ambient_max.array() + tol).all() &&
         (s.price.array() >= price_min.array() - tol).all() &&
         (s.price.array() <= price_max.array() + tol).all() &&
         (s.carbon_intensity.array() >= carbon_min.array() - tol).all() &&
         (s.carbon_intensity.array() <= carbon_max.array() + tol).all();
}

SystemState SystemState::initial(const SystemConfig& config) {
  SystemState s;
  s.front_queue = Vector::Zero(static_cast<Eigen::Index>(config.num_nodes()));
  s.back_queue = Vector::Zero(static_cast<Eigen::Index>(config.num_centers()));
  s.stored_energy = 0.5 * (config.energy_min + config.energy_max);
  s.temperature = config.temp_min;
  s.emission_queue = 0.0;
  return s;
}

Decision Decision::zero(const SystemConfig& config) {
  const auto n = static_cast<Eigen::Index>(config.num_nodes());
  const auto m = static_cast<Eigen::Index>(config.num_centers());
  return Decision{Vector::Zero(n),    Matrix::Zero(n, m), Vector::Zero(m),
                  Vector::Zero(m),    Vector::Zero(m),    Vector::Zero(m)};
}

Vector Decision::power_demand() const { return process + charge - discharge + cooling; }

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::AcceptRange: return "accepted workload outside [0, demand]";
    case ConstraintKind::TransferRange: return "transfer outside [0, link capacity]";
    case ConstraintKind::ProcessRange: return "processing outside [0, IT capacity]";
    case ConstraintKind::ChargeRange: return "charging outside [0, charge capacity]";
    case ConstraintKind::DischargeRange: return "discharging outside [0, discharge capacity]";
    case ConstraintKind::CoolingRange: return "cooling outside [0, cooling capacity]";
    case ConstraintKind::FrontQueueNonnegative: return "front-end queue negative";
    case ConstraintKind::BackQueueNonnegative: return "back-end queue negative";
    case ConstraintKind::StoredEnergyRange: return "stored energy outside its limits";
    case ConstraintKind::TemperatureRange: return "temperature outside its limits";
  }
  return "unknown constraint";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << to_string(kind) << " at index " << index;
  if (kind == ConstraintKind::TransferRange) os << "->" << center;
  os << " by " << amount;
  return os.str();
}

DecisionLayout::DecisionLayout(std::size_t nodes, std::size_t centers)
    : nodes_(nodes), centers_(centers) {}

DecisionLayout::DecisionLayout(const SystemConfig& config)
    : DecisionLayout(config.num_nodes(), config.num_centers()) {}

std::vector<double> DecisionLayout::flatten(const Decision& d) const {
  std::vector<double> x(size());
  for (std::size_t i = 0; i < nodes_; ++i) {
    x[accept(i)] = d.accept(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < centers_; ++j) {
      x[transfer(i, j)] = d.transfer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t j = 0; j < centers_; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    x[process(j)] = d.process(jj);
    x[charge(j)] = d.charge(jj);
    x[discharge(j)] = d.discharge(jj);
    x[cooling(j)] = d.cooling(jj);
  }
  return x;
}

Decision DecisionLayout::unflatten(const double* x) const {
  Decision d = Decision{Vector(nodes_), Matrix(nodes_, centers_), Vector(centers_),
                        Vector(centers_), Vector(centers_), Vector(centers_)};
  for (std::size_t i = 0; i < nodes_; ++i) {
    d.accept(static_cast<Eigen::Index>(i)) = x[accept(i)];
    for (std::size_t j = 0; j < centers_; ++j) {
      d.transfer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[transfer(i, j)];
    }
  }
  for (std::size_t j = 0; j < centers_; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    d.process(jj) = x[process(j)];
    d.charge(jj) = x[charge(j)];
    d.discharge(jj) = x[discharge(j)];
    d.cooling(jj) = x[cooling(j)];
  }
  return d;
}

void DecisionLayout::box(const SystemConfig& config, const UncertaintySample& sample,
                         std::vector<double>& lower, std::vector<double>& upper) const {
  lower.assign(size(), 0.0);
  upper.assign(size(), 0.0);
  for (std::size_t i = 0; i < nodes_; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    upper[accept(i)] = sample.demand(ii);
    for (std::size_t j = 0; j < centers_; ++j) {
      upper[transfer(i, j)] = config.link_capacity(ii, static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t j = 0; j < centers_; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    upper[process(j)] = config.it_capacity(jj);
    upper[charge(j)] = config.charge_capacity(jj);
    upper[discharge(j)] = config.discharge_capacity(jj);
    upper[cooling(j)] = config.cooling_capacity(jj);
  }
}

SlotCosts slot_costs(const SystemConfig& config, const UncertaintySample& sample,
                     const Decision& d) {
  if ((d.accept.array() > sample.demand.array() + kFeasibilityTolerance).any()) {
    throw std::invalid_argument("accepted workload exceeds arriving demand");
  }
  SlotCosts c;
  c.workload = config.transfer_cost.cwiseProduct(d.transfer).sum() +
               config.rejection_penalty.dot(sample.demand - d.accept);
  c.storage = config.storage_wear.dot(d.charge + d.discharge);
  const Vector grid = d.power_demand();
  c.electricity = sample.price.dot(grid);
  c.emission = sample.carbon_intensity.dot(grid);
  c.total = c.workload + c.storage + c.electricity;
  return c;
}

SystemState advance_state(const SystemState& s, const UncertaintySample& sample,
                          const Decision& d, const SystemConfig& config) {
  SystemState next;
  next.front_queue = s.front_queue + d.accept - d.transfer.rowwise().sum();
  next.back_queue = s.back_queue + d.transfer.colwise().sum().transpose() - d.process;
  next.stored_energy = s.stored_energy + d.charge.cwiseProduct(config.charge_efficiency) -
                       d.discharge.cwiseQuotient(config.discharge_efficiency);
  next.temperature = s.temperature + config.heat_coeff.cwiseProduct(d.process) -
                     config.cool_coeff.cwiseProduct(d.cooling) - sample.ambient_effect;
  const double emission = sample.carbon_intensity.dot(d.power_demand());
  next.emission_queue = std::max(s.emission_queue + emission - config.emission_cap, 0.0);
  return next;
}

std::vector<Violation> check_state(const SystemConfig& config, const SystemState& s) {
  std::vector<Violation> out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.front_queue.size(); ++i) {
    check_interval(out, ConstraintKind::FrontQueueNonnegative, static_cast<std::size_t>(i), 0,
                   s.front_queue(i), 0.0, inf);
  }
  for (Eigen::Index j = 0; j < s.back_queue.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    check_interval(out, ConstraintKind::BackQueueNonnegative, jj, 0, s.back_queue(j), 0.0, inf);
    check_interval(out, ConstraintKind::StoredEnergyRange, jj, 0, s.stored_energy(j),
                   config.energy_min(j), config.energy_max(j));
    check_interval(out, ConstraintKind::TemperatureRange, jj, 0, s.temperature(j),
                   config.temp_min(j), config.temp_max(j));
  }
  return out;
}

std::vector<Violation> check_feasible(const SystemConfig& config, const UncertaintySample& sample,
                                      const SystemState& state, const Decision& d) {
  std::vector<Violation> out;
  const auto n = static_cast<Eigen::Index>(config.num_nodes());
  const auto m = static_cast<Eigen::Index>(config.num_centers());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    check_interval(out, ConstraintKind::AcceptRange, ii, 0, d.accept(i), 0.0, sample.demand(i));
    for (Eigen::Index j = 0; j < m; ++j) {
      check_interval(out, ConstraintKind::TransferRange, ii, static_cast<std::size_t>(j),
                     d.transfer(i, j), 0.0, config.link_capacity(i, j));
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    check_interval(out, ConstraintKind::ProcessRange, jj, 0, d.process(j), 0.0,
                   config.it_capacity(j));
    check_interval(out, ConstraintKind::ChargeRange, jj, 0, d.charge(j), 0.0,
                   config.charge_capacity(j));
    check_interval(out, ConstraintKind::DischargeRange, jj, 0, d.discharge(j), 0.0,
                   config.discharge_capacity(j));
    check_interval(out, ConstraintKind::CoolingRange, jj, 0, d.cooling(j), 0.0,
                   config.cooling_capacity(j));
  }
  auto successor = check_state(config, advance_state(state, sample, d, config));
  out.insert(out.end(), successor.begin(), successor.end());
  return out;
}

std::vector<std::size_t> undercooled_centers(const SystemConfig& config,
                                             const UncertaintyBounds& bounds) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(config.num_centers()); ++j) {
    const double cooling = config.cool_coeff(j) * config.cooling_capacity(j);
    const double heating = config.heat_coeff(j) * config.it_capacity(j) - bounds.ambient_min(j);
    if (cooling < heating - kFeasibilityTolerance) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

}  // namespace greendc
