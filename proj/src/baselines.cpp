#include "greendc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace greendc {

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::Proposed: return "proposed";
    case Variant::OfflineLowCarbon: return "C1";
    case Variant::GreedyLowCarbon: return "C2";
    case Variant::Offline: return "C3";
    case Variant::Greedy: return "C4";
    case Variant::NoEmissionBound: return "C5";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "proposed") return Variant::Proposed;
  if (s == "c1" || s == "offline_low_carbon") return Variant::OfflineLowCarbon;
  if (s == "c2" || s == "greedy_low_carbon") return Variant::GreedyLowCarbon;
  if (s == "c3" || s == "offline") return Variant::Offline;
  if (s == "c4" || s == "greedy") return Variant::Greedy;
  if (s == "c5" || s == "no_emission_bound") return Variant::NoEmissionBound;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::Proposed, Variant::OfflineLowCarbon,
                                      Variant::GreedyLowCarbon, Variant::Offline,
                                      Variant::Greedy, Variant::NoEmissionBound};
  return v;
}

HorizonLayout::HorizonLayout(const SystemConfig& config, std::size_t slots)
    : layout_(config), nodes_(config.num_nodes()), centers_(config.num_centers()),
      dsize_(layout_.size()), stride_(layout_.size() + config.num_nodes() + 3 * config.num_centers()),
      slots_(slots) {}

namespace {

using lp::Term;

// Appends the slot cost (without the constant rejection term) of the decision
// block starting at `base` to the objective.
void add_slot_cost(std::vector<double>& objective, std::size_t base, const DecisionLayout& d,
                   const SystemConfig& c, const UncertaintySample& s) {
  for (std::size_t i = 0; i < d.nodes(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    objective[base + d.accept(i)] -= c.rejection_penalty(ii);
    for (std::size_t j = 0; j < d.centers(); ++j) {
      objective[base + d.transfer(i, j)] += c.transfer_cost(ii, static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t j = 0; j < d.centers(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double price = s.price(jj);
    objective[base + d.process(j)] += price;
    objective[base + d.charge(j)] += c.storage_wear(jj) + price;
    objective[base + d.discharge(j)] += c.storage_wear(jj) - price;
    objective[base + d.cooling(j)] += price;
  }
}

// Terms of sum_j gamma_E[j] * p_G[j] for the decision block at `base`.
void add_emission_terms(std::vector<Term>& terms, std::size_t base, const DecisionLayout& d,
                        const UncertaintySample& s) {
  for (std::size_t j = 0; j < d.centers(); ++j) {
    const double g = s.carbon_intensity(static_cast<Eigen::Index>(j));
    if (g == 0.0) continue;
    terms.push_back({base + d.process(j), g});
    terms.push_back({base + d.charge(j), g});
    terms.push_back({base + d.discharge(j), -g});
    terms.push_back({base + d.cooling(j), g});
  }
}

void set_box(lp::LinearProgram& lp, std::size_t base, const DecisionLayout& d,
             const SystemConfig& c, const UncertaintySample& s) {
  std::vector<double> lo, hi;
  d.box(c, s, lo, hi);
  for (std::size_t k = 0; k < d.size(); ++k) {
    lp.lower[base + k] = lo[k];
    lp.upper[base + k] = hi[k];
  }
}

double shrink_lo(double lo, double hi, double margin) {
  return lo + std::min(margin, 0.25 * (hi - lo));
}

double shrink_hi(double lo, double hi, double margin) {
  return hi - std::min(margin, 0.25 * (hi - lo));
}

}  // namespace

lp::LinearProgram offline_problem(const SystemConfig& c,
                                  const std::vector<UncertaintySample>& samples,
                                  const BaselineCaps& caps, const SystemState& x0,
                                  bool with_emission_bound, double margin) {
  c.validate();
  caps.validate();
  if (samples.empty()) throw std::invalid_argument("offline problem needs at least one slot");
  const std::size_t T = samples.size();
  const HorizonLayout h(c, T);
  const DecisionLayout& d = h.decisions();
  const std::size_t n = c.num_nodes();
  const std::size_t m = c.num_centers();

  lp::LinearProgram lp;
  lp.objective.assign(h.size(), 0.0);
  lp.lower.assign(h.size(), 0.0);
  lp.upper.assign(h.size(), 0.0);
  lp.names.assign(h.size(), {});

  std::vector<Term> emission;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& s = samples[t];
    s.validate(c);
    const std::size_t base = h.decision(t, 0);
    set_box(lp, base, d, c, s);
    add_slot_cost(lp.objective, base, d, c, s);
    if (with_emission_bound) add_emission_terms(emission, base, d, s);

    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      lp.lower[h.front(t, i)] = shrink_lo(0.0, caps.front_cap, margin);
      lp.upper[h.front(t, i)] = shrink_hi(0.0, caps.front_cap, margin);
      // q_F(t+1) - q_F(t) - a + sum_j m = 0
      std::vector<Term> row{{h.front(t, i), 1.0}, {base + d.accept(i), -1.0}};
      for (std::size_t j = 0; j < m; ++j) row.push_back({base + d.transfer(i, j), 1.0});
      double rhs = 0.0;
      if (t == 0) {
        rhs = x0.front_queue(ii);
      } else {
        row.push_back({h.front(t - 1, i), -1.0});
      }
      lp.add_equal(std::move(row), rhs);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      lp.lower[h.back(t, j)] = shrink_lo(0.0, caps.back_cap, margin);
      lp.upper[h.back(t, j)] = shrink_hi(0.0, caps.back_cap, margin);
      lp.lower[h.energy(t, j)] = shrink_lo(c.energy_min(jj), c.energy_max(jj), margin);
      lp.upper[h.energy(t, j)] = shrink_hi(c.energy_min(jj), c.energy_max(jj), margin);
      lp.lower[h.temperature(t, j)] = shrink_lo(c.temp_min(jj), c.temp_max(jj), margin);
      lp.upper[h.temperature(t, j)] = shrink_hi(c.temp_min(jj), c.temp_max(jj), margin);

      std::vector<Term> back{{h.back(t, j), 1.0}, {base + d.process(j), 1.0}};
      for (std::size_t i = 0; i < n; ++i) back.push_back({base + d.transfer(i, j), -1.0});
      std::vector<Term> energy{{h.energy(t, j), 1.0},
                               {base + d.charge(j), -c.charge_efficiency(jj)},
                               {base + d.discharge(j), 1.0 / c.discharge_efficiency(jj)}};
      std::vector<Term> temp{{h.temperature(t, j), 1.0},
                             {base + d.process(j), -c.heat_coeff(jj)},
                             {base + d.cooling(j), c.cool_coeff(jj)}};
      double back_rhs = 0.0, energy_rhs = 0.0, temp_rhs = -s.ambient_effect(jj);
      if (t == 0) {
        back_rhs += x0.back_queue(jj);
        energy_rhs += x0.stored_energy(jj);
        temp_rhs += x0.temperature(jj);
      } else {
        back.push_back({h.back(t - 1, j), -1.0});
        energy.push_back({h.energy(t - 1, j), -1.0});
        temp.push_back({h.temperature(t - 1, j), -1.0});
      }
      lp.add_equal(std::move(back), back_rhs);
      lp.add_equal(std::move(energy), energy_rhs);
      lp.add_equal(std::move(temp), temp_rhs);
    }
  }
  if (with_emission_bound) {
    lp.add_less_equal(std::move(emission), static_cast<double>(T) * c.emission_cap);
  }
  return lp;
}

OfflineResult offline_solve(const SystemConfig& config,
                            const std::vector<UncertaintySample>& samples,
                            const BaselineCaps& caps, const SystemState& initial_state,
                            const OfflineOptions& options) {
  const bool interior =
      options.solver == OfflineOptions::Solver::InteriorPoint ||
      (options.solver == OfflineOptions::Solver::Auto && samples.size() > options.simplex_max_slots);
  const auto lp = offline_problem(config, samples, caps, initial_state,
                                  options.with_emission_bound,
                                  interior ? options.interior_state_margin : 0.0);
  const lp::Solution sol = interior ? lp::solve_interior_point(lp) : lp::solve(lp);
  if (sol.status == lp::Status::Infeasible) {
    throw BaselineError(
        "offline problem infeasible: demand cannot be served or rejected within the queue caps, "
        "storage and temperature limits" +
        std::string(options.with_emission_bound ? ", and the average emission bound" : ""));
  }
  if (sol.status != lp::Status::Optimal) {
    throw BaselineError("offline solver failed: " + lp::to_string(sol.status));
  }
  const HorizonLayout h(config, samples.size());
  OfflineResult result;
  result.used_interior_point = interior;
  result.solver_iterations = sol.iterations;
  result.decisions.reserve(samples.size());
  double cost = 0.0, emission = 0.0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    Decision dec = h.decisions().unflatten(sol.x.data() + h.decision(t, 0));
    const SlotCosts sc = slot_costs(config, samples[t], dec);
    cost += sc.total;
    emission += sc.emission;
    result.decisions.push_back(std::move(dec));
  }
  result.average_cost = cost / static_cast<double>(samples.size());
  result.average_emission = emission / static_cast<double>(samples.size());
  return result;
}

lp::LinearProgram greedy_problem(const SystemState& x, const UncertaintySample& s,
                                 const SystemConfig& c, const BaselineCaps& caps,
                                 std::optional<double> emission_limit) {
  c.validate();
  caps.validate();
  s.validate(c);
  const DecisionLayout d(c);
  lp::LinearProgram lp;
  lp.objective.assign(d.size(), 0.0);
  lp.names.assign(d.size(), {});
  d.box(c, s, lp.lower, lp.upper);
  add_slot_cost(lp.objective, 0, d, c, s);

  // Successor bounds written as lo <= q + (linear in decision) <= hi.
  auto bound = [&lp](std::vector<Term> terms, double current, double lo, double hi) {
    lp.add_less_equal(terms, hi - current);
    lp.add_greater_equal(std::move(terms), lo - current);
  };
  for (std::size_t i = 0; i < d.nodes(); ++i) {
    std::vector<Term> terms{{d.accept(i), 1.0}};
    for (std::size_t j = 0; j < d.centers(); ++j) terms.push_back({d.transfer(i, j), -1.0});
    bound(std::move(terms), x.front_queue(static_cast<Eigen::Index>(i)), 0.0, caps.front_cap);
  }
  for (std::size_t j = 0; j < d.centers(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    std::vector<Term> back{{d.process(j), -1.0}};
    for (std::size_t i = 0; i < d.nodes(); ++i) back.push_back({d.transfer(i, j), 1.0});
    bound(std::move(back), x.back_queue(jj), 0.0, caps.back_cap);
    bound({{d.charge(j), c.charge_efficiency(jj)}, {d.discharge(j), -1.0 / c.discharge_efficiency(jj)}},
          x.stored_energy(jj), c.energy_min(jj), c.energy_max(jj));
    bound({{d.process(j), c.heat_coeff(jj)}, {d.cooling(j), -c.cool_coeff(jj)}},
          x.temperature(jj) - s.ambient_effect(jj), c.temp_min(jj), c.temp_max(jj));
  }
  if (emission_limit) {
    std::vector<Term> terms;
    add_emission_terms(terms, 0, d, s);
    lp.add_less_equal(std::move(terms), *emission_limit);
  }
  return lp;
}

Decision greedy_step(const SystemState& state, const UncertaintySample& sample,
                     const SystemConfig& config, const BaselineCaps& caps,
                     std::optional<double> emission_limit) {
  const auto lp = greedy_problem(state, sample, config, caps, emission_limit);
  const auto sol = lp::solve(lp);
  if (sol.status != lp::Status::Optimal) {
    throw BaselineError("greedy slot problem " + lp::to_string(sol.status) +
                        ": successor bounds, queue caps or the emission limit cannot be met");
  }
  return DecisionLayout(config).unflatten(sol.x.data());
}

Trace run_variant(Variant variant, const SystemConfig& config,
                  const std::vector<UncertaintySample>& samples, const SystemState& initial_state,
                  const VariantInputs& inputs) {
  SimOptions options;
  options.bounds = inputs.bounds;
  switch (variant) {
    case Variant::Proposed:
    case Variant::NoEmissionBound: {
      const bool proposed = variant == Variant::Proposed;
      const auto& params = proposed ? inputs.params : inputs.unbounded_params;
      if (!params) {
        throw std::invalid_argument("variant " + to_string(variant) +
                                    " needs strategy parameters");
      }
      options.strict = false;
      options.diagnostics = *params;
      return simulate(make_policy(OnlinePolicy(config, *params, proposed)), samples, config,
                      initial_state, options);
    }
    case Variant::OfflineLowCarbon:
    case Variant::Offline: {
      OfflineOptions offline = inputs.offline;
      offline.with_emission_bound = variant == Variant::OfflineLowCarbon;
      const auto result = offline_solve(config, samples, inputs.caps, initial_state, offline);
      Policy replay = [&result](std::size_t t, const SystemState&, const UncertaintySample&) {
        return result.decisions.at(t);
      };
      return simulate(replay, samples, config, initial_state, options);
    }
    case Variant::GreedyLowCarbon:
    case Variant::Greedy: {
      const bool limited = variant == Variant::GreedyLowCarbon;
      const bool cumulative = inputs.cumulative_greedy_limit;
      double emitted = 0.0;
      Policy policy = [&, limited, cumulative](std::size_t t, const SystemState& state,
                                               const UncertaintySample& sample) mutable {
        std::optional<double> limit;
        if (limited) {
          limit = config.emission_cap;
          if (cumulative) {
            *limit += std::max(0.0, static_cast<double>(t) * config.emission_cap - emitted);
          }
        }
        Decision dec = greedy_step(state, sample, config, inputs.caps, limit);
        emitted += slot_costs(config, sample, dec).emission;
        return dec;
      };
      return simulate(policy, samples, config, initial_state, options);
    }
  }
  throw std::invalid_argument("unknown variant");
}

}  // namespace greendc
