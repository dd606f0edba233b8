#include "greendc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "greendc/scenario.hpp"

namespace greendc {

namespace {

std::string describe_all(std::size_t slot, const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << "infeasible decision at slot " << slot << ':';
  for (const auto& v : violations) os << "\n  " << v.describe();
  return os.str();
}

void extend(QueueRange& range, const Vector& v) {
  if (range.min.size() == 0) {
    range.min = v;
    range.max = v;
  } else {
    range.min = range.min.cwiseMin(v);
    range.max = range.max.cwiseMax(v);
  }
}

}  // namespace

InfeasibleDecision::InfeasibleDecision(std::size_t slot, std::vector<Violation> violations)
    : std::runtime_error(describe_all(slot, violations)), slot_(slot),
      violations_(std::move(violations)) {}

Policy make_policy(const OnlinePolicy& policy) {
  return [policy](std::size_t, const SystemState& state, const UncertaintySample& sample) {
    return policy(state, sample);
  };
}

Trace simulate(const Policy& policy, const std::vector<UncertaintySample>& samples,
               const SystemConfig& config, const SystemState& initial_state,
               const SimOptions& options) {
  config.validate();
  Trace trace;
  trace.config = config;
  trace.params = options.diagnostics ? *options.diagnostics : StrategyParams::zero(config);
  trace.initial_state = initial_state;
  if (options.keep_records) trace.records.reserve(samples.size());

  SystemState state = initial_state;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto& sample = samples[t];
    if (options.bounds && !options.bounds->contains(sample, kFeasibilityTolerance)) {
      ++trace.out_of_bounds_samples;
    }
    SlotRecord rec;
    rec.decision = policy(t, state, sample);
    auto violations = check_feasible(config, sample, state, rec.decision);
    if (!violations.empty()) {
      if (options.strict) throw InfeasibleDecision(t, std::move(violations));
      for (const auto& v : violations) trace.violations.push_back({t, v});
    }
    rec.violations = violations.size();
    rec.costs = slot_costs(config, sample, rec.decision);
    const auto vq = virtual_queues(state, trace.params);
    rec.lyapunov = lyapunov_value(vq);
    rec.drift_term = drift_term(vq, sample, rec.decision, config);
    SystemState next = advance_state(state, sample, rec.decision, config);
    rec.drift = lyapunov_value(virtual_queues(next, trace.params)) - rec.lyapunov;
    rec.emission_queue = next.emission_queue;
    rec.state = std::move(state);
    rec.sample = sample;
    if (options.on_record) options.on_record(t, rec);
    if (options.keep_records) trace.records.push_back(std::move(rec));
    state = std::move(next);
  }
  trace.final_state = std::move(state);
  return trace;
}

double block_bootstrap_se(const std::vector<double>& series, std::size_t block,
                          std::size_t replicates, std::uint64_t seed) {
  const std::size_t n = series.size();
  if (n < 2 || replicates < 2) return 0.0;
  block = std::clamp<std::size_t>(block, 1, n);
  const std::size_t starts = n - block + 1;
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + series[k];
  Rng rng(seed);
  std::vector<double> means(replicates);
  for (auto& mean : means) {
    double sum = 0.0;
    std::size_t taken = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t s = static_cast<std::size_t>(rng.uniform() * static_cast<double>(starts));
      const std::size_t len = std::min(block, n - taken);
      sum += prefix[s + len] - prefix[s];
      taken += len;
    }
    mean = sum / static_cast<double>(n);
  }
  const double avg = std::accumulate(means.begin(), means.end(), 0.0) /
                     static_cast<double>(replicates);
  double var = 0.0;
  for (double m : means) var += (m - avg) * (m - avg);
  return std::sqrt(var / static_cast<double>(replicates - 1));
}

std::vector<double> cost_series(const Trace& trace, std::size_t begin, std::size_t end) {
  std::vector<double> out;
  for (std::size_t t = begin; t < end; ++t) out.push_back(trace.records.at(t).costs.total);
  return out;
}

std::vector<double> emission_series(const Trace& trace, std::size_t begin, std::size_t end) {
  std::vector<double> out;
  for (std::size_t t = begin; t < end; ++t) out.push_back(trace.records.at(t).costs.emission);
  return out;
}

double paired_standard_error(const std::vector<double>& a, const std::vector<double>& b,
                             const MetricsOptions& options) {
  if (a.size() != b.size()) throw std::invalid_argument("paired series differ in length");
  std::vector<double> diff(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
  return block_bootstrap_se(diff, options.bootstrap_block, options.bootstrap_replicates,
                            options.bootstrap_seed);
}

Report metrics(const Trace& trace, std::size_t begin, std::size_t end,
               const MetricsOptions& options) {
  if (begin >= end) throw std::invalid_argument("metrics window is empty");
  if (end > trace.records.size()) throw std::invalid_argument("metrics window exceeds the trace");
  Report r;
  r.window_begin = begin;
  r.window_end = end;
  const auto costs = cost_series(trace, begin, end);
  const auto emissions = emission_series(trace, begin, end);
  const double len = static_cast<double>(end - begin);
  r.avg_cost_rate = std::accumulate(costs.begin(), costs.end(), 0.0) / len;
  r.avg_emission_rate = std::accumulate(emissions.begin(), emissions.end(), 0.0) / len;
  r.cost_standard_error = block_bootstrap_se(costs, options.bootstrap_block,
                                             options.bootstrap_replicates, options.bootstrap_seed);
  r.emission_standard_error = block_bootstrap_se(
      emissions, options.bootstrap_block, options.bootstrap_replicates, options.bootstrap_seed);
  r.emission_cap = trace.config.emission_cap;
  r.exceeds_emission_cap = r.avg_emission_rate > r.emission_cap;
  r.max_emission_queue = trace.records[begin].state.emission_queue;
  for (std::size_t t = begin; t < end; ++t) {
    const auto& rec = trace.records[t];
    r.max_emission_queue = std::max(r.max_emission_queue, rec.emission_queue);
    extend(r.front_queue, rec.state.front_queue);
    extend(r.back_queue, rec.state.back_queue);
    extend(r.stored_energy, rec.state.stored_energy);
    extend(r.temperature, rec.state.temperature);
  }
  // Successor of the last slot in the window.
  const SystemState& last =
      end < trace.records.size() ? trace.records[end].state : trace.final_state;
  extend(r.front_queue, last.front_queue);
  extend(r.back_queue, last.back_queue);
  extend(r.stored_energy, last.stored_energy);
  extend(r.temperature, last.temperature);
  for (const auto& v : trace.violations) {
    if (v.slot >= begin && v.slot < end) ++r.violation_count;
  }
  r.out_of_bounds_samples = trace.out_of_bounds_samples;
  r.penalty_weight = trace.params.penalty_weight;
  if (options.drift_bound) {
    r.drift_bound = *options.drift_bound;
    r.gap_bound = r.penalty_weight > 0.0 ? r.drift_bound / r.penalty_weight
                                         : std::numeric_limits<double>::infinity();
  }
  return r;
}

Report metrics(const Trace& trace, const MetricsOptions& options) {
  return metrics(trace, 0, trace.records.size(), options);
}

TraceCsvWriter::TraceCsvWriter(std::ostream& out, std::size_t nodes, std::size_t centers)
    : out_(out), nodes_(nodes), centers_(centers) {
  out_ << "t,cost_total,cost_workload,cost_storage,cost_electricity,emission,emission_queue,"
          "drift_term,lyapunov,drift,violations";
  auto per_node = [&](const char* name) {
    for (std::size_t i = 0; i < nodes_; ++i) out_ << ',' << name << '_' << i;
  };
  auto per_center = [&](const char* name) {
    for (std::size_t j = 0; j < centers_; ++j) out_ << ',' << name << '_' << j;
  };
  per_node("q_F");
  per_center("q_B");
  per_center("e_S");
  per_center("tau_H");
  per_node("a_F");
  for (std::size_t i = 0; i < nodes_; ++i) {
    for (std::size_t j = 0; j < centers_; ++j) out_ << ",m_R_" << i << '_' << j;
  }
  per_center("p_B");
  per_center("p_SC");
  per_center("p_SD");
  per_center("p_C");
  out_ << '\n' << std::setprecision(17);
}

void TraceCsvWriter::write(std::size_t t, const SlotRecord& r) {
  out_ << t << ',' << r.costs.total << ',' << r.costs.workload << ',' << r.costs.storage << ','
       << r.costs.electricity << ',' << r.costs.emission << ',' << r.emission_queue << ','
       << r.drift_term << ',' << r.lyapunov << ',' << r.drift << ',' << r.violations;
  auto put = [&](const Vector& v) {
    for (double x : v) out_ << ',' << x;
  };
  put(r.state.front_queue);
  put(r.state.back_queue);
  put(r.state.stored_energy);
  put(r.state.temperature);
  put(r.decision.accept);
  for (Eigen::Index i = 0; i < r.decision.transfer.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.decision.transfer.cols(); ++j) {
      out_ << ',' << r.decision.transfer(i, j);
    }
  }
  put(r.decision.process);
  put(r.decision.charge);
  put(r.decision.discharge);
  put(r.decision.cooling);
  out_ << '\n';
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  TraceCsvWriter writer(out, trace.config.num_nodes(), trace.config.num_centers());
  for (std::size_t t = 0; t < trace.records.size(); ++t) writer.write(t, trace.records[t]);
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::EmissionQueueCap ? "emission_queue_cap" : "emission_cap";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "emission_queue_cap" || name == "QE") return SweepAxis::EmissionQueueCap;
  if (name == "emission_cap" || name == "CE") return SweepAxis::EmissionCap;
  throw std::invalid_argument("unknown sweep axis '" + name +
                              "' (expected emission_queue_cap or emission_cap)");
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& task) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          task(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& values,
                              const SweepInputs& inputs) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] > values[k - 1])) {
      throw std::invalid_argument("sweep values must be strictly increasing");
    }
  }
  if (inputs.evaluation.empty()) throw std::invalid_argument("sweep needs evaluation samples");
  std::vector<SweepPoint> points(values.size());
  parallel_for(values.size(), inputs.jobs, [&](std::size_t k) {
    SweepPoint& p = points[k];
    p.value = values[k];
    try {
      SystemConfig config = inputs.config;
      if (axis == SweepAxis::EmissionQueueCap) {
        if (!(p.value >= 0.0)) throw std::invalid_argument("emission queue cap must be nonnegative");
        p.params = optimize_params(config, inputs.bounds, p.value, inputs.tuning).params;
      } else {
        if (!(p.value >= 0.0)) throw std::invalid_argument("emission cap must be nonnegative");
        config.emission_cap = p.value;
        p.params = tune(config, inputs.bounds, inputs.training, inputs.tuning).params;
      }
      SimOptions options;
      options.strict = false;
      options.diagnostics = p.params;
      options.bounds = inputs.bounds;
      const Trace trace = simulate(make_policy(OnlinePolicy(config, p.params)), inputs.evaluation,
                                   config, SystemState::initial(config), options);
      MetricsOptions mopts;
      mopts.drift_bound = compute_drift_bound(config, inputs.bounds);
      p.report = metrics(trace, mopts);
      p.costs = cost_series(trace, 0, trace.size());
      p.emissions = emission_series(trace, 0, trace.size());
      p.ok = true;
    } catch (const std::exception& e) {
      p.ok = false;
      p.error = e.what();
    }
  });
  return points;
}

}  // namespace greendc
