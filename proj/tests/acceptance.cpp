// Acceptance runner: one PASS/FAIL line per criterion on the default
// scenario (2 nodes, 3 centers, 1,000 tuning + 9,000 evaluation slots).
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "greendc/baselines.hpp"
#include "greendc/linprog.hpp"
#include "greendc/online.hpp"
#include "greendc/scenario.hpp"
#include "greendc/sim.hpp"
#include "greendc/tuning.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace greendc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kStateTolerance = kFeasibilityTolerance;  // criterion 1
constexpr double kGuardSigmas = 2.0;                         // criteria 3 and 8
constexpr double kGapSigmas = 3.0;                           // criterion 4
constexpr double kLpMatchTolerance = 1e-6;                   // criterion 5
constexpr double kDriftSlack = 1e-9;                         // criterion 6, relative
constexpr std::size_t kMaxTuningIterations = 15;             // criterion 7
constexpr double kGridTolerance = 1e-6;                      // criterion 9, integral vertices
const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};
const std::vector<double> kQueueCapGrid = {10, 25, 40, 55, 70};
const std::vector<double> kEmissionCapGrid = {1.0, 1.1, 1.2, 1.3, 1.4};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

struct SeedRun {
  Experiment experiment;
  std::vector<UncertaintySample> training;
  std::vector<UncertaintySample> evaluation;
  UncertaintyBounds bounds;
  TuningReport tuning;
  Trace proposed;
  Report report;
};

MetricsOptions metrics_options(std::uint64_t seed) {
  MetricsOptions m;
  m.bootstrap_seed = seed;
  return m;
}

SeedRun run_seed(std::uint64_t seed) {
  SeedRun r;
  r.experiment = default_experiment();
  r.experiment.seed = seed;
  const auto all = generate(r.experiment.scenario, seed, r.experiment.slots);
  const auto split = static_cast<std::ptrdiff_t>(r.experiment.train_slots);
  r.training.assign(all.begin(), all.begin() + split);
  r.evaluation.assign(all.begin() + split, all.end());
  r.bounds = estimate_bounds(r.training, r.experiment.bounds_margin);
  r.tuning = tune(r.experiment.system, r.bounds, r.training);
  VariantInputs in;
  in.params = r.tuning.params;
  in.bounds = r.bounds;
  r.proposed = run_variant(Variant::Proposed, r.experiment.system, r.evaluation,
                           SystemState::initial(r.experiment.system), in);
  r.report = metrics(r.proposed, metrics_options(seed));
  return r;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Trend check allowing at most one inversion, and only one smaller than
// kGuardSigmas paired standard errors.
Outcome monotone(const std::vector<SweepPoint>& points, bool use_cost, int direction,
                 const MetricsOptions& m, const char* label) {
  Outcome o;
  std::size_t inversions = 0;
  bool small = true;
  std::ostringstream detail;
  detail << label << " [";
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!points[k].ok) {
      return {false, std::string(label) + " point " + num(points[k].value) + " failed: " + points[k].error};
    }
    const double y = use_cost ? points[k].report.avg_cost_rate : points[k].report.avg_emission_rate;
    detail << (k ? " " : "") << num(y);
    if (k == 0) continue;
    const double prev =
        use_cost ? points[k - 1].report.avg_cost_rate : points[k - 1].report.avg_emission_rate;
    const double step = direction * (y - prev);
    if (step < 0) {
      ++inversions;
      const auto& a = use_cost ? points[k].costs : points[k].emissions;
      const auto& b = use_cost ? points[k - 1].costs : points[k - 1].emissions;
      const double se = paired_standard_error(a, b, m);
      detail << "(inv " << num(-step, 3) << " vs 2se " << num(kGuardSigmas * se, 3) << ")";
      if (-step >= kGuardSigmas * se) small = false;
    }
  }
  detail << "]";
  o.pass = inversions == 0 || (inversions == 1 && small);
  o.detail = detail.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int failures = 0;

void emit(int id, const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

}  // namespace

int main() {
  std::vector<SeedRun> runs;
  for (auto seed : kSeeds) runs.push_back(run_seed(seed));
  const SeedRun& base = runs.front();
  const SystemConfig& config = base.experiment.system;
  const SystemState initial = SystemState::initial(config);
  const MetricsOptions mopts = metrics_options(base.experiment.seed);

  emit(1, "feasibility", [&] {
    Outcome o{true, ""};
    std::ostringstream d;
    for (const auto& r : runs) {
      std::size_t bad = 0;
      for (const auto& rec : r.proposed.records) {
        for (const auto& v : check_state(config, rec.state)) bad += v.amount > kStateTolerance;
      }
      for (const auto& v : check_state(config, r.proposed.final_state)) bad += v.amount > kStateTolerance;
      bad += r.report.violation_count;
      d << "seed " << r.experiment.seed << ": " << bad << " violations over "
        << r.proposed.size() << " slots; ";
      o.pass = o.pass && bad == 0;
    }
    o.detail = d.str();
    return o;
  });

  emit(2, "emission cap", [&] {
    Outcome o{true, ""};
    std::ostringstream d;
    for (const auto& r : runs) {
      const double window = static_cast<double>(r.proposed.size());
      const double delta = r.report.max_emission_queue / window;
      const bool ok = r.report.avg_emission_rate <= config.emission_cap + delta;
      d << "seed " << r.experiment.seed << ": " << num(r.report.avg_emission_rate) << " <= "
        << num(config.emission_cap + delta) << "; ";
      o.pass = o.pass && ok;
    }
    o.detail = d.str();
    return o;
  });

  // Comparison policies on seed 1's evaluation window.
  VariantInputs inputs;
  inputs.params = base.tuning.params;
  inputs.unbounded_params = optimize_params(config, base.bounds, 0.0).params;
  inputs.caps = base.experiment.caps;
  inputs.bounds = base.bounds;
  std::vector<Trace> traces;
  std::vector<Report> reports;
  for (Variant v : all_variants()) {
    traces.push_back(v == Variant::Proposed ? base.proposed
                                            : run_variant(v, config, base.evaluation, initial, inputs));
    reports.push_back(metrics(traces.back(), mopts));
  }
  auto idx = [](Variant v) { return static_cast<std::size_t>(v); };
  const Report& proposed = reports[idx(Variant::Proposed)];
  const Report& c1 = reports[idx(Variant::OfflineLowCarbon)];
  const Report& c2 = reports[idx(Variant::GreedyLowCarbon)];

  emit(3, "method ordering", [&] {
    const auto n = base.evaluation.size();
    const double se_low = paired_standard_error(cost_series(traces[idx(Variant::Proposed)], 0, n),
                                                cost_series(traces[idx(Variant::OfflineLowCarbon)], 0, n), mopts);
    const double se_high = paired_standard_error(cost_series(traces[idx(Variant::GreedyLowCarbon)], 0, n),
                                                 cost_series(traces[idx(Variant::Proposed)], 0, n), mopts);
    bool ok = c1.avg_cost_rate + kGuardSigmas * se_low < proposed.avg_cost_rate &&
              proposed.avg_cost_rate + kGuardSigmas * se_high < c2.avg_cost_rate;
    std::ostringstream d;
    d << "cost C1 " << num(c1.avg_cost_rate) << " < proposed " << num(proposed.avg_cost_rate)
      << " < C2 " << num(c2.avg_cost_rate) << " (paired se " << num(se_low, 3) << ", "
      << num(se_high, 3) << "); emission";
    for (Variant v : {Variant::Offline, Variant::Greedy, Variant::NoEmissionBound}) {
      const Report& r = reports[idx(v)];
      const bool above = r.avg_emission_rate > config.emission_cap + kGuardSigmas * r.emission_standard_error;
      ok = ok && above;
      d << ' ' << to_string(v) << ' ' << num(r.avg_emission_rate) << " (se "
        << num(r.emission_standard_error, 3) << ")";
    }
    d << " vs cap " << num(config.emission_cap);
    return Outcome{ok, d.str()};
  });

  emit(4, "optimality gap bound", [&] {
    const double b = compute_drift_bound(config, base.bounds);
    const double v = base.tuning.params.penalty_weight;
    const double limit = c1.avg_cost_rate + b / v + kGapSigmas * proposed.cost_standard_error;
    std::ostringstream d;
    d << "proposed " << num(proposed.avg_cost_rate) << " <= C1 " << num(c1.avg_cost_rate)
      << " + B/V " << num(b / v) << " + 3se " << num(kGapSigmas * proposed.cost_standard_error);
    return Outcome{proposed.avg_cost_rate <= limit, d.str()};
  });

  emit(5, "closed form equals LP", [&] {
    Rng rng(505);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const SystemState s = testing::random_state(config, rng);
      const StrategyParams p = testing::random_params(config, rng);
      const UncertaintySample u = rng.uniform() < 0.5 ? base.evaluation[k] : testing::random_sample(config, rng);
      const auto coeffs = drift_coefficients(virtual_queues(s, p), u, p, config);
      const double closed = coeffs.evaluate(online_step(s, u, p, config)) - coeffs.constant;
      const auto sol = lp::solve(online_problem(coeffs, u, config));
      if (sol.status != lp::Status::Optimal) return Outcome{false, "oracle LP " + lp::to_string(sol.status)};
      worst = std::max(worst, std::abs(closed - sol.objective));
    }
    return Outcome{worst <= kLpMatchTolerance, "1000 triples, max |difference| " + num(worst, 3)};
  });

  emit(6, "drift bound", [&] {
    const auto samples = generate(base.experiment.scenario, 606, 1000);
    const UncertaintyBounds b = estimate_bounds(samples, 0.0);
    const double bound = compute_drift_bound(config, b);
    Rng rng(606);
    std::size_t bad = 0;
    std::size_t slots = 0;
    for (const StrategyParams& p : {base.tuning.params, testing::random_params(config, rng)}) {
      SimOptions opts;
      opts.strict = false;
      opts.diagnostics = p;
      opts.keep_records = false;
      opts.on_record = [&](std::size_t, const SlotRecord& r) {
        ++slots;
        if (r.drift > r.drift_term + bound + kDriftSlack * (1 + std::abs(r.drift))) ++bad;
      };
      simulate(make_policy(OnlinePolicy(config, p)), samples, config, initial, opts);
    }
    return Outcome{bad == 0, std::to_string(slots - bad) + "/" + std::to_string(slots) +
                                 " slots within I + B (B = " + num(bound) + ")"};
  });

  emit(7, "tuning convergence", [&] {
    std::ostringstream d;
    d << "converged " << (base.tuning.converged ? "yes" : "no") << " after "
      << base.tuning.iterations << " iterations, Q^E history";
    for (const auto& h : base.tuning.history) d << ' ' << num(h.emission_queue_cap);
    d << " -> " << num(base.tuning.params.emission_queue_cap);
    return Outcome{base.tuning.converged && base.tuning.iterations <= kMaxTuningIterations, d.str()};
  });

  emit(8, "sweep monotonicity", [&] {
    SweepInputs in;
    in.config = config;
    in.bounds = base.bounds;
    in.training = base.training;
    in.evaluation = base.evaluation;
    const auto qe = sweep(SweepAxis::EmissionQueueCap, kQueueCapGrid, in);
    const auto ce = sweep(SweepAxis::EmissionCap, kEmissionCapGrid, in);
    const Outcome a = monotone(qe, true, +1, mopts, "Q^E cost");
    const Outcome b = monotone(qe, false, -1, mopts, "Q^E emission");
    const Outcome c = monotone(ce, true, -1, mopts, "C^E cost");
    return Outcome{a.pass && b.pass && c.pass, a.detail + "; " + b.detail + "; " + c.detail};
  });

  emit(9, "offline and LP oracles", [&] {
    const SystemConfig c = testing::grid_config();
    const std::vector<UncertaintySample> u = {testing::sample_1x1(2.0, -1.0, 10.0, 0.5),
                                              testing::sample_1x1(1.0, 0.0, 30.0, 0.5)};
    // Tight backlog caps force work to be processed inside the horizon.
    const BaselineCaps caps{0.5, 0.5};
    OfflineOptions opts;
    opts.with_emission_bound = false;
    opts.solver = OfflineOptions::Solver::Simplex;
    const double brute = testing::brute_force_two_slots(c, u, caps);
    const double lp_cost = 2.0 * offline_solve(c, u, caps, SystemState::initial(c), opts).average_cost;
    bool ok = brute > 0.0 && std::abs(lp_cost - brute) <= kGridTolerance;
    Rng rng(909);
    double worst = 0.0;
    std::size_t lps = 0;
    for (int k = 0; k < 200; ++k) {
      const auto r = testing::random_lp(rng, 1 + k % 5, 1 + k % 5);
      const auto sol = lp::solve(r.program);
      if (sol.status != lp::Status::Optimal) { ok = false; continue; }
      const double grid = testing::grid_minimum(r.program, r.points_per_dim);
      const double gap = grid - sol.objective;
      ok = ok && gap >= -1e-9 && gap <= testing::grid_gap_bound(r, sol.x);
      worst = std::max(worst, gap);
      ++lps;
    }
    return Outcome{ok, "T=2 horizon LP " + num(lp_cost, 10) + " vs grid " + num(brute, 10) + "; " +
                           std::to_string(lps) + " random LPs, largest grid gap " + num(worst, 3) +
                           " within resolution"};
  });

  emit(10, "determinism", [&] {
    const fs::path root = fs::temp_directory_path() / "greendc_acceptance";
    fs::remove_all(root);
    std::vector<std::string> params, traces_csv, data;
    for (const char* tag : {"a", "b"}) {
      const fs::path dir = root / tag;
      fs::create_directories(dir);
      std::ostringstream out, err;
      auto run = [&](std::vector<std::string> args) {
        if (run_cli(args, out, err) != 0) throw std::runtime_error(err.str());
      };
      run({"generate", "--seed", "7", "--slots", "3000", "--out", (dir / "data.csv").string()});
      run({"tune", "--seed", "7", "--data", (dir / "data.csv").string(), "--out", (dir / "params.json").string()});
      run({"run", "--seed", "7", "--data", (dir / "data.csv").string(), "--params",
           (dir / "params.json").string(), "--out", (dir / "report.json").string(), "--trace",
           (dir / "trace.csv").string()});
      data.push_back(slurp(dir / "data.csv"));
      params.push_back(slurp(dir / "params.json"));
      traces_csv.push_back(slurp(dir / "trace.csv") + slurp(dir / "report.json"));
    }
    fs::remove_all(root);
    const bool ok = !params[0].empty() && !traces_csv[0].empty() && data[0] == data[1] &&
                    params[0] == params[1] && traces_csv[0] == traces_csv[1];
    return Outcome{ok, "params JSON " + std::to_string(params[0].size()) + " bytes, trace CSV + report " +
                           std::to_string(traces_csv[0].size()) + " bytes, byte-identical: " +
                           (ok ? "yes" : "no")};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
