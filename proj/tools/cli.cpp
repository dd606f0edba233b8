#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "greendc/baselines.hpp"
#include "greendc/online.hpp"
#include "greendc/scenario.hpp"
#include "greendc/serialization.hpp"
#include "greendc/sim.hpp"
#include "greendc/tuning.hpp"

namespace greendc {

namespace {

struct CommonFlags {
  std::string config;
  std::string data;
  std::string params;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> train_slots;
  std::size_t jobs = 1;
};

Experiment load_config(const CommonFlags& f) {
  Experiment e = f.config.empty() ? default_experiment() : load_experiment(f.config);
  if (f.seed) e.seed = *f.seed;
  if (f.train_slots) e.train_slots = *f.train_slots;
  return e;
}

// Data split into the tuning prefix and the held-out evaluation window.
struct Dataset {
  std::vector<UncertaintySample> training;
  std::vector<UncertaintySample> evaluation;
  UncertaintyBounds bounds;
};

Dataset load_dataset(const Experiment& e, const std::string& path) {
  if (path.empty()) throw std::invalid_argument("--data is required");
  auto samples = load_csv(path);
  if (samples.empty()) throw std::invalid_argument(path + ": no samples");
  for (std::size_t t = 0; t < samples.size(); ++t) {
    try {
      samples[t].validate(e.system);
    } catch (const std::exception& ex) {
      throw std::invalid_argument(path + ", slot " + std::to_string(t) + ": " + ex.what());
    }
  }
  if (e.train_slots > samples.size()) {
    throw std::invalid_argument("training slots (" + std::to_string(e.train_slots) +
                                ") exceed the data length (" + std::to_string(samples.size()) + ")");
  }
  Dataset d;
  d.training.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(e.train_slots));
  d.evaluation.assign(samples.begin() + static_cast<std::ptrdiff_t>(e.train_slots), samples.end());
  d.bounds = estimate_bounds(d.training, e.bounds_margin);
  return d;
}

TuningOptions tuning_options(const Experiment& e) {
  TuningOptions o;
  o.v_max = e.v_max;
  o.strict_margin = e.strict_margin;
  return o;
}

MetricsOptions metrics_options(const Experiment& e, const UncertaintyBounds& bounds) {
  MetricsOptions o;
  o.drift_bound = compute_drift_bound(e.system, bounds);
  o.bootstrap_seed = e.seed;
  return o;
}

void require_out(const CommonFlags& f) {
  if (f.out.empty()) throw std::invalid_argument("--out is required");
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw std::invalid_argument("--values: '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("--values must list at least one number");
  return values;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

int cmd_init(const CommonFlags& f, std::ostream& out) {
  require_out(f);
  save_text(f.out, dump(to_json(load_config(f))));
  out << "wrote " << f.out << '\n';
  return 0;
}

int cmd_generate(const CommonFlags& f, std::optional<std::size_t> slots, std::ostream& out) {
  require_out(f);
  Experiment e = load_config(f);
  if (slots) e.slots = *slots;
  if (e.slots == 0) throw std::invalid_argument("--slots must be at least 1");
  const auto samples = generate(e.scenario, e.seed, e.slots);
  std::ostringstream text;
  write_csv(text, samples, e.scenario.num_nodes(), e.scenario.num_centers());
  save_text(f.out, text.str());
  out << "wrote " << samples.size() << " slots to " << f.out << '\n';
  return 0;
}

int cmd_tune(const CommonFlags& f, const std::string& history_csv, std::ostream& out) {
  require_out(f);
  const Experiment e = load_config(f);
  const Dataset d = load_dataset(e, f.data);
  TuningReport report;
  try {
    report = tune(e.system, d.bounds, d.training, tuning_options(e));
  } catch (const TuningError& ex) {
    throw TuningError(std::string(ex.what()) +
                      "; the queue-feasibility conditions on (V, offsets) have no solution");
  }
  Json j = to_json(report);
  j["bounds"] = to_json(d.bounds);
  j["drift_bound"] = compute_drift_bound(e.system, d.bounds);
  save_text(f.out, dump(j));
  if (!history_csv.empty()) {
    std::ostringstream csv;
    csv << "iteration,emission_queue_cap,penalty_weight,simulated_peak\n";
    for (std::size_t k = 0; k < report.history.size(); ++k) {
      const auto& h = report.history[k];
      csv << k << ',' << fmt(h.emission_queue_cap) << ',' << fmt(h.penalty_weight) << ','
          << fmt(h.simulated_peak) << '\n';
    }
    save_text(history_csv, csv.str());
  }
  out << "V = " << fmt(report.params.penalty_weight) << ", Q^E = "
      << fmt(report.params.emission_queue_cap) << ", iterations = " << report.iterations
      << (report.converged ? " (converged)" : " (not converged)") << '\n';
  return 0;
}

StrategyParams load_params(const std::string& path, const SystemConfig& config) {
  if (path.empty()) throw std::invalid_argument("--params is required");
  Json j = load_json(path);
  StrategyParams p = params_from_json(j.contains("params") ? j.at("params") : j);
  p.validate(config);
  return p;
}

int cmd_run(const CommonFlags& f, const std::string& trace_path, std::ostream& out) {
  require_out(f);
  const Experiment e = load_config(f);
  const Dataset d = load_dataset(e, f.data);
  if (d.evaluation.empty()) throw std::invalid_argument("no evaluation slots after the training prefix");
  const StrategyParams params = load_params(f.params, e.system);
  SimOptions options;
  options.strict = false;
  options.diagnostics = params;
  options.bounds = d.bounds;
  std::ofstream trace_file;
  std::optional<TraceCsvWriter> writer;
  if (!trace_path.empty()) {
    trace_file.open(trace_path, std::ios::binary);
    if (!trace_file) throw std::runtime_error("cannot open " + trace_path + " for writing");
    writer.emplace(trace_file, e.system.num_nodes(), e.system.num_centers());
    options.on_record = [&writer](std::size_t t, const SlotRecord& r) { writer->write(t, r); };
  }
  const Trace trace = simulate(make_policy(OnlinePolicy(e.system, params)), d.evaluation,
                               e.system, SystemState::initial(e.system), options);
  if (trace_file.is_open()) {
    trace_file.close();
    if (!trace_file) throw std::runtime_error("failed writing " + trace_path);
  }
  const Report report = metrics(trace, metrics_options(e, d.bounds));
  save_text(f.out, dump(to_json(report)));
  out << "cost rate " << fmt(report.avg_cost_rate) << " $/slot, emission rate "
      << fmt(report.avg_emission_rate) << " tCO2/slot, violations " << report.violation_count
      << '\n';
  return 0;
}

int cmd_compare(const CommonFlags& f, const std::string& variants_text,
                const std::string& json_path, std::ostream& out) {
  require_out(f);
  const Experiment e = load_config(f);
  const Dataset d = load_dataset(e, f.data);
  if (d.evaluation.empty()) throw std::invalid_argument("no evaluation slots after the training prefix");
  std::vector<Variant> variants;
  {
    std::stringstream ss(variants_text);
    std::string item;
    while (std::getline(ss, item, ',')) variants.push_back(parse_variant(item));
  }
  if (variants.empty()) throw std::invalid_argument("--variants must list at least one variant");

  VariantInputs inputs;
  inputs.caps = e.caps;
  inputs.bounds = d.bounds;
  const bool needs_params =
      std::find(variants.begin(), variants.end(), Variant::Proposed) != variants.end();
  if (needs_params) {
    if (f.params.empty()) throw std::invalid_argument("variant proposed needs --params");
    inputs.params = load_params(f.params, e.system);
  }
  if (std::find(variants.begin(), variants.end(), Variant::NoEmissionBound) != variants.end()) {
    inputs.unbounded_params = optimize_params(e.system, d.bounds, 0.0, tuning_options(e)).params;
  }
  const SystemState initial = SystemState::initial(e.system);
  const MetricsOptions mopts = metrics_options(e, d.bounds);
  std::vector<Report> reports(variants.size());
  parallel_for(variants.size(), f.jobs, [&](std::size_t k) {
    const Trace trace = run_variant(variants[k], e.system, d.evaluation, initial, inputs);
    reports[k] = metrics(trace, mopts);
  });

  std::ostringstream csv;
  csv << "variant,cost_rate_usd_per_slot,emission_rate_tCO2_per_slot,cost_standard_error,"
         "emission_standard_error,violations\n";
  Json j = Json::array();
  for (std::size_t k = 0; k < variants.size(); ++k) {
    const auto& r = reports[k];
    csv << to_string(variants[k]) << ',' << fmt(r.avg_cost_rate) << ','
        << fmt(r.avg_emission_rate) << ',' << fmt(r.cost_standard_error) << ','
        << fmt(r.emission_standard_error) << ',' << r.violation_count << '\n';
    Json row = to_json(r);
    row["variant"] = to_string(variants[k]);
    j.push_back(std::move(row));
    out << to_string(variants[k]) << ": cost " << fmt(r.avg_cost_rate) << ", emission "
        << fmt(r.avg_emission_rate) << '\n';
  }
  save_text(f.out, csv.str());
  if (!json_path.empty()) save_text(json_path, dump(j));
  return 0;
}

int cmd_sweep(const CommonFlags& f, const std::string& axis_text, const std::string& values_text,
              std::ostream& out) {
  require_out(f);
  const Experiment e = load_config(f);
  const Dataset d = load_dataset(e, f.data);
  if (d.evaluation.empty()) throw std::invalid_argument("no evaluation slots after the training prefix");
  SweepInputs inputs;
  inputs.config = e.system;
  inputs.bounds = d.bounds;
  inputs.training = d.training;
  inputs.evaluation = d.evaluation;
  inputs.tuning = tuning_options(e);
  inputs.jobs = f.jobs;
  const SweepAxis axis = parse_sweep_axis(axis_text);
  const auto points = sweep(axis, parse_values(values_text), inputs);
  std::ostringstream csv;
  csv << to_string(axis)
      << ",status,param_penalty_weight,param_emission_queue_cap,cost_rate_usd_per_slot,"
         "emission_rate_tCO2_per_slot,cost_standard_error,emission_standard_error,violations,"
         "error\n";
  bool all_ok = true;
  for (const auto& p : points) {
    csv << fmt(p.value) << ',' << (p.ok ? "ok" : "failed") << ',';
    if (p.ok) {
      csv << fmt(p.params.penalty_weight) << ',' << fmt(p.params.emission_queue_cap) << ','
          << fmt(p.report.avg_cost_rate) << ',' << fmt(p.report.avg_emission_rate) << ','
          << fmt(p.report.cost_standard_error) << ',' << fmt(p.report.emission_standard_error)
          << ',' << p.report.violation_count << ",\n";
    } else {
      std::string msg = p.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv << ",,,,,,," << msg << '\n';
      all_ok = false;
    }
    out << to_string(axis) << '=' << fmt(p.value) << ": "
        << (p.ok ? "cost " + fmt(p.report.avg_cost_rate) + ", emission " +
                       fmt(p.report.avg_emission_rate)
                 : "failed: " + p.error)
        << '\n';
  }
  save_text(f.out, csv.str());
  return all_ok ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carbon-capped online coordination of distributed data centers"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CommonFlags f;
  std::optional<std::size_t> slots;
  std::string history_csv, trace_path, variants = "proposed,C1,C2,C3,C4,C5", json_path;
  std::string axis, values;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", f.config,
                    "Experiment JSON; missing fields fall back to the built-in defaults")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Random seed (overrides the config file)");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", f.data, "Uncertainty CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--train-slots", f.train_slots,
                    "Leading slots used for tuning and bounds (overrides the config file; "
                    "default 1000)");
  };

  auto* init = app.add_subcommand("init", "Write the effective experiment config as JSON");
  add_config(init);
  init->add_option("--out", f.out, "Output JSON path")->required();

  auto* gen = app.add_subcommand("generate", "Draw i.i.d. uncertainty samples to a CSV file");
  add_config(gen);
  gen->add_option("--slots", slots, "Number of slots (overrides the config file; default 10000)");
  gen->add_option("--out", f.out, "Output CSV path")->required();

  auto* tun = app.add_subcommand("tune", "Optimize strategy parameters on the training prefix");
  add_config(tun);
  add_data(tun);
  tun->add_option("--out", f.out, "Output JSON with parameters and tuning history")->required();
  tun->add_option("--history-csv", history_csv, "Also write the Q^E iteration history as CSV");

  auto* run = app.add_subcommand("run", "Evaluate tuned parameters on the held-out slots");
  add_config(run);
  add_data(run);
  run->add_option("--params", f.params, "Parameter JSON from 'tune'")->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", f.out, "Output report JSON")->required();
  run->add_option("--trace", trace_path, "Also write the per-slot trace CSV");

  auto* cmp = app.add_subcommand("compare", "Evaluate several policies on the held-out slots");
  add_config(cmp);
  add_data(cmp);
  cmp->add_option("--params", f.params, "Parameter JSON from 'tune' (needed for 'proposed')")
      ->check(CLI::ExistingFile);
  cmp->add_option("--variants", variants,
                  "Comma-separated subset of proposed,C1,C2,C3,C4,C5")
      ->capture_default_str();
  cmp->add_option("--jobs", f.jobs, "Policies evaluated in parallel")->check(CLI::PositiveNumber);
  cmp->add_option("--out", f.out, "Output comparison CSV")->required();
  cmp->add_option("--json", json_path, "Also write full per-variant reports as JSON");

  auto* swp = app.add_subcommand("sweep", "Retune and evaluate across a grid of Q^E or C^E");
  add_config(swp);
  add_data(swp);
  swp->add_option("--axis", axis, "emission_queue_cap (QE) or emission_cap (CE)")->required();
  swp->add_option("--values", values, "Strictly increasing comma-separated values")->required();
  swp->add_option("--jobs", f.jobs, "Grid points evaluated in parallel")
      ->check(CLI::PositiveNumber);
  swp->add_option("--out", f.out, "Output CSV, one row per value")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*init) return cmd_init(f, out);
    if (*gen) return cmd_generate(f, slots, out);
    if (*tun) return cmd_tune(f, history_csv, out);
    if (*run) return cmd_run(f, trace_path, out);
    if (*cmp) return cmd_compare(f, variants, json_path, out);
    if (*swp) return cmd_sweep(f, axis, values, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace greendc
