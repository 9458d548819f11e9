#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leki/harness.hpp"
#include "leki/presets.hpp"
#include "leki/selfcheck.hpp"

namespace {

const char* preset_text(const std::string& name) {
  if (name == "linear") return leki::presets::kLinear;
  if (name == "nonlinear") return leki::presets::kNonlinear;
  if (name == "lorenz96") return leki::presets::kLorenz96;
  if (name == "dc") return leki::presets::kDc;
  throw leki::ConfigError("unknown preset '" + name +
                          "' (expected linear|nonlinear|lorenz96|dc)");
}

void print_report(const std::string& experiment,
                  const leki::AggregateReport& report) {
  std::printf("experiment: %s   metric: %s\n", experiment.c_str(),
              report.metric.c_str());
  std::printf("%5s %5s %-6s %8s %6s %7s %12s %12s %12s\n", "dim", "J",
              "method", "reached", "maxed", "failed", "mean", "median", "std");
  for (const auto& c : report.cells) {
    std::printf("%5d %5d %-6s %8d %6d %7d", c.dim, c.ensemble,
                c.method.c_str(), c.target_reached, c.max_iterations,
                c.failed);
    auto cell = [](const std::optional<double>& v) {
      if (v)
        std::printf(" %12.5g", *v);
      else
        std::printf(" %12s", "-");
    };
    cell(c.mean);
    cell(c.median);
    cell(c.stddev);
    std::printf("\n");
  }
}

int do_run(const std::string& config_path, const std::string& preset,
           bool have_seed, std::uint64_t seed, const std::string& out_dir,
           bool out_given, int workers, bool json) {
  leki::Config cfg;
  if (!preset.empty()) {
    if (!config_path.empty())
      throw leki::ConfigError(
          "give either a config file or --preset, not both");
    cfg = leki::Config::parse_string(preset_text(preset), "preset:" + preset);
  } else {
    if (config_path.empty())
      throw leki::ConfigError("need a config file or --preset");
    cfg = leki::Config::parse_file(config_path);
  }
  if (have_seed)
    cfg.set("", "seed", leki::ConfigValue{std::int64_t(seed)});

  leki::RunOptions opts;
  opts.out_dir = out_dir;
  if (!out_given) {
    if (const char* env = std::getenv("SOLVE_OUT_DIR"); env && *env)
      opts.out_dir = env;
  }
  opts.workers = workers;
  opts.json_mirror = json;

  const leki::ExperimentConfig ecfg = leki::ExperimentConfig::from_config(cfg);
  const leki::RunOutput out = leki::run_experiment(ecfg, opts);
  print_report(leki::experiment_name(ecfg.experiment), out.report);
  std::printf("wrote %zu trial records under %s\n", out.trials.size(),
              opts.out_dir.c_str());
  return 0;
}

int do_aggregate(const std::vector<std::string>& records) {
  std::map<std::string, std::vector<leki::TrialResult>> by_experiment;
  for (const auto& path : records)
    for (auto& tr : leki::read_trials_csv(path))
      by_experiment[tr.experiment].push_back(std::move(tr));
  if (by_experiment.empty()) throw leki::ConfigError("no trial rows found");
  for (const auto& [experiment, trials] : by_experiment) {
    const auto metric =
        leki::headline_metric(leki::experiment_from_name(experiment));
    print_report(experiment, leki::aggregate(trials, metric));
  }
  return 0;
}

int do_check(std::uint64_t seed) {
  int failures = 0;
  for (const auto& r : leki::run_property_checks(seed)) {
    std::printf("%s  %-42s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    if (!r.passed) ++failures;
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derivative-free inverse-problem solver with covariance "
               "localization"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  bool json = false;
  auto* run_cmd = app.add_subcommand(
      "run", "Run a batch experiment from a config file or preset");
  run_cmd->add_option("config", config_path, "config file path");
  auto* out_opt = run_cmd->add_option(
      "--out", out_dir,
      "output directory (default 'out'; SOLVE_OUT_DIR overrides the default)");
  auto* seed_opt =
      run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_option("--workers", workers, "worker threads (default 1)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--preset", preset,
                      "built-in experiment: linear|nonlinear|lorenz96|dc");
  run_cmd->add_flag("--json", json, "also write JSON mirrors of the outputs");

  std::vector<std::string> records;
  auto* agg_cmd =
      app.add_subcommand("aggregate", "Summarize trial CSVs on stdout");
  agg_cmd->add_option("records", records, "trial CSV files")->required();

  std::uint64_t check_seed = 7;
  auto* check_cmd =
      app.add_subcommand("check", "Run the randomized property suites");
  check_cmd->add_option("--seed", check_seed, "suite seed (default 7)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed())
      return do_run(config_path, preset, seed_opt->count() > 0, seed, out_dir,
                    out_opt->count() > 0, workers, json);
    if (agg_cmd->parsed()) return do_aggregate(records);
    if (check_cmd->parsed()) return do_check(check_seed);
  } catch (const leki::ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
