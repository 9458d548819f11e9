#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leki/config.hpp"
#include "leki/diagnostics.hpp"
#include "leki/dynamics.hpp"
#include "leki/localization.hpp"

namespace leki {

enum class ExperimentKind { Linear, Nonlinear, Lorenz96, DcResistivity, Custom };

ExperimentKind experiment_from_name(const std::string& name);
std::string experiment_name(ExperimentKind k);

// Which taper to build and how to apply it.
struct LocalizationSettings {
  bool enabled = true;
  SchemeKind scheme = SchemeKind::Centralized;
  Kernel kernel = Kernel::Gaussian;
  double radius = 1.0;
  std::string metric = "lattice";  // lattice | periodic | log-grid
  int split_index = 0;             // mixed scheme only
};

struct DcSettings {
  double spacing_min = 1.0;   // half-spacings AB/2 in meters, log-spaced
  double spacing_max = 1e4;
  int spacing_count = 18;
  double noise_fraction = 0.05;  // synthetic stds as a fraction of the data
  bool add_noise = true;         // perturb the synthetic data by the stds
  double clamp_min = 0.1;        // resistivity floor applied after each step
  double init_low = 0.5;         // uniform initial-ensemble bounds
  double init_high = 5.0;
  std::vector<double> truth_resistivities{5.0, 50.0, 10.0};
  std::vector<double> truth_boundaries{10.0, 1000.0};  // depths in meters
  std::string data_file;  // field data CSV; overrides the synthetic truth
};

struct Lorenz96Settings {
  double forcing = 8.0;
  double obs_time = 0.2;
  double model_dt = 0.05;
  double spinup = 1000.0;  // attractor integration between chained truths
};

// Everything one batch needs. Built from a parsed config file or preset.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Linear;
  std::vector<int> dims{50};
  std::vector<int> ensemble_sizes{50};
  int trials = 10;
  std::uint64_t seed = 1;
  LocalizationSettings localization;
  double inflation_sigma = 0.0;
  StepPolicy policy;
  StoppingRule stop;
  bool full_diagnostics = false;  // adds R-norm and ratio columns
  // Tikhonov prior: "identity", "scalar" (times c0_scale), "diagonal" or
  // "dense" (read from c0_path as CSV). Empty kind = no regularization;
  // lorenz96 defaults to identity.
  std::string c0_kind;
  double c0_scale = 1.0;
  std::string c0_path;
  DcSettings dc;
  Lorenz96Settings l96;
  std::string custom_h_csv;   // custom experiment: dense linear map from CSV
  double noise_scale = 1.0;   // multiplies the standard-normal data noise

  static ExperimentConfig from_config(const Config& cfg);
  void validate() const;
};

// Outcome of one (dim, J, method, trial) run.
struct TrialResult {
  std::string experiment;
  int dim = 0;
  int ensemble = 0;
  int trial = 0;
  std::string method;  // "eki" or "leki"
  std::uint64_t seed_used = 0;
  std::uint64_t input_hash = 0;  // over truth, data and initial ensemble
  ExitCondition exit = ExitCondition::Running;
  MetricsRow final_row;
  std::string record_path;  // per-iteration CSV, empty when not written
};

struct CellStats {
  int dim = 0;
  int ensemble = 0;
  std::string method;
  int target_reached = 0;
  int max_iterations = 0;
  int failed = 0;
  // Over the non-failed trials' final headline metric; absent when all failed.
  std::optional<double> mean, median, stddev;
};

struct AggregateReport {
  std::string metric;  // which final-row column the statistics summarize
  std::vector<CellStats> cells;
};

// Failed trials are excluded from mean/median/std but counted. metric is one
// of "misfit", "rmse", "scaled_misfit".
AggregateReport aggregate(const std::vector<TrialResult>& results,
                          const std::string& metric);

std::string headline_metric(ExperimentKind k);

// Serialization of batch outputs.
void write_trials_csv(const std::string& path,
                      const std::vector<TrialResult>& results);
std::vector<TrialResult> read_trials_csv(const std::string& path);
void write_summary_csv(const std::string& path, const AggregateReport& report);
void write_summary_json(const std::string& path, const AggregateReport& report);

struct RunOutput {
  std::vector<TrialResult> trials;
  AggregateReport report;
};

struct RunOptions {
  std::string out_dir = "out";
  int workers = 1;
  bool json_mirror = false;
  bool write_records = true;  // per-iteration CSVs under <out>/runs
};

// Run the full batch: every (dim, J, trial) runs the unlocalized and the
// localized solver on identical draws. Deterministic for a given config and
// seed, independent of worker count.
RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace leki
