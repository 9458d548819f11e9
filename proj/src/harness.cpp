#include "leki/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "leki/csv.hpp"
#include "leki/dc_resistivity.hpp"
#include "leki/models.hpp"
#include "leki/rng.hpp"
#include "leki/teki.hpp"

namespace leki {

namespace fs = std::filesystem;

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "linear") return ExperimentKind::Linear;
  if (name == "nonlinear") return ExperimentKind::Nonlinear;
  if (name == "lorenz96") return ExperimentKind::Lorenz96;
  if (name == "dc-resistivity") return ExperimentKind::DcResistivity;
  if (name == "custom") return ExperimentKind::Custom;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Linear: return "linear";
    case ExperimentKind::Nonlinear: return "nonlinear";
    case ExperimentKind::Lorenz96: return "lorenz96";
    case ExperimentKind::DcResistivity: return "dc-resistivity";
    case ExperimentKind::Custom: return "custom";
  }
  throw UsageError("unknown experiment kind");
}

std::string headline_metric(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Lorenz96: return "rmse";
    case ExperimentKind::DcResistivity: return "scaled_misfit";
    default: return "misfit";
  }
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  ExperimentConfig e;
  e.experiment = experiment_from_name(cfg.get_string("", "experiment", "linear"));
  if (cfg.has("", "dims")) {
    e.dims.clear();
    for (auto v : cfg.get_int_list("", "dims")) e.dims.push_back(int(v));
  }
  if (cfg.has("", "ensemble_sizes")) {
    e.ensemble_sizes.clear();
    for (auto v : cfg.get_int_list("", "ensemble_sizes"))
      e.ensemble_sizes.push_back(int(v));
  }
  e.trials = int(cfg.get_int("", "trials", e.trials));
  e.seed = std::uint64_t(cfg.get_int("", "seed", std::int64_t(e.seed)));
  e.noise_scale = cfg.get_real("", "noise_scale", e.noise_scale);

  auto& loc = e.localization;
  loc.enabled = cfg.get_bool("localization", "enabled", true);
  loc.scheme = scheme_from_name(
      cfg.get_string("localization", "scheme", "centralized"));
  loc.kernel =
      kernel_from_name(cfg.get_string("localization", "kernel", "gaussian"));
  loc.radius = cfg.get_real("localization", "radius", 1.0);
  loc.metric = cfg.get_string("localization", "metric", "lattice");
  loc.split_index = int(cfg.get_int("localization", "split_index", 0));

  e.inflation_sigma = cfg.get_real("dynamics", "inflation_sigma", 0.0);
  const std::string step = cfg.get_string("dynamics", "step", "fixed");
  if (step == "fixed") {
    e.policy.kind = StepPolicy::Kind::Fixed;
  } else if (step == "misfit-threshold") {
    e.policy.kind = StepPolicy::Kind::MisfitThreshold;
  } else {
    throw ConfigError("unknown step policy '" + step + "'");
  }
  e.policy.dt = cfg.get_real("dynamics", "dt", e.policy.dt);
  if (cfg.has("dynamics", "stages")) {
    const auto flat = cfg.get_real_list("dynamics", "stages");
    if (flat.size() % 2 != 0)
      throw ConfigError("stages must be (threshold, dt) pairs");
    e.policy.stages.clear();
    for (size_t i = 0; i < flat.size(); i += 2)
      e.policy.stages.emplace_back(flat[i], flat[i + 1]);
  }
  e.stop.max_iterations =
      int(cfg.get_int("dynamics", "max_iterations", 100));
  e.stop.target_scaled_misfit =
      cfg.get_optional_real("dynamics", "target_scaled_misfit");
  e.stop.fail_on_nonfinite =
      cfg.get_bool("dynamics", "fail_on_nonfinite", true);

  e.full_diagnostics =
      cfg.get_string("diagnostics", "level", "basic") == "full";

  if (cfg.has("teki", "c0") || e.experiment == ExperimentKind::Lorenz96) {
    e.c0_kind = cfg.get_string("teki", "c0", "identity");
    e.c0_scale = cfg.get_real("teki", "scale", 1.0);
    e.c0_path = cfg.get_string("teki", "path", "");
  }

  auto& l96 = e.l96;
  l96.forcing = cfg.get_real("model", "forcing", l96.forcing);
  l96.obs_time = cfg.get_real("model", "obs_time", l96.obs_time);
  l96.model_dt = cfg.get_real("model", "model_dt", l96.model_dt);
  l96.spinup = cfg.get_real("model", "spinup", l96.spinup);

  auto& dc = e.dc;
  dc.spacing_min = cfg.get_real("dc", "spacing_min", dc.spacing_min);
  dc.spacing_max = cfg.get_real("dc", "spacing_max", dc.spacing_max);
  dc.spacing_count = int(cfg.get_int("dc", "spacing_count", dc.spacing_count));
  dc.noise_fraction = cfg.get_real("dc", "noise_fraction", dc.noise_fraction);
  dc.add_noise = cfg.get_bool("dc", "add_noise", dc.add_noise);
  dc.clamp_min = cfg.get_real("dc", "clamp_min", dc.clamp_min);
  dc.init_low = cfg.get_real("dc", "init_low", dc.init_low);
  dc.init_high = cfg.get_real("dc", "init_high", dc.init_high);
  if (cfg.has("dc", "truth_resistivities"))
    dc.truth_resistivities = cfg.get_real_list("dc", "truth_resistivities");
  if (cfg.has("dc", "truth_boundaries"))
    dc.truth_boundaries = cfg.get_real_list("dc", "truth_boundaries");
  dc.data_file = cfg.get_string("dc", "data_file", "");

  e.custom_h_csv = cfg.get_string("custom", "h_csv", "");

  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (dims.empty()) throw ConfigError("dims must be nonempty");
  if (ensemble_sizes.empty())
    throw ConfigError("ensemble_sizes must be nonempty");
  for (int d : dims)
    if (d < 1) throw ConfigError("dimensions must be positive");
  for (int j : ensemble_sizes)
    if (j < 2) throw ConfigError("ensemble sizes must be at least 2");
  policy.validate();
  if (stop.max_iterations < 1)
    throw ConfigError("max_iterations must be at least 1");
  if (localization.enabled && !(localization.radius > 0.0))
    throw ConfigError("localization radius must be positive");
  if (inflation_sigma < 0.0)
    throw ConfigError("inflation sigma must be nonnegative");
  if (experiment == ExperimentKind::DcResistivity) {
    if (dc.data_file.empty()) {
      if (dc.truth_resistivities.size() != dc.truth_boundaries.size() + 1)
        throw ConfigError(
            "need one more truth resistivity than truth boundaries");
      if (dc.spacing_count < 2 || !(dc.spacing_min > 0.0) ||
          !(dc.spacing_max > dc.spacing_min))
        throw ConfigError("invalid synthetic spacing grid");
      if (!(dc.noise_fraction > 0.0))
        throw ConfigError("synthetic noise fraction must be positive");
    }
    if (!(dc.clamp_min > 0.0))
      throw ConfigError("resistivity floor must be positive");
    if (!(dc.init_low > 0.0) || !(dc.init_high > dc.init_low))
      throw ConfigError("invalid initial-ensemble resistivity bounds");
  }
  if (experiment == ExperimentKind::Custom && custom_h_csv.empty())
    throw ConfigError("custom experiment needs custom.h_csv");
  if (!c0_kind.empty() && c0_kind != "identity" && c0_kind != "scalar" &&
      c0_kind != "diagonal" && c0_kind != "dense")
    throw ConfigError("unknown prior covariance kind '" + c0_kind + "'");
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_doubles(std::uint64_t h, const double* p, size_t n) {
  return fnv1a(h, p, n * sizeof(double));
}

Matrix build_c0(const ExperimentConfig& cfg, int dim) {
  if (cfg.c0_kind == "identity") return Matrix::Identity(dim, dim);
  if (cfg.c0_kind == "scalar") {
    if (!(cfg.c0_scale > 0.0))
      throw ConfigError("prior scale must be positive");
    return cfg.c0_scale * Matrix::Identity(dim, dim);
  }
  if (cfg.c0_path.empty())
    throw ConfigError("prior covariance kind '" + cfg.c0_kind +
                      "' needs teki.path");
  Matrix m = psi_from_csv(cfg.c0_path);
  if (cfg.c0_kind == "diagonal") {
    Vector diag;
    if (m.cols() == 1)
      diag = m.col(0);
    else if (m.rows() == 1)
      diag = m.row(0).transpose();
    else
      throw ConfigError("diagonal prior file must be a single row or column");
    if (diag.size() != dim)
      throw ConfigError("diagonal prior length does not match the dimension");
    return Matrix(diag.asDiagonal());
  }
  if (m.rows() != dim || m.cols() != dim)
    throw ConfigError("dense prior shape does not match the dimension");
  return m;
}

// Immutable per-dimension problem setup, shared across trials and workers.
struct DimSetup {
  int dim = 0;
  std::shared_ptr<const ForwardModel> base;
  bool teki = false;
  Matrix c0;
  LocalizationScheme scheme;  // jacobian_at bound per run when needed
  bool scheme_ready = false;
  // dc only
  Vector dc_truth;  // empty for field data
  Vector dc_y, dc_stds;
  // lorenz96 only: chained true initial conditions, one per trial
  std::vector<Vector> truths;
};

std::vector<int> centers_for(const ForwardModel& model) {
  auto loc = model.locality();
  if (!loc)
    throw ConfigError(
        "centralized localization needs a model with known observation "
        "centers");
  return loc->centers;
}

DimSetup build_setup(const ExperimentConfig& cfg, int dim) {
  DimSetup s;
  s.dim = dim;
  switch (cfg.experiment) {
    case ExperimentKind::Linear:
      s.base = std::make_shared<LinearModel>(LinearModel::identity(dim));
      break;
    case ExperimentKind::Custom:
      s.base = std::make_shared<LinearModel>(psi_from_csv(cfg.custom_h_csv));
      if (s.base->param_dim() != dim)
        throw ConfigError("custom map width does not match the dimension");
      break;
    case ExperimentKind::Nonlinear:
      s.base = std::make_shared<LocalCubicModel>(dim);
      break;
    case ExperimentKind::Lorenz96: {
      s.base = std::make_shared<Lorenz96Model>(dim, cfg.l96.forcing,
                                               cfg.l96.obs_time,
                                               cfg.l96.model_dt);
      RngStream truth_rng(cfg.seed, 0, StreamRole::Truth);
      Vector x = truth_rng.normal_vector(dim);
      s.truths.reserve(cfg.trials);
      for (int trial = 0; trial < cfg.trials; ++trial) {
        // attractor sampling needs the stable integrator; the forward map
        // itself stays first-order
        x = l96_integrate_rk4(std::move(x), cfg.l96.spinup, cfg.l96.model_dt,
                              cfg.l96.forcing);
        s.truths.push_back(x);
      }
      break;
    }
    case ExperimentKind::DcResistivity: {
      DcGeometry geom;
      geom.layers = dim;
      if (!cfg.dc.data_file.empty()) {
        DcDataset data = load_dc_csv(cfg.dc.data_file);
        for (int i = 0; i < data.stds.size(); ++i)
          if (!(data.stds[i] > 0.0))
            throw ConfigError(
                "field data needs positive per-point standard deviations");
        s.base = std::make_shared<DcResistivityModel>(data.spacings, geom);
        s.dc_y = data.rho_a;
        s.dc_stds = data.stds;
      } else {
        Vector spacings(cfg.dc.spacing_count);
        const double lg0 = std::log10(cfg.dc.spacing_min);
        const double lg1 = std::log10(cfg.dc.spacing_max);
        for (int j = 0; j < cfg.dc.spacing_count; ++j)
          spacings[j] = std::pow(
              10.0, lg0 + (lg1 - lg0) * double(j) / (cfg.dc.spacing_count - 1));
        auto model = std::make_shared<DcResistivityModel>(spacings, geom);
        const Vector centers = geom.log_centers();
        Vector truth(dim);
        for (int i = 0; i < dim; ++i) {
          const double depth = std::pow(10.0, centers[i]);
          size_t k = 0;
          while (k < cfg.dc.truth_boundaries.size() &&
                 depth >= cfg.dc.truth_boundaries[k])
            ++k;
          truth[i] = cfg.dc.truth_resistivities[k];
        }
        const Vector clean = model->evaluate(truth);
        s.dc_stds = cfg.dc.noise_fraction * clean;
        if (cfg.dc.add_noise) {
          RngStream noise_rng(cfg.seed, 0, StreamRole::Noise);
          s.dc_y = clean + s.dc_stds.cwiseProduct(noise_rng.normal_vector(
                               int(spacings.size())));
        } else {
          s.dc_y = clean;
        }
        s.base = std::move(model);
        s.dc_truth = std::move(truth);
      }
      break;
    }
  }

  s.teki = !cfg.c0_kind.empty();
  if (s.teki) s.c0 = build_c0(cfg, dim);

  if (cfg.localization.enabled) {
    const auto& loc = cfg.localization;
    DistanceMetric metric = [&] {
      if (loc.metric == "lattice") return DistanceMetric::lattice();
      if (loc.metric == "periodic") return DistanceMetric::periodic(dim);
      if (loc.metric == "log-grid") {
        if (cfg.experiment != ExperimentKind::DcResistivity)
          throw ConfigError("log-grid distances need the layered geometry");
        DcGeometry geom;
        geom.layers = dim;
        return DistanceMetric::log_grid(geom.log_centers());
      }
      throw ConfigError("unknown distance metric '" + loc.metric + "'");
    }();
    s.scheme.kind = loc.scheme;
    s.scheme.psi = build_psi(metric, loc.kernel, loc.radius, dim);
    s.scheme.split_index = loc.split_index;
    if (loc.scheme == SchemeKind::Centralized ||
        loc.scheme == SchemeKind::Mixed) {
      if (s.teki) {
        TikhonovExtension probe(s.base, Vector::Zero(s.base->output_dim()),
                                s.c0);
        s.scheme.center_map = centers_for(probe);
      } else {
        s.scheme.center_map = centers_for(*s.base);
      }
    }
    s.scheme_ready = true;
  }
  return s;
}

struct TrialInputs {
  Vector truth;  // empty when unknown (field data)
  Vector y;
  Vector stds;  // empty unless the experiment has per-point stds
  Matrix init;
  std::uint64_t hash = 0;
};

TrialInputs draw_trial(const ExperimentConfig& cfg, const DimSetup& s, int dim,
                       int ensemble, int trial) {
  TrialInputs in;
  RngStream noise_rng(cfg.seed, std::uint64_t(trial), StreamRole::Noise);
  RngStream init_rng(cfg.seed, std::uint64_t(trial), StreamRole::Init);
  switch (cfg.experiment) {
    case ExperimentKind::Linear:
    case ExperimentKind::Custom:
    case ExperimentKind::Nonlinear: {
      RngStream truth_rng(cfg.seed, std::uint64_t(trial), StreamRole::Truth);
      in.truth = truth_rng.normal_vector(dim);
      in.y = s.base->evaluate(in.truth) +
             cfg.noise_scale * noise_rng.normal_vector(s.base->output_dim());
      in.init = init_rng.normal_matrix(dim, ensemble);
      break;
    }
    case ExperimentKind::Lorenz96: {
      in.truth = s.truths.at(std::size_t(trial));
      in.y = s.base->evaluate(in.truth) +
             cfg.noise_scale * noise_rng.normal_vector(s.base->output_dim());
      in.init = init_rng.normal_matrix(dim, ensemble);
      break;
    }
    case ExperimentKind::DcResistivity: {
      in.truth = s.dc_truth;
      in.y = s.dc_y;
      in.stds = s.dc_stds;
      in.init = init_rng.uniform_matrix(dim, ensemble, cfg.dc.init_low,
                                        cfg.dc.init_high);
      break;
    }
  }
  std::uint64_t h = 1469598103934665603ULL;
  if (in.truth.size()) h = hash_doubles(h, in.truth.data(), in.truth.size());
  h = hash_doubles(h, in.y.data(), in.y.size());
  if (in.stds.size()) h = hash_doubles(h, in.stds.data(), in.stds.size());
  h = hash_doubles(h, in.init.data(), std::size_t(in.init.size()));
  in.hash = h;
  return in;
}

TrialResult run_one(const ExperimentConfig& cfg, const DimSetup& s,
                    const TrialInputs& in, int dim, int ensemble, int trial,
                    const std::string& method, const RunOptions& opts) {
  std::shared_ptr<const ForwardModel> model = s.base;
  Vector y = in.y;
  if (s.teki) {
    if (in.stds.size())
      throw ConfigError(
          "scaled-misfit data weights are not supported together with "
          "Tikhonov regularization");
    ExtendedProblem ext = extend(s.base, in.y, s.c0);
    model = ext.model;
    y = std::move(ext.y);
  }

  LocalizationScheme local_scheme;
  const LocalizationScheme* scheme = nullptr;
  if (method == "leki") {
    local_scheme = s.scheme;
    if (local_scheme.kind == SchemeKind::Linearized ||
        local_scheme.kind == SchemeKind::Mixed) {
      auto captured = model;
      local_scheme.jacobian_at = [captured](const Vector& u) {
        return captured->jacobian(u);
      };
    }
    scheme = &local_scheme;
  }

  RunSettings settings;
  settings.y = y;
  settings.inflation.sigma = cfg.inflation_sigma;
  settings.policy = cfg.policy;
  settings.stop = cfg.stop;
  if (in.truth.size()) settings.truth = in.truth;
  if (in.stds.size()) settings.stds = in.stds;
  settings.compute_r_norms = cfg.full_diagnostics;
  settings.compute_ratios = cfg.full_diagnostics;

  RunHooks hooks;
  if (cfg.experiment == ExperimentKind::DcResistivity) {
    const double floor = cfg.dc.clamp_min;
    hooks.project = [floor](Vector& u) {
      u = u.cwiseMax(floor);
    };
  }

  RunResult rr = run(Ensemble(in.init), *model, scheme, settings, hooks);

  TrialResult tr;
  tr.experiment = experiment_name(cfg.experiment);
  tr.dim = dim;
  tr.ensemble = ensemble;
  tr.trial = trial;
  tr.method = method;
  tr.seed_used = cfg.seed;
  tr.input_hash = in.hash;
  tr.exit = rr.state.exit;
  if (!rr.rows.empty()) {
    tr.final_row = rr.rows.back();
  } else {
    tr.final_row.misfit = std::numeric_limits<double>::quiet_NaN();
    tr.final_row.max_error = tr.final_row.misfit;
    tr.final_row.trace_cuu = tr.final_row.misfit;
    tr.final_row.max_diag = tr.final_row.misfit;
    tr.final_row.min_diag = tr.final_row.misfit;
  }
  if (opts.write_records) {
    std::ostringstream name;
    name << tr.experiment << "_d" << dim << "_J" << ensemble << "_" << method
         << "_t" << trial << ".csv";
    const fs::path path = fs::path(opts.out_dir) / "runs" / name.str();
    write_rows_csv(path.string(), rr.rows);
    if (opts.json_mirror) {
      fs::path jpath = path;
      jpath.replace_extension(".json");
      write_rows_json(jpath.string(), rr.rows);
    }
    tr.record_path = path.string();
  }
  return tr;
}

std::optional<double> metric_value(const MetricsRow& row,
                                   const std::string& metric) {
  if (metric == "misfit") return row.misfit;
  if (metric == "rmse") return row.rmse;
  if (metric == "scaled_misfit") return row.scaled_misfit;
  throw ConfigError("unknown metric '" + metric + "'");
}

}  // namespace

AggregateReport aggregate(const std::vector<TrialResult>& results,
                          const std::string& metric) {
  AggregateReport report;
  report.metric = metric;
  std::map<std::tuple<int, int, std::string>, CellStats> cells;
  std::map<std::tuple<int, int, std::string>, std::vector<double>> values;
  for (const auto& tr : results) {
    auto key = std::make_tuple(tr.dim, tr.ensemble, tr.method);
    auto& cell = cells[key];
    cell.dim = tr.dim;
    cell.ensemble = tr.ensemble;
    cell.method = tr.method;
    switch (tr.exit) {
      case ExitCondition::TargetReached: ++cell.target_reached; break;
      case ExitCondition::MaxIterations: ++cell.max_iterations; break;
      case ExitCondition::Failed: ++cell.failed; break;
      case ExitCondition::Running:
        throw UsageError("trial result still marked running");
    }
    if (tr.exit != ExitCondition::Failed) {
      auto v = metric_value(tr.final_row, metric);
      if (v && std::isfinite(*v)) values[key].push_back(*v);
    }
  }
  for (auto& [key, cell] : cells) {
    auto& vals = values[key];
    if (!vals.empty()) {
      std::sort(vals.begin(), vals.end());
      double sum = 0.0;
      for (double v : vals) sum += v;
      const double mean = sum / double(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      cell.mean = mean;
      cell.median = vals.size() % 2 == 1
                        ? vals[vals.size() / 2]
                        : 0.5 * (vals[vals.size() / 2 - 1] +
                                 vals[vals.size() / 2]);
      cell.stddev =
          vals.size() > 1 ? std::sqrt(ss / double(vals.size() - 1)) : 0.0;
    }
    report.cells.push_back(cell);
  }
  return report;
}

namespace {

const char* const kTrialsHeader =
    "experiment,dim,ensemble,method,trial,seed,exit,input_hash,iter,t,misfit,"
    "max_error,rmse,scaled_misfit,trace_cuu,max_diag,min_diag,r_opnorm,"
    "r_onenorm,obs_ratio,reg_ratio";

ExitCondition exit_from_name(const std::string& name) {
  if (name == "target-reached") return ExitCondition::TargetReached;
  if (name == "max-iterations") return ExitCondition::MaxIterations;
  if (name == "failed") return ExitCondition::Failed;
  if (name == "running") return ExitCondition::Running;
  throw ConfigError("unknown exit condition '" + name + "'");
}

}  // namespace

void write_trials_csv(const std::string& path,
                      const std::vector<TrialResult>& results) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << kTrialsHeader << '\n';
  for (const auto& tr : results) {
    f << tr.experiment << ',' << tr.dim << ',' << tr.ensemble << ','
      << tr.method << ',' << tr.trial << ',' << tr.seed_used << ','
      << exit_name(tr.exit) << ',' << tr.input_hash << ','
      << row_to_csv(tr.final_row) << '\n';
  }
}

std::vector<TrialResult> read_trials_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || line != kTrialsHeader)
    throw ConfigError("'" + path + "' is not a trial summary");
  std::vector<TrialResult> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 21) cells.emplace_back();
    TrialResult tr;
    tr.experiment = cells[0];
    tr.dim = std::stoi(cells[1]);
    tr.ensemble = std::stoi(cells[2]);
    tr.method = cells[3];
    tr.trial = std::stoi(cells[4]);
    tr.seed_used = std::stoull(cells[5]);
    tr.exit = exit_from_name(cells[6]);
    tr.input_hash = std::stoull(cells[7]);
    auto parse_opt = [](const std::string& c) -> std::optional<double> {
      if (c.empty()) return std::nullopt;
      return std::stod(c);
    };
    tr.final_row.iter = std::stoi(cells[8]);
    tr.final_row.t = std::stod(cells[9]);
    tr.final_row.misfit = std::stod(cells[10]);
    tr.final_row.max_error = std::stod(cells[11]);
    tr.final_row.rmse = parse_opt(cells[12]);
    tr.final_row.scaled_misfit = parse_opt(cells[13]);
    tr.final_row.trace_cuu = std::stod(cells[14]);
    tr.final_row.max_diag = std::stod(cells[15]);
    tr.final_row.min_diag = std::stod(cells[16]);
    tr.final_row.r_opnorm = parse_opt(cells[17]);
    tr.final_row.r_onenorm = parse_opt(cells[18]);
    tr.final_row.obs_ratio = parse_opt(cells[19]);
    tr.final_row.reg_ratio = parse_opt(cells[20]);
    out.push_back(std::move(tr));
  }
  return out;
}

void write_summary_csv(const std::string& path, const AggregateReport& r) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "dim,ensemble,method,metric,target_reached,max_iterations,failed,mean,"
       "median,std\n";
  for (const auto& c : r.cells) {
    f << c.dim << ',' << c.ensemble << ',' << c.method << ',' << r.metric
      << ',' << c.target_reached << ',' << c.max_iterations << ',' << c.failed
      << ',' << (c.mean ? format_double(*c.mean) : "") << ','
      << (c.median ? format_double(*c.median) : "") << ','
      << (c.stddev ? format_double(*c.stddev) : "") << '\n';
  }
}

void write_summary_json(const std::string& path, const AggregateReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json o{{"dim", c.dim},
                     {"ensemble", c.ensemble},
                     {"method", c.method},
                     {"metric", r.metric},
                     {"target_reached", c.target_reached},
                     {"max_iterations", c.max_iterations},
                     {"failed", c.failed}};
    if (c.mean) o["mean"] = *c.mean;
    if (c.median) o["median"] = *c.median;
    if (c.stddev) o["std"] = *c.stddev;
    arr.push_back(std::move(o));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << arr.dump(2) << '\n';
}

RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (opts.write_records)
    fs::create_directories(fs::path(opts.out_dir) / "runs");
  else
    fs::create_directories(opts.out_dir);

  std::map<int, DimSetup> setups;
  for (int dim : cfg.dims)
    if (!setups.count(dim)) setups.emplace(dim, build_setup(cfg, dim));

  struct Task {
    int dim, ensemble, trial;
  };
  std::vector<Task> tasks;
  for (int dim : cfg.dims)
    for (int ensemble : cfg.ensemble_sizes)
      for (int trial = 0; trial < cfg.trials; ++trial)
        tasks.push_back({dim, ensemble, trial});

  const int methods = cfg.localization.enabled ? 2 : 1;
  std::vector<TrialResult> results(tasks.size() * std::size_t(methods));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::string first_error;
  std::mutex error_mutex;

  auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < tasks.size();
         k = next.fetch_add(1)) {
      if (aborted.load()) return;
      const Task& task = tasks[k];
      try {
        const DimSetup& s = setups.at(task.dim);
        TrialInputs in =
            draw_trial(cfg, s, task.dim, task.ensemble, task.trial);
        results[k * methods] = run_one(cfg, s, in, task.dim, task.ensemble,
                                       task.trial, "eki", opts);
        if (methods == 2)
          results[k * methods + 1] = run_one(cfg, s, in, task.dim,
                                             task.ensemble, task.trial,
                                             "leki", opts);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = ex.what();
        aborted.store(true);
        return;
      }
    }
  };

  int workers = std::max(1, opts.workers);
  workers = int(std::min<std::size_t>(std::size_t(workers), tasks.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty())
    throw ConfigError("batch aborted: " + first_error);

  RunOutput out;
  out.trials = std::move(results);
  out.report = aggregate(out.trials, headline_metric(cfg.experiment));

  const std::string exp = experiment_name(cfg.experiment);
  const fs::path base = fs::path(opts.out_dir);
  write_trials_csv((base / (exp + "_trials.csv")).string(), out.trials);
  write_summary_csv((base / (exp + "_summary.csv")).string(), out.report);
  if (opts.json_mirror)
    write_summary_json((base / (exp + "_summary.json")).string(), out.report);
  return out;
}

}  // namespace leki
