#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leki/common.hpp"
#include "leki/diagnostics.hpp"
#include "leki/ensemble.hpp"
#include "leki/localization.hpp"
#include "leki/models.hpp"

namespace leki {

// Additive-inflation schedule lambda_t = sigma/(t+1)^2; sigma = 0 disables.
struct InflationConfig {
  double sigma = 0.0;
};

double lambda_at(const InflationConfig& inflation, double t);

// Step-size policy: a fixed dt, or a base dt refined through stages once the
// scaled misfit of the mean prediction drops below each threshold. Thresholds
// must be strictly decreasing, all steps positive.
struct StepPolicy {
  enum class Kind { Fixed, MisfitThreshold };
  Kind kind = Kind::Fixed;
  double dt = 0.5;
  std::vector<std::pair<double, double>> stages;  // (threshold, dt)

  void validate() const;
  // Current step size; scaled is the latest scaled misfit when known.
  double step_for(std::optional<double> scaled) const;
};

struct StoppingRule {
  int max_iterations = 1;
  std::optional<double> target_scaled_misfit;
  bool fail_on_nonfinite = true;
};

enum class ExitCondition { Running, TargetReached, MaxIterations, Failed };
std::string exit_name(ExitCondition e);

struct IterationState {
  Ensemble ensemble;
  double t = 0.0;  // accumulated continuous time, sum of the dt taken
  int iter = 0;
  ExitCondition exit = ExitCondition::Running;
};

// Kalman-style discrete update with unit noise covariance: every member moves
// by C^up (C^pp + I)^{-1} (y - G(u^j)). predictions holds G(u^j) columnwise.
Ensemble discrete_update(const Ensemble& ensemble, const EnsembleStats& stats,
                         const Matrix& predictions, const Vector& y);

// Whitened deviations xi^j = (1/2) D^{-1} (u^j - mean), D = diag(C^uu).
// Columns sum to zero; components with C^uu_ii <= 1e-14 ||C^uu||_max are 0.
Matrix inflation_vectors(const Ensemble& ensemble, const EnsembleStats& stats);

// Everything a step needs, frozen at the step's start: moments of the current
// ensemble, its forward outputs, and the scheme-localized cross-covariance.
struct StepInputs {
  EnsembleStats stats;
  Matrix predictions;    // d_y x J
  Matrix localized_cup;  // d_u x d_y; raw C^up when scheme is null
};

StepInputs prepare_step(const Ensemble& ensemble, const ForwardModel& model,
                        const LocalizationScheme* scheme);

// One explicit Euler step of the (localized) flow
//   du^j/dt = -Ctilde^up (G(u^j) - y) + lambda_t xi^j
// using the frozen inputs; advances t and iter.
void euler_step(IterationState& state, const StepInputs& inputs,
                const Vector& y, const InflationConfig& inflation, double dt);

// Convenience overload that prepares the inputs itself.
void euler_step(IterationState& state, const ForwardModel& model,
                const LocalizationScheme* scheme, const Vector& y,
                const InflationConfig& inflation, double dt);

// Optional per-run extras beyond the always-on misfit and covariance columns.
struct RunSettings {
  Vector y;
  InflationConfig inflation;
  StepPolicy policy;
  StoppingRule stop;
  std::optional<Vector> truth;  // enables the rmse column
  std::optional<Vector> stds;   // enables scaled_misfit (and threshold policies)
  bool compute_r_norms = false;  // R(t) op/one norms; costs a Jacobian per step
  bool compute_ratios = false;   // observability/regularity ratio estimates
};

struct RunHooks {
  // Post-step repair applied to every member (e.g. clamp to a physical range).
  std::function<void(Vector&)> project;
  // Streaming row sink, called once per completed iteration.
  std::function<void(const MetricsRow&)> record;
};

struct RunResult {
  IterationState state;
  std::vector<MetricsRow> rows;
};

// Iterate euler_step under the policy until the stopping rule fires. Each
// iteration records one row describing the post-step ensemble. Model domain
// errors and non-finite values end the run with exit = Failed instead of
// propagating (the failed iteration is not recorded).
RunResult run(Ensemble initial, const ForwardModel& model,
              const LocalizationScheme* scheme, const RunSettings& settings,
              const RunHooks& hooks = {});

}  // namespace leki
