#include "leki/dynamics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace leki {

double lambda_at(const InflationConfig& inflation, double t) {
  if (inflation.sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  if (t < 0.0) throw UsageError("time must be nonnegative");
  return inflation.sigma / ((t + 1.0) * (t + 1.0));
}

void StepPolicy::validate() const {
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  if (kind == Kind::Fixed) return;
  if (stages.empty())
    throw ConfigError("threshold policy needs at least one stage");
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [threshold, step] : stages) {
    if (!(threshold < prev))
      throw ConfigError("stage thresholds must be strictly decreasing");
    if (!(step > 0.0)) throw ConfigError("stage steps must be positive");
    prev = threshold;
  }
}

double StepPolicy::step_for(std::optional<double> scaled) const {
  if (kind == Kind::Fixed || !scaled) return dt;
  double chosen = dt;
  for (const auto& [threshold, step] : stages)
    if (*scaled < threshold) chosen = step;
  return chosen;
}

std::string exit_name(ExitCondition e) {
  switch (e) {
    case ExitCondition::Running: return "running";
    case ExitCondition::TargetReached: return "target-reached";
    case ExitCondition::MaxIterations: return "max-iterations";
    case ExitCondition::Failed: return "failed";
  }
  throw UsageError("unknown exit condition");
}

Ensemble discrete_update(const Ensemble& ensemble, const EnsembleStats& stats,
                         const Matrix& predictions, const Vector& y) {
  const int dy = static_cast<int>(stats.cpp.rows());
  if (predictions.rows() != dy || predictions.cols() != ensemble.size())
    throw UsageError("prediction shape does not match the statistics");
  if (y.size() != dy) throw UsageError("data length does not match the model");
  Matrix s = stats.cpp;
  s.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success)
    throw NumericFailure("innovation covariance factorization failed");
  // gain K = C^up (C^pp + I)^{-1}; members move by K (y - G(u^j))
  Matrix innovations = (-predictions).colwise() + y;
  return Ensemble(ensemble.members() +
                  stats.cup * llt.solve(innovations));
}

Matrix inflation_vectors(const Ensemble& ensemble, const EnsembleStats& stats) {
  if (stats.mean_u.size() != ensemble.dim())
    throw UsageError("statistics do not match the ensemble");
  const double floor = 1e-14 * stats.cuu.cwiseAbs().maxCoeff();
  Matrix xi = ensemble.members().colwise() - stats.mean_u;
  for (int i = 0; i < ensemble.dim(); ++i) {
    const double dii = stats.cuu(i, i);
    if (dii <= floor || dii == 0.0)
      xi.row(i).setZero();
    else
      xi.row(i) *= 0.5 / dii;
  }
  return xi;
}

StepInputs prepare_step(const Ensemble& ensemble, const ForwardModel& model,
                        const LocalizationScheme* scheme) {
  StepInputs in;
  in.predictions = model.evaluate_members(ensemble.members());
  in.stats = compute_stats(ensemble, in.predictions, /*with_cpp=*/false);
  in.localized_cup = scheme ? localize_cup(in.stats, *scheme) : in.stats.cup;
  return in;
}

void euler_step(IterationState& state, const StepInputs& inputs,
                const Vector& y, const InflationConfig& inflation, double dt) {
  if (!(dt > 0.0)) throw UsageError("step size must be positive");
  if (y.size() != inputs.predictions.rows())
    throw UsageError("data length does not match the predictions");
  Matrix residuals = inputs.predictions.colwise() - y;  // G(u^j) - y
  Matrix drift = -inputs.localized_cup * residuals;
  const double lambda = lambda_at(inflation, state.t);
  if (lambda > 0.0)
    drift += lambda * inflation_vectors(state.ensemble, inputs.stats);
  state.ensemble.members() += dt * drift;
  state.t += dt;
  state.iter += 1;
}

void euler_step(IterationState& state, const ForwardModel& model,
                const LocalizationScheme* scheme, const Vector& y,
                const InflationConfig& inflation, double dt) {
  euler_step(state, prepare_step(state.ensemble, model, scheme), y, inflation,
             dt);
}

namespace {

MetricsRow make_row(const IterationState& state, const StepInputs& in,
                    const ForwardModel& model, const LocalizationScheme* scheme,
                    const RunSettings& s) {
  MetricsRow row;
  row.iter = state.iter;
  row.t = state.t;
  const Vector yhat = in.stats.mean_p;
  row.misfit = misfit(s.y, yhat);
  row.max_error = max_error(s.y, yhat);
  if (s.truth) row.rmse = rmse(*s.truth, in.stats.mean_u);
  if (s.stds) row.scaled_misfit = scaled_misfit(s.y, yhat, *s.stds);
  row.trace_cuu = in.stats.cuu.trace();
  row.max_diag = in.stats.cuu.diagonal().maxCoeff();
  row.min_diag = in.stats.cuu.diagonal().minCoeff();
  if (s.compute_r_norms) {
    const Matrix jac = model.has_jacobian()
                           ? model.jacobian(in.stats.mean_u)
                           : finite_difference_jacobian(model, in.stats.mean_u);
    static const LocalizationScheme kNoScheme;
    const Matrix r =
        error_matrix_R(in.stats, scheme ? *scheme : kNoScheme, jac);
    const MatrixNormReport rep = norms(r);
    row.r_opnorm = rep.op_norm;
    row.r_onenorm = rep.one_norm;
  }
  if (s.compute_ratios) {
    row.obs_ratio = obs_ratio(in.stats, in.localized_cup);
    row.reg_ratio = reg_ratio(in.stats, in.localized_cup);
  }
  return row;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

RunResult run(Ensemble initial, const ForwardModel& model,
              const LocalizationScheme* scheme, const RunSettings& settings,
              const RunHooks& hooks) {
  settings.policy.validate();
  if (settings.stop.max_iterations < 1)
    throw ConfigError("need at least one iteration");
  if (settings.policy.kind == StepPolicy::Kind::MisfitThreshold &&
      !settings.stds)
    throw ConfigError("threshold policy needs data standard deviations");
  if (settings.stop.target_scaled_misfit && !settings.stds)
    throw ConfigError("a scaled-misfit target needs data standard deviations");
  if (settings.y.size() != model.output_dim())
    throw ConfigError("data length does not match the model output");
  if (initial.dim() != model.param_dim())
    throw ConfigError("ensemble dimension does not match the model");

  RunResult result{IterationState{std::move(initial)}, {}};
  IterationState& state = result.state;

  auto fail = [&] { state.exit = ExitCondition::Failed; };

  StepInputs inputs;
  try {
    inputs = prepare_step(state.ensemble, model, scheme);
  } catch (const DomainError&) {
    fail();
  } catch (const NumericFailure&) {
    fail();
  }
  if (state.exit == ExitCondition::Running &&
      settings.stop.fail_on_nonfinite && !all_finite(inputs.predictions))
    fail();

  std::optional<double> scaled;
  while (state.exit == ExitCondition::Running) {
    if (settings.stds)
      scaled = scaled_misfit(settings.y, inputs.stats.mean_p, *settings.stds);
    const double dt = settings.policy.step_for(scaled);
    try {
      euler_step(state, inputs, settings.y, settings.inflation, dt);
      if (hooks.project)
        for (int j = 0; j < state.ensemble.size(); ++j) {
          Vector u = state.ensemble.members().col(j);
          hooks.project(u);
          state.ensemble.members().col(j) = u;
        }
      if (settings.stop.fail_on_nonfinite &&
          !all_finite(state.ensemble.members())) {
        fail();
        break;
      }
      inputs = prepare_step(state.ensemble, model, scheme);
    } catch (const DomainError&) {
      fail();
      break;
    } catch (const NumericFailure&) {
      fail();
      break;
    }
    if (settings.stop.fail_on_nonfinite && !all_finite(inputs.predictions)) {
      fail();
      break;
    }

    MetricsRow row = make_row(state, inputs, model, scheme, settings);
    if (settings.stop.fail_on_nonfinite &&
        !(std::isfinite(row.misfit) && std::isfinite(row.trace_cuu))) {
      fail();
      break;
    }
    result.rows.push_back(row);
    if (hooks.record) hooks.record(row);

    if (settings.stop.target_scaled_misfit && row.scaled_misfit &&
        *row.scaled_misfit <= *settings.stop.target_scaled_misfit)
      state.exit = ExitCondition::TargetReached;
    else if (state.iter >= settings.stop.max_iterations)
      state.exit = ExitCondition::MaxIterations;
  }
  return result;
}

}  // namespace leki
