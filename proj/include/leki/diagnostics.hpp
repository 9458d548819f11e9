#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "leki/common.hpp"
#include "leki/ensemble.hpp"
#include "leki/localization.hpp"

namespace leki {

// One recorded iteration. Optional entries are absent when the run was not
// configured to compute them (they cost extra forward work or a Jacobian).
struct MetricsRow {
  int iter = 0;
  double t = 0.0;
  double misfit = 0.0;
  double max_error = 0.0;
  std::optional<double> rmse;
  std::optional<double> scaled_misfit;
  double trace_cuu = 0.0;
  double max_diag = 0.0;
  double min_diag = 0.0;
  std::optional<double> r_opnorm;
  std::optional<double> r_onenorm;
  std::optional<double> obs_ratio;
  std::optional<double> reg_ratio;
};

// Root-mean-square residual over outputs, with yhat the mean prediction.
double misfit(const Vector& y, const Vector& yhat);

// Largest absolute residual.
double max_error(const Vector& y, const Vector& yhat);

// Parameter-space root-mean-square error against a known truth.
double rmse(const Vector& truth, const Vector& mean);

// RMS of residuals divided componentwise by their standard deviations.
// Any std <= 0 is a ConfigError.
double scaled_misfit(const Vector& y, const Vector& yhat, const Vector& stds);

// Localization error matrix R = G' Ctilde^up - G' Ctilde^uu G'^T, the
// quantity whose norms the convergence analysis assumes small. jacobian is
// G' at the ensemble mean, d_y x d_u. Identically zero for a linearized
// scheme whose H equals this jacobian.
Matrix error_matrix_R(const EnsembleStats& stats,
                      const LocalizationScheme& scheme, const Matrix& jacobian);

// Estimate of the observability constant: at the max-variance index i*,
//   sum_j Ctilde^up_{i*,j} C^up_{i*,j} / (C^uu_{i*,i*})^2.
// Returns 0 when the denominator is degenerate (collapsed ensemble) or the
// estimate is negative (bound vacuous).
double obs_ratio(const EnsembleStats& stats, const Matrix& localized_cup);

// Estimate of the regularity constant:
//   max_i [sum_j Ctilde^up_{ij} C^up_{ij}] / (C^uu_ii ||C^uu||_max),
// same degenerate and clamping conventions as obs_ratio.
double reg_ratio(const EnsembleStats& stats, const Matrix& localized_cup);

// Least-squares slope of log(value) against log(1+t) over t in [t_lo, t_hi].
// A clean O(1/t) collapse gives slope -1. Needs at least five positive values
// in the window (DomainError otherwise).
double collapse_rate(const std::vector<std::pair<double, double>>& series,
                     double t_lo, double t_hi);

// Scalar comparison ODE  y' = -a y^2 - b y/(t+1) + sigma/(t+1)^2.
struct RiccatiParams {
  double a = 1.0;       // > 0
  double b = 0.0;       // >= 0
  double sigma = 0.0;   // >= 0
  double y0 = 1.0;      // >= 0
};

// Closed-form solution at time t >= 0, via the roots c-+ of
// c^2 + (1 - b) c - a sigma = 0. For sigma = b = 0 this is y0/(1 + a y0 t);
// for sigma > 0, y_t (t+1) -> -c_/a. DomainError on parameter violations.
double riccati_solution(const RiccatiParams& p, double t);

// First-visit value vector of the localization Markov chain: solves
//   (phi0 + sum_{l != j} phi_jl) v_j - sum_{l != j} phi_jl v_l = phi0 1_{j=i}.
// phi must be symmetric, nonnegative, zero-diagonal; requires
// phi0 in (0, 1] and phi0 <= 1 - max row sum (DomainError otherwise).
// The solution satisfies v >= 0, v_i >= phi0, sum_l phi_jl v_l <= v_j and
// sum_j v_j <= 1, with equality for the last when phi is symmetric.
Vector v_vector(const Matrix& phi, double phi0, int i);

}  // namespace leki
