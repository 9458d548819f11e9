#include "leki/diagnostics.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace leki {

namespace {

void check_same_length(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw UsageError("vector lengths differ");
  if (a.size() == 0) throw UsageError("empty vectors");
}

}  // namespace

double misfit(const Vector& y, const Vector& yhat) {
  check_same_length(y, yhat);
  return std::sqrt((y - yhat).squaredNorm() / double(y.size()));
}

double max_error(const Vector& y, const Vector& yhat) {
  check_same_length(y, yhat);
  return (y - yhat).cwiseAbs().maxCoeff();
}

double rmse(const Vector& truth, const Vector& mean) {
  return misfit(truth, mean);
}

double scaled_misfit(const Vector& y, const Vector& yhat, const Vector& stds) {
  check_same_length(y, yhat);
  if (stds.size() != y.size()) throw UsageError("vector lengths differ");
  for (int i = 0; i < stds.size(); ++i)
    if (!(stds[i] > 0.0))
      throw ConfigError("standard deviations must be positive");
  return std::sqrt(
      ((y - yhat).cwiseQuotient(stds)).squaredNorm() / double(y.size()));
}

Matrix error_matrix_R(const EnsembleStats& stats,
                      const LocalizationScheme& scheme,
                      const Matrix& jacobian) {
  const auto du = stats.cuu.rows();
  const auto dy = stats.cup.cols();
  if (jacobian.rows() != dy || jacobian.cols() != du)
    throw UsageError("jacobian shape does not match the statistics");
  const Matrix cup_loc = localize_cup(stats, scheme);
  const Matrix cuu_loc =
      scheme.psi.size() > 0 ? localize_cuu(stats.cuu, scheme.psi) : stats.cuu;
  return jacobian * cup_loc - jacobian * cuu_loc * jacobian.transpose();
}

namespace {

// Shared core: per-row inner products of the localized and raw
// cross-covariances, with the degenerate-denominator convention.
double guarded_ratio(double num, double den) {
  if (den < 1e-14 * (1.0 + std::abs(num))) return 0.0;
  return std::max(0.0, num / den);
}

}  // namespace

double obs_ratio(const EnsembleStats& stats, const Matrix& localized_cup) {
  if (localized_cup.rows() != stats.cup.rows() ||
      localized_cup.cols() != stats.cup.cols())
    throw UsageError("localized cross-covariance shape mismatch");
  int istar = 0;
  stats.cuu.diagonal().maxCoeff(&istar);
  const double num = localized_cup.row(istar).dot(stats.cup.row(istar));
  const double dii = stats.cuu(istar, istar);
  return guarded_ratio(num, dii * dii);
}

double reg_ratio(const EnsembleStats& stats, const Matrix& localized_cup) {
  if (localized_cup.rows() != stats.cup.rows() ||
      localized_cup.cols() != stats.cup.cols())
    throw UsageError("localized cross-covariance shape mismatch");
  const double cmax = stats.cuu.cwiseAbs().maxCoeff();
  double best = 0.0;
  for (int i = 0; i < stats.cuu.rows(); ++i) {
    const double num = localized_cup.row(i).dot(stats.cup.row(i));
    best = std::max(best, guarded_ratio(num, stats.cuu(i, i) * cmax));
  }
  return best;
}

double collapse_rate(const std::vector<std::pair<double, double>>& series,
                     double t_lo, double t_hi) {
  std::vector<double> xs, ys;
  for (const auto& [t, v] : series) {
    if (t < t_lo || t > t_hi || !(v > 0.0)) continue;
    xs.push_back(std::log1p(t));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 5)
    throw DomainError("need at least five positive points in the window");
  const double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) throw DomainError("window has no time spread");
  return sxy / sxx;
}

double riccati_solution(const RiccatiParams& p, double t) {
  if (!(p.a > 0.0)) throw DomainError("coefficient a must be positive");
  if (p.b < 0.0 || p.sigma < 0.0)
    throw DomainError("coefficients b and sigma must be nonnegative");
  if (p.y0 < 0.0) throw DomainError("initial value must be nonnegative");
  if (t < 0.0) throw DomainError("time must be nonnegative");
  if (p.sigma == 0.0 && p.y0 == 0.0) return 0.0;

  const double disc = (1.0 - p.b) * (1.0 - p.b) + 4.0 * p.a * p.sigma;
  if (disc == 0.0) {
    // double root (sigma = 0, b = 1): y = y0 / ((t+1)(1 + a y0 log(t+1)))
    return p.y0 / ((t + 1.0) * (1.0 + p.a * p.y0 * std::log1p(t)));
  }
  const double sq = std::sqrt(disc);
  const double cm = 0.5 * (-(1.0 - p.b) - sq);
  const double cp = 0.5 * (-(1.0 - p.b) + sq);
  const double bconst = -(cm + p.a * p.y0) / (cp + p.a * p.y0);
  // dividing through by (t+1)^{-cm} keeps every power bounded: cm - cp < 0
  const double w = std::pow(t + 1.0, cm - cp);
  const double num = cm + bconst * cp * w;
  const double den = -p.a * (t + 1.0) * (1.0 + bconst * w);
  return num / den;
}

Vector v_vector(const Matrix& phi, double phi0, int i) {
  const auto d = phi.rows();
  if (phi.cols() != d || d < 1) throw UsageError("phi must be square");
  if (i < 0 || i >= d) throw UsageError("index out of range");
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw UsageError("phi must be symmetric");
  for (int r = 0; r < d; ++r) {
    if (phi(r, r) != 0.0) throw UsageError("phi must have zero diagonal");
    for (int c = 0; c < d; ++c)
      if (phi(r, c) < 0.0) throw UsageError("phi must be nonnegative");
  }
  if (!(phi0 > 0.0) || phi0 > 1.0)
    throw DomainError("phi0 must lie in (0, 1]");
  const double max_row = phi.rowwise().sum().maxCoeff();
  if (phi0 > 1.0 - max_row + 1e-12)
    throw DomainError("phi0 exceeds 1 - max row sum");

  Matrix a = -phi;
  for (int r = 0; r < d; ++r) a(r, r) = phi0 + phi.row(r).sum();
  Vector rhs = Vector::Zero(d);
  rhs[i] = phi0;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericFailure("first-visit system is not positive definite");
  return llt.solve(rhs);
}

}  // namespace leki
