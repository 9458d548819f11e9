#include "leki/models.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace leki {

void ForwardModel::check_param_dim(const Vector& u) const {
  if (u.size() != param_dim())
    throw ConfigError("parameter vector has " + std::to_string(u.size()) +
                      " entries, model expects " + std::to_string(param_dim()));
}

Matrix ForwardModel::evaluate_members(const Matrix& members) const {
  if (members.rows() != param_dim())
    throw ConfigError("member matrix has wrong parameter dimension");
  Matrix out(output_dim(), members.cols());
  for (int j = 0; j < members.cols(); ++j) out.col(j) = evaluate(members.col(j));
  return out;
}

Matrix ForwardModel::jacobian(const Vector&) const {
  throw UsageError("model provides no analytic jacobian");
}

LinearModel::LinearModel(Matrix h) : h_(std::move(h)) {
  if (h_.rows() < 1 || h_.cols() < 1) throw ConfigError("empty linear map");
  identity_ = h_.isIdentity(0.0);
}

LinearModel LinearModel::identity(int d) {
  return LinearModel(Matrix::Identity(d, d));
}

Vector LinearModel::evaluate(const Vector& u) const {
  check_param_dim(u);
  if (identity_) return u;
  return h_ * u;
}

Matrix LinearModel::evaluate_members(const Matrix& members) const {
  if (members.rows() != param_dim())
    throw ConfigError("member matrix has wrong parameter dimension");
  if (identity_) return members;
  return h_ * members;
}

Matrix LinearModel::jacobian(const Vector& u) const {
  check_param_dim(u);
  return h_;
}

std::optional<Locality> LinearModel::locality() const {
  if (!h_.isIdentity(0.0)) return std::nullopt;
  Locality loc;
  loc.centers.resize(output_dim());
  std::iota(loc.centers.begin(), loc.centers.end(), 0);
  loc.footprints.resize(output_dim());
  for (int j = 0; j < output_dim(); ++j) loc.footprints[j] = {j};
  return loc;
}

LocalCubicModel::LocalCubicModel(int d) : d_(d) {
  if (d < 1) throw ConfigError("dimension must be positive");
}

namespace {

constexpr int kCubicHalfWidth = 5;
constexpr double kCubicDivisor = 10.0;

double moving_average(const Vector& u, int i) {
  const int d = static_cast<int>(u.size());
  double s = 0.0;
  for (int k = std::max(0, i - kCubicHalfWidth);
       k <= std::min(d - 1, i + kCubicHalfWidth); ++k)
    s += u[k];
  return s / kCubicDivisor;  // divisor fixed even when the window is clipped
}

}  // namespace

Vector LocalCubicModel::evaluate(const Vector& u) const {
  check_param_dim(u);
  Vector y(d_);
  const double sqrt3 = std::sqrt(3.0);
  for (int i = 0; i < d_; ++i) {
    double m = moving_average(u, i);
    y[i] = u[i] - sqrt3 * m * m + m * m * m;
  }
  return y;
}

Matrix LocalCubicModel::jacobian(const Vector& u) const {
  check_param_dim(u);
  Matrix jac = Matrix::Identity(d_, d_);
  const double sqrt3 = std::sqrt(3.0);
  for (int i = 0; i < d_; ++i) {
    double m = moving_average(u, i);
    double dm = (-2.0 * sqrt3 * m + 3.0 * m * m) / kCubicDivisor;
    for (int k = std::max(0, i - kCubicHalfWidth);
         k <= std::min(d_ - 1, i + kCubicHalfWidth); ++k)
      jac(i, k) += dm;
  }
  return jac;
}

std::optional<Locality> LocalCubicModel::locality() const {
  Locality loc;
  loc.centers.resize(d_);
  loc.footprints.resize(d_);
  for (int i = 0; i < d_; ++i) {
    loc.centers[i] = i;
    for (int k = std::max(0, i - kCubicHalfWidth);
         k <= std::min(d_ - 1, i + kCubicHalfWidth); ++k)
      loc.footprints[i].push_back(k);
  }
  return loc;
}

Vector l96_rhs(const Vector& x, double forcing) {
  const int d = static_cast<int>(x.size());
  if (d < 4) throw ConfigError("Lorenz'96 needs dimension >= 4");
  Vector dx(d);
  auto at = [&](int k) { return x[((k % d) + d) % d]; };
  for (int k = 0; k < d; ++k)
    dx[k] = -at(k) - at(k - 1) * (at(k - 2) - at(k + 1)) + forcing;
  return dx;
}

namespace {

// d(rhs)/dx; wraparound contributions accumulate for small d.
Matrix l96_rhs_jacobian(const Vector& x) {
  const int d = static_cast<int>(x.size());
  Matrix jac = Matrix::Zero(d, d);
  auto wrap = [&](int k) { return ((k % d) + d) % d; };
  for (int k = 0; k < d; ++k) {
    jac(k, wrap(k)) += -1.0;
    jac(k, wrap(k - 1)) += -(x[wrap(k - 2)] - x[wrap(k + 1)]);
    jac(k, wrap(k - 2)) += -x[wrap(k - 1)];
    jac(k, wrap(k + 1)) += x[wrap(k - 1)];
  }
  return jac;
}

}  // namespace

Vector l96_integrate(Vector x, double duration, double dt, double forcing) {
  if (dt <= 0.0) throw ConfigError("integration step must be positive");
  const int steps = static_cast<int>(std::llround(duration / dt));
  for (int s = 0; s < steps; ++s) x += dt * l96_rhs(x, forcing);
  return x;
}

Vector l96_integrate_rk4(Vector x, double duration, double dt,
                         double forcing) {
  if (dt <= 0.0) throw ConfigError("integration step must be positive");
  const int steps = static_cast<int>(std::llround(duration / dt));
  for (int s = 0; s < steps; ++s) {
    const Vector k1 = l96_rhs(x, forcing);
    const Vector k2 = l96_rhs(x + 0.5 * dt * k1, forcing);
    const Vector k3 = l96_rhs(x + 0.5 * dt * k2, forcing);
    const Vector k4 = l96_rhs(x + dt * k3, forcing);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

Lorenz96Model::Lorenz96Model(int d, double forcing, double obs_time, double dt)
    : d_(d), forcing_(forcing), obs_time_(obs_time), dt_(dt) {
  if (d < 4) throw ConfigError("Lorenz'96 needs dimension >= 4");
  if (dt <= 0.0 || obs_time <= 0.0)
    throw ConfigError("Lorenz'96 times must be positive");
  steps_ = static_cast<int>(std::llround(obs_time_ / dt_));
  if (steps_ < 1) throw ConfigError("observation time shorter than one step");
}

Vector Lorenz96Model::evaluate(const Vector& u) const {
  check_param_dim(u);
  Vector x = u;
  for (int s = 0; s < steps_; ++s) x += dt_ * l96_rhs(x, forcing_);
  return x;
}

Matrix Lorenz96Model::jacobian(const Vector& u) const {
  check_param_dim(u);
  Vector x = u;
  Matrix jac = Matrix::Identity(d_, d_);
  for (int s = 0; s < steps_; ++s) {
    jac = (Matrix::Identity(d_, d_) + dt_ * l96_rhs_jacobian(x)) * jac;
    x += dt_ * l96_rhs(x, forcing_);
  }
  return jac;
}

std::optional<Locality> Lorenz96Model::locality() const {
  Locality loc;
  loc.centers.resize(d_);
  std::iota(loc.centers.begin(), loc.centers.end(), 0);
  return loc;
}

Matrix finite_difference_jacobian(const ForwardModel& model, const Vector& u) {
  if (u.size() != model.param_dim())
    throw ConfigError("parameter vector has wrong dimension");
  const double h = std::max(1e-6, 1e-6 * u.cwiseAbs().maxCoeff());
  Matrix jac(model.output_dim(), model.param_dim());
  Vector up = u, um = u;
  for (int k = 0; k < model.param_dim(); ++k) {
    up[k] = u[k] + h;
    um[k] = u[k] - h;
    jac.col(k) = (model.evaluate(up) - model.evaluate(um)) / (2.0 * h);
    up[k] = u[k];
    um[k] = u[k];
  }
  return jac;
}

}  // namespace leki
