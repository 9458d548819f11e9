#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "leki/common.hpp"

namespace leki {

// Per-output locality metadata: the parameter index an output is centered on,
// and optionally the full set of parameter indices it depends on.
struct Locality {
  std::vector<int> centers;                // one per output
  std::vector<std::vector<int>> footprints;  // may be empty when unknown
};

// Deterministic forward map G: R^{d_u} -> R^{d_y}.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual int param_dim() const = 0;
  virtual int output_dim() const = 0;

  virtual Vector evaluate(const Vector& u) const = 0;

  // One column per member; the default loops over evaluate.
  virtual Matrix evaluate_members(const Matrix& members) const;

  virtual bool has_jacobian() const { return false; }
  // d_y x d_u derivative at u. UsageError unless has_jacobian().
  virtual Matrix jacobian(const Vector& u) const;

  virtual std::optional<Locality> locality() const { return std::nullopt; }

 protected:
  void check_param_dim(const Vector& u) const;
};

// G(u) = H u.
class LinearModel final : public ForwardModel {
 public:
  explicit LinearModel(Matrix h);
  static LinearModel identity(int d);

  int param_dim() const override { return static_cast<int>(h_.cols()); }
  int output_dim() const override { return static_cast<int>(h_.rows()); }
  Vector evaluate(const Vector& u) const override;
  Matrix evaluate_members(const Matrix& members) const override;
  bool has_jacobian() const override { return true; }
  Matrix jacobian(const Vector& u) const override;
  std::optional<Locality> locality() const override;
  const Matrix& h() const { return h_; }

 private:
  Matrix h_;
  bool identity_ = false;  // skips the product for the common G(u) = u case
};

// Componentwise cubic with a moving-average argument:
//   y_i = u_i - sqrt(3) m_i^2 + m_i^3,  m_i = (1/10) sum_{k=i-5}^{i+5} u_k
// where out-of-range terms are dropped but the divisor stays 10.
class LocalCubicModel final : public ForwardModel {
 public:
  explicit LocalCubicModel(int d);

  int param_dim() const override { return d_; }
  int output_dim() const override { return d_; }
  Vector evaluate(const Vector& u) const override;
  bool has_jacobian() const override { return true; }
  Matrix jacobian(const Vector& u) const override;
  std::optional<Locality> locality() const override;

 private:
  int d_;
};

// Right-hand side of the Lorenz'96 system on a periodic lattice:
//   dx_k/dt = -x_k - x_{k-1} (x_{k-2} - x_{k+1}) + forcing
Vector l96_rhs(const Vector& x, double forcing);

// Explicit Euler integration of the system for duration T at step dt.
Vector l96_integrate(Vector x, double duration, double dt, double forcing);

// Classical fourth-order Runge-Kutta integration of the same system. The
// first-order scheme gains energy and diverges within tens of time units on
// the attractor, so long integrations (attractor sampling) need this one.
Vector l96_integrate_rk4(Vector x, double duration, double dt, double forcing);

// Forward map: integrate the state for obs_time and observe it fully.
class Lorenz96Model final : public ForwardModel {
 public:
  Lorenz96Model(int d, double forcing = 8.0, double obs_time = 0.2,
                double dt = 0.05);

  int param_dim() const override { return d_; }
  int output_dim() const override { return d_; }
  Vector evaluate(const Vector& u) const override;
  bool has_jacobian() const override { return true; }
  Matrix jacobian(const Vector& u) const override;
  std::optional<Locality> locality() const override;

  double forcing() const { return forcing_; }
  double dt() const { return dt_; }

 private:
  int d_;
  double forcing_;
  double obs_time_;
  double dt_;
  int steps_;
};

// Central finite-difference Jacobian with h = max(1e-6, 1e-6 ||u||_inf).
Matrix finite_difference_jacobian(const ForwardModel& model, const Vector& u);

}  // namespace leki
