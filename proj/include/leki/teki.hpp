#pragma once

#include <memory>

#include "leki/common.hpp"
#include "leki/models.hpp"

namespace leki {

// Extended forward map for Tikhonov regularization:
//   Gt(u) = (C0^{-1/2} u, G(u)),  yt = (0, y)
// so that ||Gt(u) - yt||^2 = ||G(u) - y||^2 + ||u||^2_{C0^{-1}}. Running the
// plain dynamics on (Gt, yt) is the regularized solver; there is no separate
// code path.
class TikhonovExtension final : public ForwardModel {
 public:
  // c0 must be symmetric positive definite (ConfigError otherwise).
  // C0^{-1/2} is computed once here and cached; a diagonal c0 takes an
  // elementwise route in evaluate.
  TikhonovExtension(std::shared_ptr<const ForwardModel> base, Vector y,
                    const Matrix& c0);

  int param_dim() const override { return base_->param_dim(); }
  int output_dim() const override {
    return base_->param_dim() + base_->output_dim();
  }
  Vector evaluate(const Vector& u) const override;
  Matrix evaluate_members(const Matrix& members) const override;
  bool has_jacobian() const override { return base_->has_jacobian(); }
  Matrix jacobian(const Vector& u) const override;
  // Defined when c0 is diagonal and the base model has locality: the first
  // d_u outputs sit on their own parameter, the rest shift the base metadata.
  std::optional<Locality> locality() const override;

  const Vector& extended_y() const { return extended_y_; }
  const Matrix& c0_inv_sqrt() const { return c0_inv_sqrt_; }
  const ForwardModel& base() const { return *base_; }

 private:
  std::shared_ptr<const ForwardModel> base_;
  Vector extended_y_;
  Matrix c0_inv_sqrt_;
  bool diagonal_ = false;
  Vector diag_scale_;  // diagonal of C0^{-1/2} when diagonal_
};

struct ExtendedProblem {
  std::shared_ptr<TikhonovExtension> model;
  Vector y;  // the extended data vector (0 block, then the original y)
};

// Build the extended problem for a base model, data y, and prior covariance.
ExtendedProblem extend(std::shared_ptr<const ForwardModel> model,
                       const Vector& y, const Matrix& c0);

// ||G(u) - y||^2 + u^T C0^{-1} u, computed directly (Cholesky solve), kept
// deliberately independent of the extension route so tests can pit the two
// against each other.
double tikhonov_loss(const ForwardModel& model, const Vector& y,
                     const Matrix& c0, const Vector& u);

}  // namespace leki
