#include "leki/teki.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace leki {

TikhonovExtension::TikhonovExtension(std::shared_ptr<const ForwardModel> base,
                                     Vector y, const Matrix& c0)
    : base_(std::move(base)) {
  if (!base_) throw ConfigError("extension needs a base model");
  const int du = base_->param_dim();
  const int dy = base_->output_dim();
  if (y.size() != dy)
    throw ConfigError("data vector length does not match the model output");
  if (c0.rows() != du || c0.cols() != du)
    throw ConfigError("prior covariance must be square of the parameter size");
  const double scale = c0.cwiseAbs().maxCoeff();
  if ((c0 - c0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
    throw ConfigError("prior covariance must be symmetric");

  diagonal_ = c0.isDiagonal(0.0);
  if (diagonal_) {
    diag_scale_.resize(du);
    for (int i = 0; i < du; ++i) {
      if (!(c0(i, i) > 0.0))
        throw ConfigError("prior covariance must be positive definite");
      diag_scale_[i] = 1.0 / std::sqrt(c0(i, i));
    }
    c0_inv_sqrt_ = diag_scale_.asDiagonal();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c0);
    if (es.info() != Eigen::Success)
      throw ConfigError("prior covariance eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ConfigError("prior covariance must be positive definite");
    c0_inv_sqrt_ = es.eigenvectors() *
                   es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                   es.eigenvectors().transpose();
    c0_inv_sqrt_ = 0.5 * (c0_inv_sqrt_ + c0_inv_sqrt_.transpose()).eval();
  }

  extended_y_ = Vector::Zero(du + dy);
  extended_y_.tail(dy) = y;
}

Vector TikhonovExtension::evaluate(const Vector& u) const {
  check_param_dim(u);
  const int du = base_->param_dim();
  Vector out(output_dim());
  if (diagonal_)
    out.head(du) = diag_scale_.cwiseProduct(u);
  else
    out.head(du) = c0_inv_sqrt_ * u;
  out.tail(base_->output_dim()) = base_->evaluate(u);
  return out;
}

Matrix TikhonovExtension::evaluate_members(const Matrix& members) const {
  const int du = base_->param_dim();
  if (members.rows() != du)
    throw UsageError("member rows do not match the parameter size");
  Matrix out(output_dim(), members.cols());
  if (diagonal_)
    out.topRows(du) = diag_scale_.asDiagonal() * members;
  else
    out.topRows(du) = c0_inv_sqrt_ * members;
  out.bottomRows(base_->output_dim()) = base_->evaluate_members(members);
  return out;
}

Matrix TikhonovExtension::jacobian(const Vector& u) const {
  check_param_dim(u);
  const int du = base_->param_dim();
  Matrix jac(output_dim(), du);
  jac.topRows(du) = c0_inv_sqrt_;
  jac.bottomRows(base_->output_dim()) = base_->jacobian(u);
  return jac;
}

std::optional<Locality> TikhonovExtension::locality() const {
  if (!diagonal_) return std::nullopt;
  auto base_loc = base_->locality();
  if (!base_loc) return std::nullopt;
  const int du = base_->param_dim();
  Locality loc;
  loc.centers.reserve(output_dim());
  for (int i = 0; i < du; ++i) loc.centers.push_back(i);
  loc.centers.insert(loc.centers.end(), base_loc->centers.begin(),
                     base_loc->centers.end());
  if (!base_loc->footprints.empty()) {
    loc.footprints.reserve(output_dim());
    for (int i = 0; i < du; ++i) loc.footprints.push_back({i});
    loc.footprints.insert(loc.footprints.end(), base_loc->footprints.begin(),
                          base_loc->footprints.end());
  }
  return loc;
}

ExtendedProblem extend(std::shared_ptr<const ForwardModel> model,
                       const Vector& y, const Matrix& c0) {
  auto ext = std::make_shared<TikhonovExtension>(std::move(model), y, c0);
  Vector ey = ext->extended_y();
  return ExtendedProblem{std::move(ext), std::move(ey)};
}

double tikhonov_loss(const ForwardModel& model, const Vector& y,
                     const Matrix& c0, const Vector& u) {
  if (y.size() != model.output_dim())
    throw ConfigError("data vector length does not match the model output");
  if (c0.rows() != u.size() || c0.cols() != u.size())
    throw ConfigError("prior covariance must be square of the parameter size");
  Eigen::LLT<Matrix> llt(c0);
  if (llt.info() != Eigen::Success)
    throw ConfigError("prior covariance must be positive definite");
  const Vector r = model.evaluate(u) - y;
  return r.squaredNorm() + u.dot(llt.solve(u));
}

}  // namespace leki
