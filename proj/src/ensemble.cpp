#include "leki/ensemble.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <string>

namespace leki {

Ensemble::Ensemble(Matrix members) : members_(std::move(members)) {
  if (members_.rows() < 1)
    throw ConfigError("ensemble needs at least one parameter dimension");
  if (members_.cols() < 2)
    throw ConfigError("ensemble needs J >= 2 members, got " +
                      std::to_string(members_.cols()));
}

EnsembleStats compute_stats(const Ensemble& ensemble, const Matrix& outputs,
                            bool with_cpp) {
  const Matrix& u = ensemble.members();
  if (outputs.cols() != u.cols())
    throw ConfigError("outputs have " + std::to_string(outputs.cols()) +
                      " columns for " + std::to_string(u.cols()) + " members");
  const int j = ensemble.size();
  const double norm = 1.0 / (j - 1);

  EnsembleStats s;
  s.mean_u = u.rowwise().mean();
  s.mean_p = outputs.rowwise().mean();
  Matrix du = u.colwise() - s.mean_u;
  Matrix dp = outputs.colwise() - s.mean_p;
  s.cuu = norm * (du * du.transpose());
  s.cup = norm * (du * dp.transpose());
  // products of a matrix with its own transpose are symmetric only up to
  // rounding; enforce it exactly
  s.cuu = 0.5 * (s.cuu + s.cuu.transpose()).eval();
  if (with_cpp) {
    s.cpp = norm * (dp * dp.transpose());
    s.cpp = 0.5 * (s.cpp + s.cpp.transpose()).eval();
  }
  return s;
}

namespace {

bool is_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// Power iteration on A^T A for the largest singular value of a general matrix.
double power_iteration_op_norm(const Matrix& a) {
  constexpr double kRelTol = 1e-10;
  constexpr int kMaxIter = 1000;
  Vector v = a.transpose() * (a * Vector::Ones(a.cols()));
  if (v.norm() == 0.0) {
    // ones happened to be (near) the null space; fall back to a coordinate start
    v = Vector::Zero(a.cols());
    v[0] = 1.0;
  } else {
    v.normalize();
  }
  double sigma = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector w = a * v;
    double sigma_new = w.norm();
    if (sigma_new == 0.0) return 0.0;
    v = a.transpose() * w;
    double n = v.norm();
    if (n == 0.0) return sigma_new;
    v /= n;
    if (std::abs(sigma_new - sigma) <= kRelTol * std::max(1.0, sigma_new))
      return sigma_new;
    sigma = sigma_new;
  }
  return sigma;
}

}  // namespace

MatrixNormReport norms(const Matrix& a) {
  MatrixNormReport r;
  r.max_norm = a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
  r.one_norm = a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
  if (is_symmetric(a)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
      throw NumericFailure("symmetric eigendecomposition failed");
    r.op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    r.min_eig = es.eigenvalues().minCoeff();
  } else {
    r.op_norm = power_iteration_op_norm(a);
  }
  return r;
}

double min_eigenvalue(const Matrix& a) {
  if (!is_symmetric(a))
    throw UsageError("min_eigenvalue requires a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw NumericFailure("symmetric eigendecomposition failed");
  return es.eigenvalues().minCoeff();
}

double subspace_residual(const Ensemble& ensemble, const Matrix& basis) {
  if (basis.cols() < 1) throw ConfigError("subspace basis is empty");
  if (basis.rows() != ensemble.dim())
    throw ConfigError("subspace basis has " + std::to_string(basis.rows()) +
                      " rows for dimension " + std::to_string(ensemble.dim()));
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  const auto rank = qr.rank();
  if (rank == 0) {
    // zero basis: any nonzero member is fully outside the span
    double worst = 0.0;
    for (int j = 0; j < ensemble.size(); ++j)
      if (ensemble.members().col(j).norm() > 0.0) worst = 1.0;
    return worst;
  }
  Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), rank);
  double worst = 0.0;
  for (int j = 0; j < ensemble.size(); ++j) {
    const Vector& u = ensemble.members().col(j);
    double n = u.norm();
    if (n == 0.0) continue;
    Vector res = u - q * (q.transpose() * u);
    worst = std::max(worst, res.norm() / n);
  }
  return worst;
}

}  // namespace leki
