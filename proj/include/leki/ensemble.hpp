#pragma once

#include <optional>

#include "leki/common.hpp"

namespace leki {

// Column-per-member parameter ensemble, d_u x J with J >= 2.
class Ensemble {
 public:
  explicit Ensemble(Matrix members);

  int dim() const { return static_cast<int>(members_.rows()); }
  int size() const { return static_cast<int>(members_.cols()); }

  const Matrix& members() const { return members_; }
  Matrix& members() { return members_; }

 private:
  Matrix members_;
};

// Sample moments of an ensemble and its forward outputs. Covariances use the
// unbiased 1/(J-1) normalization; cuu and cpp are symmetrized exactly.
struct EnsembleStats {
  Vector mean_u;  // d_u
  Vector mean_p;  // d_y
  Matrix cuu;     // d_u x d_u
  Matrix cup;     // d_u x d_y
  Matrix cpp;     // d_y x d_y
};

// Two-pass moment computation. outputs is d_y x J, one column per member.
// with_cpp = false leaves cpp empty (0 x 0); the Euler flow never reads it,
// and skipping the product matters in large-ensemble runs.
EnsembleStats compute_stats(const Ensemble& ensemble, const Matrix& outputs,
                            bool with_cpp = true);

struct MatrixNormReport {
  double max_norm = 0.0;  // max_ij |a_ij|
  double op_norm = 0.0;   // largest singular value
  double one_norm = 0.0;  // max_i sum_j |a_ij|
  std::optional<double> min_eig;  // filled for symmetric input
};

// Norm battery. op_norm uses the symmetric eigendecomposition when the input
// is symmetric and otherwise power iteration on A^T A (relative tolerance
// 1e-10, at most 1000 iterations).
MatrixNormReport norms(const Matrix& a);

// Smallest eigenvalue of a symmetric matrix. UsageError on asymmetric input.
double min_eigenvalue(const Matrix& a);

// Largest relative distance of a member from the column span of basis:
// max_j ||(I - P) u^j|| / ||u^j||, zero members contributing zero. P projects
// onto the numerical column space of basis.
double subspace_residual(const Ensemble& ensemble, const Matrix& basis);

}  // namespace leki
