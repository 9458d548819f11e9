#pragma once

#include <functional>
#include <string>
#include <vector>

#include "leki/common.hpp"
#include "leki/ensemble.hpp"

namespace leki {

// Correlation tapers. All satisfy psi(0) = 1, 0 <= psi <= 1, nonincreasing.
enum class Kernel { Gaussian, GaspariCohn, HardCutoff, Identity };

Kernel kernel_from_name(const std::string& name);
std::string kernel_name(Kernel k);

// Kernel value at scaled distance r >= 0 (DomainError for r < 0).
//   gaussian:     exp(-r^2/2)
//   gaspari-cohn: fifth-order piecewise rational, support [0, 2)
//   hard-cutoff:  1 for r <= 1, else 0
//   identity:     1 at r = 0, else 0
double kernel_value(Kernel k, double r);

// Pairwise distance between parameter indices.
class DistanceMetric {
 public:
  static DistanceMetric lattice();                  // |i - j|
  static DistanceMetric periodic(int period);       // min(|i-j|, period - |i-j|)
  static DistanceMetric log_grid(Vector coords);    // |coords[i] - coords[j]|
  static DistanceMetric explicit_matrix(Matrix d);  // user-supplied, symmetric

  double distance(int i, int j) const;

 private:
  enum class Kind { Lattice, Periodic, LogGrid, Explicit };
  DistanceMetric(Kind kind) : kind_(kind) {}
  Kind kind_;
  int period_ = 0;
  Vector coords_;
  Matrix matrix_;
};

// Taper matrix Psi_ij = psi(d(i, j) / radius), d x d, symmetric, unit
// diagonal, entries in [0, 1]. radius must be positive.
Matrix build_psi(const DistanceMetric& metric, Kernel kernel, double radius,
                 int d);

// How the cross-covariance is localized.
//   ParamOnly:   only C^uu is tapered; C^up passes through unchanged
//   Centralized: Ctilde^up_ij = C^up_ij * Psi_i,c(j) via a per-output center
//   Linearized:  Ctilde^up = (C^uu o Psi) H^T with H from jacobian_at
//   Mixed:       columns below split_index centralized, the rest linearized
enum class SchemeKind { ParamOnly, Centralized, Linearized, Mixed };

SchemeKind scheme_from_name(const std::string& name);
std::string scheme_name(SchemeKind k);

struct LocalizationScheme {
  SchemeKind kind = SchemeKind::ParamOnly;
  Matrix psi;                                        // d_u x d_u
  std::vector<int> center_map;                       // d_y centers (Centralized/Mixed)
  std::function<Matrix(const Vector&)> jacobian_at;  // H at the mean (Linearized/Mixed)
  int split_index = 0;                               // Mixed only
};

// Schur (elementwise) taper of the parameter covariance.
Matrix localize_cuu(const Matrix& cuu, const Matrix& psi);

// Localized cross-covariance per the scheme. mean_u feeds jacobian_at.
Matrix localize_cup(const EnsembleStats& stats, const LocalizationScheme& scheme);

// Dense CSV round-trip for taper matrices.
void psi_to_csv(const std::string& path, const Matrix& psi);
Matrix psi_from_csv(const std::string& path);

}  // namespace leki
