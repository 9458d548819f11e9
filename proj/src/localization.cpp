#include "leki/localization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace leki {

Kernel kernel_from_name(const std::string& name) {
  if (name == "gaussian") return Kernel::Gaussian;
  if (name == "gaspari-cohn") return Kernel::GaspariCohn;
  if (name == "hard-cutoff") return Kernel::HardCutoff;
  if (name == "identity") return Kernel::Identity;
  throw ConfigError("unknown localization kernel '" + name + "'");
}

std::string kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Gaussian: return "gaussian";
    case Kernel::GaspariCohn: return "gaspari-cohn";
    case Kernel::HardCutoff: return "hard-cutoff";
    case Kernel::Identity: return "identity";
  }
  return "?";
}

namespace {

double gaspari_cohn(double r) {
  if (r < 0.0) throw DomainError("negative scaled distance");
  if (r < 1.0) {
    double r2 = r * r;
    return 1.0 + r2 * (-5.0 / 3.0 + r * (5.0 / 8.0 + r * (0.5 - 0.25 * r)));
  }
  if (r < 2.0) {
    return 4.0 - 5.0 * r + r * r * (5.0 / 3.0 + r * (5.0 / 8.0 + r * (-0.5 + r / 12.0))) -
           2.0 / (3.0 * r);
  }
  return 0.0;
}

}  // namespace

double kernel_value(Kernel k, double r) {
  if (r < 0.0) throw DomainError("negative scaled distance");
  switch (k) {
    case Kernel::Gaussian: return std::exp(-0.5 * r * r);
    case Kernel::GaspariCohn: return gaspari_cohn(r);
    case Kernel::HardCutoff: return r <= 1.0 ? 1.0 : 0.0;
    case Kernel::Identity: return r == 0.0 ? 1.0 : 0.0;
  }
  throw UsageError("unhandled kernel");
}

DistanceMetric DistanceMetric::lattice() { return DistanceMetric(Kind::Lattice); }

DistanceMetric DistanceMetric::periodic(int period) {
  if (period < 2) throw ConfigError("periodic lattice needs period >= 2");
  DistanceMetric m(Kind::Periodic);
  m.period_ = period;
  return m;
}

DistanceMetric DistanceMetric::log_grid(Vector coords) {
  if (coords.size() == 0) throw ConfigError("log-grid metric needs coordinates");
  DistanceMetric m(Kind::LogGrid);
  m.coords_ = std::move(coords);
  return m;
}

DistanceMetric DistanceMetric::explicit_matrix(Matrix d) {
  if (d.rows() != d.cols()) throw ConfigError("distance matrix must be square");
  double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("distance matrix must be symmetric");
  if (d.minCoeff() < 0.0) throw ConfigError("distances must be nonnegative");
  DistanceMetric m(Kind::Explicit);
  m.matrix_ = std::move(d);
  return m;
}

double DistanceMetric::distance(int i, int j) const {
  switch (kind_) {
    case Kind::Lattice:
      return std::abs(i - j);
    case Kind::Periodic: {
      int raw = std::abs(i - j) % period_;
      return std::min(raw, period_ - raw);
    }
    case Kind::LogGrid:
      if (i < 0 || j < 0 || i >= coords_.size() || j >= coords_.size())
        throw ConfigError("log-grid index out of range");
      return std::abs(coords_[i] - coords_[j]);
    case Kind::Explicit:
      if (i < 0 || j < 0 || i >= matrix_.rows() || j >= matrix_.rows())
        throw ConfigError("distance matrix index out of range");
      return matrix_(i, j);
  }
  throw UsageError("unhandled metric");
}

Matrix build_psi(const DistanceMetric& metric, Kernel kernel, double radius,
                 int d) {
  if (radius <= 0.0) throw ConfigError("localization radius must be positive");
  if (d < 1) throw ConfigError("taper dimension must be positive");
  Matrix psi(d, d);
  for (int i = 0; i < d; ++i) {
    psi(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      double v = kernel_value(kernel, metric.distance(i, j) / radius);
      psi(i, j) = v;
      psi(j, i) = v;
    }
  }
  return psi;
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "param-param-only") return SchemeKind::ParamOnly;
  if (name == "centralized") return SchemeKind::Centralized;
  if (name == "linearized") return SchemeKind::Linearized;
  if (name == "mixed") return SchemeKind::Mixed;
  throw ConfigError("unknown localization scheme '" + name + "'");
}

std::string scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::ParamOnly: return "param-param-only";
    case SchemeKind::Centralized: return "centralized";
    case SchemeKind::Linearized: return "linearized";
    case SchemeKind::Mixed: return "mixed";
  }
  return "?";
}

Matrix localize_cuu(const Matrix& cuu, const Matrix& psi) {
  if (psi.rows() != cuu.rows() || psi.cols() != cuu.cols())
    throw ConfigError("taper dimensions do not match the covariance");
  return cuu.cwiseProduct(psi);
}

namespace {

void check_center_map(const LocalizationScheme& scheme, int d_u, int d_y,
                      int cols_needed) {
  if (static_cast<int>(scheme.center_map.size()) != d_y)
    throw ConfigError("center map has " +
                      std::to_string(scheme.center_map.size()) +
                      " entries for " + std::to_string(d_y) + " outputs");
  for (int j = 0; j < cols_needed; ++j) {
    int c = scheme.center_map[j];
    if (c < 0 || c >= d_u)
      throw ConfigError("center map entry " + std::to_string(c) +
                        " out of range for dimension " + std::to_string(d_u));
  }
}

}  // namespace

Matrix localize_cup(const EnsembleStats& stats, const LocalizationScheme& scheme) {
  const int d_u = static_cast<int>(stats.cup.rows());
  const int d_y = static_cast<int>(stats.cup.cols());
  if (scheme.kind == SchemeKind::ParamOnly) return stats.cup;

  if (scheme.psi.rows() != d_u || scheme.psi.cols() != d_u)
    throw ConfigError("taper dimensions do not match the ensemble");

  auto centralized_column = [&](Matrix& out, int j) {
    int c = scheme.center_map[j];
    out.col(j) = stats.cup.col(j).cwiseProduct(scheme.psi.col(c));
  };

  switch (scheme.kind) {
    case SchemeKind::Centralized: {
      check_center_map(scheme, d_u, d_y, d_y);
      Matrix out(d_u, d_y);
      for (int j = 0; j < d_y; ++j) centralized_column(out, j);
      return out;
    }
    case SchemeKind::Linearized: {
      if (!scheme.jacobian_at)
        throw ConfigError("linearized scheme needs a jacobian source");
      Matrix h = scheme.jacobian_at(stats.mean_u);
      if (h.rows() != d_y || h.cols() != d_u)
        throw ConfigError("jacobian dimensions do not match the problem");
      return localize_cuu(stats.cuu, scheme.psi) * h.transpose();
    }
    case SchemeKind::Mixed: {
      if (!scheme.jacobian_at)
        throw ConfigError("mixed scheme needs a jacobian source");
      if (scheme.split_index < 0 || scheme.split_index > d_y)
        throw ConfigError("mixed split index out of range");
      check_center_map(scheme, d_u, d_y, scheme.split_index);
      Matrix h = scheme.jacobian_at(stats.mean_u);
      if (h.rows() != d_y || h.cols() != d_u)
        throw ConfigError("jacobian dimensions do not match the problem");
      Matrix lin = localize_cuu(stats.cuu, scheme.psi) * h.transpose();
      Matrix out(d_u, d_y);
      for (int j = 0; j < scheme.split_index; ++j) centralized_column(out, j);
      for (int j = scheme.split_index; j < d_y; ++j) out.col(j) = lin.col(j);
      return out;
    }
    default:
      throw UsageError("unhandled scheme");
  }
}

void psi_to_csv(const std::string& path, const Matrix& psi) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f.precision(17);
  for (int i = 0; i < psi.rows(); ++i) {
    for (int j = 0; j < psi.cols(); ++j) {
      if (j) f << ',';
      f << psi(i, j);
    }
    f << '\n';
  }
}

Matrix psi_from_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("ragged rows in '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("empty matrix file '" + path + "'");
  Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace leki
