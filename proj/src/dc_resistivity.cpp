#include "leki/dc_resistivity.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "j1_filter_data.hpp"

namespace leki {

Vector DcGeometry::boundaries() const {
  if (layers < 2) throw ConfigError("geometry needs at least two layers");
  if (first_boundary <= 0.0 || last_boundary <= first_boundary)
    throw ConfigError("boundaries must satisfy 0 < first < last");
  const int n = layers - 1;
  Vector z(n);
  const double lg0 = std::log10(first_boundary);
  const double lg1 = std::log10(last_boundary);
  for (int k = 0; k < n; ++k)
    z[k] = std::pow(10.0, lg0 + (lg1 - lg0) * (n == 1 ? 0.0 : double(k) / (n - 1)));
  return z;
}

Vector DcGeometry::thicknesses() const {
  Vector z = boundaries();
  Vector t(z.size());
  t[0] = z[0];
  for (int k = 1; k < z.size(); ++k) t[k] = z[k] - z[k - 1];
  return t;
}

Vector DcGeometry::log_centers() const {
  boundaries();  // validates
  const double lg0 = std::log10(first_boundary);
  const double lg1 = std::log10(last_boundary);
  const double h = layers == 2 ? 1.0 : (lg1 - lg0) / (layers - 2);
  Vector c(layers);
  for (int i = 0; i < layers; ++i) c[i] = lg0 + (i - 0.5) * h;
  return c;
}

namespace {

void check_layer_inputs(const Vector& res, const Vector& thick) {
  if (res.size() < 1) throw ConfigError("need at least one layer");
  if (thick.size() != res.size() - 1)
    throw ConfigError("expected one thickness per finite layer");
  for (int i = 0; i < res.size(); ++i)
    if (!(res[i] > 0.0)) throw DomainError("resistivities must be positive");
  for (int i = 0; i < thick.size(); ++i)
    if (!(thick[i] > 0.0)) throw DomainError("thicknesses must be positive");
}

// Recursion with tanh values supplied, shared by the direct and cached routes.
double transform_from_tanh(const Vector& res, const double* th) {
  const int n = static_cast<int>(res.size());
  double t = res[n - 1];
  for (int i = n - 2; i >= 0; --i)
    t = (t + res[i] * th[i]) / (1.0 + t * th[i] / res[i]);
  return t;
}

// Hot-path variant with the reciprocals hoisted out of the recursion.
double transform_from_tanh(const Vector& res, const Vector& inv_res,
                           const double* th) {
  const int n = static_cast<int>(res.size());
  double t = res[n - 1];
  for (int i = n - 2; i >= 0; --i)
    t = (t + res[i] * th[i]) / (1.0 + t * th[i] * inv_res[i]);
  return t;
}

}  // namespace

double koefoed_transform(const Vector& res, const Vector& thick, double lambda) {
  check_layer_inputs(res, thick);
  if (lambda < 0.0) throw DomainError("wavenumber must be nonnegative");
  Vector th(thick.size());
  for (int i = 0; i < thick.size(); ++i) th[i] = std::tanh(lambda * thick[i]);
  return transform_from_tanh(res, th.data());
}

double apparent_resistivity(const Vector& res, const Vector& thick,
                            double spacing) {
  check_layer_inputs(res, thick);
  if (!(spacing > 0.0)) throw DomainError("half-spacing must be positive");
  const int n = static_cast<int>(res.size());
  if (n == 1) return res[0];
  const double rn = res[n - 1];
  double acc = 0.0;
  for (size_t i = 0; i < detail::kJ1FilterWeights.size(); ++i) {
    const double lam =
        std::pow(10.0, detail::kJ1FilterLogOffset +
                           detail::kJ1FilterLogSpacing * double(i)) /
        spacing;
    acc += detail::kJ1FilterWeights[i] * lam *
           (koefoed_transform(res, thick, lam) - rn);
  }
  return rn + spacing * acc;
}

namespace {

// Nodes and weights of n-point Gauss-Legendre on [-1, 1], by Newton iteration
// on the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double xi = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / pp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = -xi;
    x[n - 1 - i] = xi;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * pp * pp);
  }
}

// Approximate k-th positive zero of J1 (k >= 1), McMahon expansion.
double j1_zero(int k) {
  const double beta = (k + 0.25) * std::numbers::pi;
  return beta - 3.0 / (8.0 * beta);
}

struct PanelIntegrator {
  const std::vector<double>& gx;
  const std::vector<double>& gw;

  template <typename F>
  double gauss(const F& f, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < gx.size(); ++i) s += gw[i] * f(mid + half * gx[i]);
    return s * half;
  }

  template <typename F>
  double adaptive(const F& f, double a, double b, double tol, int depth) const {
    const double whole = gauss(f, a, b);
    const double mid = 0.5 * (a + b);
    const double split = gauss(f, a, mid) + gauss(f, mid, b);
    if (depth <= 0 || std::abs(whole - split) <= tol) return split;
    return adaptive(f, a, mid, 0.5 * tol, depth - 1) +
           adaptive(f, mid, b, 0.5 * tol, depth - 1);
  }
};

}  // namespace

double apparent_resistivity_quadrature(const Vector& res, const Vector& thick,
                                       double spacing) {
  check_layer_inputs(res, thick);
  if (!(spacing > 0.0)) throw DomainError("half-spacing must be positive");
  const int n = static_cast<int>(res.size());
  if (n == 1) return res[0];
  const double r1 = res[0], rn = res[n - 1];
  const double c = thick[0];

  // subtract s(lam) = r1 - (r1 - rn) exp(-c lam), whose transform is closed
  // form; the remainder decays exponentially at both ends
  const double s2 = spacing * spacing;
  double analytic =
      rn + (r1 - rn) *
               (1.0 - spacing * s2 / std::pow(c * c + s2, 1.5));

  auto delta = [&](double lam) {
    return (koefoed_transform(res, thick, lam) - r1 +
            (r1 - rn) * std::exp(-c * lam)) *
           std::cyl_bessel_j(1.0, spacing * lam) * lam;
  };

  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(12, gx, gw);
  PanelIntegrator integ{gx, gw};

  const double lam_max = 45.0 / c;
  const double scale = std::max({std::abs(r1), std::abs(rn), 1.0});
  const double tol = 1e-12 * scale;

  double total = 0.0;
  double a = 0.0;
  for (int k = 1;; ++k) {
    double b = j1_zero(k) / spacing;
    bool last = b >= lam_max;
    if (last) b = lam_max;
    total += integ.adaptive(delta, a, b, tol, 12);
    if (last) break;
    a = b;
  }
  return analytic + s2 * total;
}

DcResistivityModel::DcResistivityModel(Vector spacings, DcGeometry geometry,
                                       Route route)
    : spacings_(std::move(spacings)), geometry_(geometry), route_(route) {
  if (spacings_.size() < 1) throw ConfigError("need at least one half-spacing");
  for (int j = 0; j < spacings_.size(); ++j)
    if (!(spacings_[j] > 0.0))
      throw ConfigError("half-spacings must be positive");
  thicknesses_ = geometry_.thicknesses();
  const int np = static_cast<int>(detail::kJ1FilterWeights.size());
  const int nl = static_cast<int>(thicknesses_.size());
  tanh_tables_.reserve(spacings_.size());
  lambdas_.reserve(spacings_.size());
  for (int j = 0; j < spacings_.size(); ++j) {
    Vector lam(np);
    Matrix tab(nl, np);  // column i contiguous for the recursion
    for (int i = 0; i < np; ++i) {
      lam[i] = std::pow(10.0, detail::kJ1FilterLogOffset +
                                  detail::kJ1FilterLogSpacing * double(i)) /
               spacings_[j];
      for (int k = 0; k < nl; ++k)
        tab(k, i) = std::tanh(lam[i] * thicknesses_[k]);
    }
    lambdas_.push_back(std::move(lam));
    tanh_tables_.push_back(std::move(tab));
  }
}

Vector DcResistivityModel::evaluate(const Vector& u) const {
  check_param_dim(u);
  for (int i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) throw DomainError("resistivities must be positive");
  Vector y(output_dim());
  if (route_ == Route::Quadrature) {
    for (int j = 0; j < output_dim(); ++j)
      y[j] = apparent_resistivity_quadrature(u, thicknesses_, spacings_[j]);
    return y;
  }
  const int np = static_cast<int>(detail::kJ1FilterWeights.size());
  const double rn = u[u.size() - 1];
  const Vector inv_u = u.cwiseInverse();
  for (int j = 0; j < output_dim(); ++j) {
    const Matrix& tab = tanh_tables_[j];
    const Vector& lam = lambdas_[j];
    double acc = 0.0;
    for (int i = 0; i < np; ++i)
      acc += detail::kJ1FilterWeights[i] * lam[i] *
             (transform_from_tanh(u, inv_u, tab.col(i).data()) - rn);
    y[j] = rn + spacings_[j] * acc;
  }
  return y;
}

std::optional<Locality> DcResistivityModel::locality() const {
  const Vector centers = geometry_.log_centers();
  Locality loc;
  loc.centers.reserve(spacings_.size());
  for (int j = 0; j < spacings_.size(); ++j) {
    const double target = std::log10(spacings_[j]);
    int best = 0;
    for (int i = 1; i < centers.size(); ++i)
      if (std::abs(centers[i] - target) < std::abs(centers[best] - target))
        best = i;
    loc.centers.push_back(best);
  }
  return loc;
}

DcDataset load_dc_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::vector<double> sp, rho, std_;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected at least two columns");
    try {
      double s = std::stod(cells[0]);
      double r = std::stod(cells[1]);
      double sd = cells.size() > 2 && !cells[2].empty() ? std::stod(cells[2]) : 0.0;
      sp.push_back(s);
      rho.push_back(r);
      std_.push_back(sd);
    } catch (const std::invalid_argument&) {
      if (sp.empty()) continue;  // header row before any data
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": non-numeric data row");
    }
  }
  if (sp.empty()) throw ConfigError("no data rows in '" + path + "'");
  DcDataset d;
  d.spacings = Eigen::Map<Vector>(sp.data(), sp.size());
  d.rho_a = Eigen::Map<Vector>(rho.data(), rho.size());
  d.stds = Eigen::Map<Vector>(std_.data(), std_.size());
  return d;
}

void save_dc_csv(const std::string& path, const DcDataset& data) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f.precision(17);
  f << "spacing_m,rho_a_ohmm,std_ohmm\n";
  for (int i = 0; i < data.spacings.size(); ++i)
    f << data.spacings[i] << ',' << data.rho_a[i] << ',' << data.stds[i] << '\n';
}

}  // namespace leki
