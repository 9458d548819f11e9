#pragma once

#include <string>
#include <vector>

#include "leki/common.hpp"
#include "leki/models.hpp"

namespace leki {

// Layered half-space on a fixed log-spaced grid. layers - 1 boundaries run
// from first_boundary to last_boundary; the deepest layer is the terminating
// half-space.
struct DcGeometry {
  int layers = 20;
  double first_boundary = 0.1;   // m
  double last_boundary = 1e5;    // m

  Vector boundaries() const;    // layers - 1 depths
  Vector thicknesses() const;   // layers - 1 finite thicknesses
  Vector log_centers() const;   // log10 of per-layer center depth, layers entries
};

// Resistivity transform of a layered half-space at wavenumber lambda,
// built bottom-up from the terminating half-space:
//   T_n = u_n,  T_i = (T_{i+1} + u_i tanh(lambda t_i)) / (1 + T_{i+1} tanh(lambda t_i) / u_i)
// Requires all resistivities > 0 (DomainError), thicknesses > 0, lambda >= 0.
// The result stays within [min u, max u].
double koefoed_transform(const Vector& resistivities, const Vector& thicknesses,
                         double lambda);

// Schlumberger apparent resistivity at half-spacing s:
//   rho_a(s) = s^2 int_0^inf T_1(lambda) J1(s lambda) lambda dlambda
// evaluated with the digital linear filter applied to T_1 - u_n, the
// half-space contribution added back exactly.
double apparent_resistivity(const Vector& resistivities,
                            const Vector& thicknesses, double spacing);

// Slow reference route: adaptive Gauss panels between Bessel zeros after
// subtracting a closed-form asymptotic kernel. Used to cross-check the filter.
double apparent_resistivity_quadrature(const Vector& resistivities,
                                       const Vector& thicknesses,
                                       double spacing);

// Forward model mapping layer resistivities to apparent resistivities at a
// fixed set of half-spacings. tanh tables are precomputed per spacing, so an
// evaluation costs only the layer recursion.
class DcResistivityModel final : public ForwardModel {
 public:
  enum class Route { Filter, Quadrature };

  DcResistivityModel(Vector spacings, DcGeometry geometry = {},
                     Route route = Route::Filter);

  int param_dim() const override { return geometry_.layers; }
  int output_dim() const override { return static_cast<int>(spacings_.size()); }
  Vector evaluate(const Vector& u) const override;
  // Each sounding probes around its half-spacing: the center is the layer
  // whose log-depth is nearest to log10 of the spacing. Footprints stay empty
  // (every layer contributes in principle).
  std::optional<Locality> locality() const override;

  const DcGeometry& geometry() const { return geometry_; }
  const Vector& spacings() const { return spacings_; }

 private:
  Vector spacings_;
  DcGeometry geometry_;
  Route route_;
  Vector thicknesses_;
  std::vector<Matrix> tanh_tables_;  // per spacing: finite layers x filter points
  std::vector<Vector> lambdas_;      // per spacing: filter abscissae
};

// Sounding data: half-spacings (m), apparent resistivities (Ohm m), and
// per-point standard deviations (zero when the file carries none).
struct DcDataset {
  Vector spacings;
  Vector rho_a;
  Vector stds;
};

// CSV with optional header, columns: spacing_m, rho_a_ohmm[, std_ohmm].
DcDataset load_dc_csv(const std::string& path);
void save_dc_csv(const std::string& path, const DcDataset& data);

}  // namespace leki
