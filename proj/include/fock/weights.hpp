#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fock/grid.hpp"

namespace fock::weights {

// ---------------------------------------------------------------------------
// Weight descriptors
// ---------------------------------------------------------------------------

/// phi(z) = coeff * |z|^alpha.
struct RadialPower {
  double alpha = 2.0;
  double coeff = 1.0;
};

/// Smooth Gaussian bump height * exp(-|z - center|^2 / width^2) added to phi.
struct Bump {
  cplx center{0.0, 0.0};
  double height = 0.0;
  double width = 1.0;
};

struct PerturbedRadial {
  RadialPower base;
  std::vector<Bump> bumps;
};

struct GridSampled {
  std::shared_ptr<const GridField> field;
};

struct WeightSpec {
  std::variant<RadialPower, PerturbedRadial, GridSampled> family;

  static WeightSpec gaussian() { return {RadialPower{2.0, 1.0}}; }
  static WeightSpec radial_power(double alpha, double coeff = 1.0) {
    return {RadialPower{alpha, coeff}};
  }

  /// Throws DomainError on alpha <= 0, coeff <= 0 or width <= 0.
  void validate() const;
  std::string describe() const;
};

/// Closed-form profile of phi (with its Laplacian attached), or nullptr for
/// grid-sampled weights.
std::shared_ptr<const ExactProfile> weight_profile(const WeightSpec& spec);

/// Evaluates phi anywhere: exactly for analytic families, by bilinear
/// interpolation for grid-sampled ones.
double evaluate_phi(const WeightSpec& spec, cplx z);

// ---------------------------------------------------------------------------
// Sampling, Laplacian, disk masses, rho
// ---------------------------------------------------------------------------

/// Samples phi on [-L, L]^2 with n nodes per side (n >= 64).
/// PerturbedRadial weights whose Laplacian drops below -tolerance at any node
/// are rejected with a SubharmonicityError naming the offending location.
GridField sample_weight(const WeightSpec& spec, double L, std::size_t n);

/// Density of mu = Laplacian(phi) against Lebesgue measure.
/// Uses the closed-form Laplacian when the field carries one, the 5-point
/// stencil otherwise (boundary nodes copy their nearest interior neighbour).
GridField laplacian(const GridField& phi);

/// 5-point stencil Laplacian; boundary nodes copy their nearest interior neighbour.
GridField stencil_laplacian(const GridField& f);

/// mu(D(z, r)). Closed-form densities are integrated by quadrature in polar
/// coordinates; sampled densities by the midpoint rule over grid cells with
/// exact cell/disk overlap areas. Throws BoxError when the disk leaves the box.
double mass_in_disk(const GridField& mu, cplx z, double r);

/// Integral of a sampled field over D(z, r) by the cell rule above.
double cell_disk_integral(const GridField& f, cplx z, double r);

/// Radius with mu(D(z, rho)) = 1, to absolute tolerance 1e-8.
double rho(const GridField& mu, cplx z);

/// rho as a function on the plane.
///
/// Rotation-invariant closed-form densities are tabulated along the radius
/// and interpolated with a cubic B-spline; everything else is solved on a
/// coarse node set and bilinearly interpolated.
class RhoMap {
 public:
  explicit RhoMap(const GridField& mu, std::size_t table_nodes = 1025);

  double operator()(cplx z) const;
  GridField sample(const Grid& grid) const;
  const GridField& density() const { return mu_; }
  bool radial() const { return radial_; }
  /// Largest rho over the tabulated/sampled region.
  double max_rho() const { return max_rho_; }

 private:
  GridField mu_;
  bool radial_ = false;
  double t_step_ = 0.0;
  std::vector<double> table_;
  std::function<double(double)> spline_;
  GridField coarse_;
  double max_rho_ = 0.0;
};

/// Nodes farther than `ring` from every box edge.
std::vector<bool> interior_mask(const Grid& grid, double ring);

// ---------------------------------------------------------------------------
// Doubling diagnostics
// ---------------------------------------------------------------------------

struct DoublingSample {
  cplx z;
  double r;
  double ratio;
};

enum class DoublingVerdict { doubling, suspect_non_doubling };
std::string_view to_string(DoublingVerdict v);

struct DoublingOptions {
  double growth_threshold = 0.2;
  double constant_cap = 1e4;
};

struct DoublingReport {
  double constant_estimate = 1.0;
  double gamma_estimate = 1.0;
  double growth_trend = 0.0;
  DoublingVerdict verdict = DoublingVerdict::doubling;
  std::vector<DoublingSample> samples;
};

/// Samples mu(D(z,2r))/mu(D(z,r)) over the given radii and centres.
/// gamma is the least-squares exponent of log(r/r') against log(mu(D)/mu(D'))
/// over intersecting pairs with mu(D) > mu(D'), folded into (0, 1].
DoublingReport doubling_report(const GridField& mu, const std::vector<double>& radii,
                               const std::vector<cplx>& centers,
                               const DoublingOptions& options = {});

/// Constant C with C^-1 r^gamma <= mu(D^r(z)) <= C r^(1/gamma) over the samples,
/// together with the extreme log-log growth slopes observed.
struct PowerBoundReport {
  double constant = 1.0;
  double min_slope = 0.0;
  double max_slope = 0.0;
};
PowerBoundReport power_bound_check(const GridField& mu, const RhoMap& rho_map,
                                   const std::vector<cplx>& centers,
                                   const std::vector<double>& radii, double gamma);

// ---------------------------------------------------------------------------
// Properties of rho
// ---------------------------------------------------------------------------

/// max over pairs with D(z) and D(zeta) intersecting of max(q, 1/q), q = rho(z)/rho(zeta).
double rho_near_constancy(const RhoMap& rho_map, const std::vector<cplx>& points);

/// Fit of log(rho(z)/rho(zeta)) <= log C + slope * log(|z - zeta| / rho(zeta))
/// over pairs with zeta outside D(z). slope = 1 - delta.
struct QuotientFit {
  double slope = 0.0;
  double log_constant = 0.0;
  std::size_t pairs = 0;
};
QuotientFit quotient_bound_fit(const RhoMap& rho_map, const std::vector<cplx>& points);

/// Least-squares slope of log rho(t) against log t along the positive axis.
double rho_growth_slope(const RhoMap& rho_map, double t_min, double t_max,
                        std::size_t samples = 16);

// ---------------------------------------------------------------------------
// Regularized weight
// ---------------------------------------------------------------------------

struct RegularizedWeight {
  GridField field;          ///< phi averaged over D(z, rho(z)) at every node
  GridField laplacian;      ///< stencil Laplacian of `field`
  double sup_difference = 0.0;  ///< sup |phi - field| on the interior
  double lower = 0.0;       ///< min of Laplacian * rho^2 on the interior
  double upper = 0.0;       ///< max of Laplacian * rho^2 on the interior
  double ring = 0.0;        ///< width of the excluded boundary ring
};

RegularizedWeight regularize_weight(const WeightSpec& spec, const Grid& grid);
RegularizedWeight regularize_weight(const GridField& phi, const RhoMap& rho_map);

// ---------------------------------------------------------------------------
// Gadgets built around a point zeta
// ---------------------------------------------------------------------------

/// Average over D(c, R), |c| = s, of |u|^p for p > -2.
double power_disk_average(double p, double s, double R);

struct GadgetReport {
  double epsilon = 0.5;
  cplx zeta{0.0, 0.0};
  double rho_zeta = 0.0;
  GridField phi_eps;    ///< (|w - zeta| / rho(zeta))^eps
  GridField psi;        ///< average of phi_eps over D(w, rho(zeta))
  GridField big_phi;    ///< average of |d phi_eps / dw|^2 over D(w, rho(zeta))
  GridField varrho;     ///< regularized weight minus psi
  double c1 = 0.0;      ///< sup |d psi / dw|^2 rho^2(w)
  double c2 = 0.0;      ///< sup Laplacian(psi) rho^2(w)
  double big_phi_at_zeta_scaled = 0.0;  ///< big_phi(zeta) * rho^2(zeta)
  double big_phi_sup_scaled = 0.0;      ///< sup big_phi(w) rho^2(w)
  double psi_minus_phi_min = 0.0;       ///< min of psi - phi_eps over the grid
  double psi_minus_phi_max_near = 0.0;  ///< max of psi - phi_eps on |w - zeta| <= 2 rho(zeta)
  double psi_minus_phi_sup = 0.0;       ///< sup |psi - phi_eps| off D(zeta)
  double varrho_ratio_min = 0.0;        ///< min Laplacian(varrho) / Laplacian(regularized)
  double varrho_ratio_max = 0.0;
};

/// Throws DomainError unless 0 < epsilon < 1 and zeta lies inside the box
/// away from the boundary ring.
GadgetReport proof_gadget_suite(const WeightSpec& spec, cplx zeta, double epsilon,
                                const Grid& grid);

}  // namespace fock::weights
