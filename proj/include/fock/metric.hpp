#pragma once

#include <utility>
#include <vector>

#include "fock/grid.hpp"

namespace fock::metric {

/// Graph over the nodes of a rho field realizing the path metric rho^-2 |dz|^2.
///
/// Each node connects to the nodes reached by the primitive integer offsets
/// (di, dj) with max(|di|, |dj|) <= stencil_radius. An edge of Euclidean
/// length l costs l times the Simpson average of 1/rho along it (endpoint
/// values and the bilinear midpoint value).
class MetricGraph {
 public:
  explicit MetricGraph(const GridField& rho_field, int stencil_radius = 3);

  const Grid& grid() const { return rho_.grid(); }
  const GridField& rho_field() const { return rho_; }
  int stencil_radius() const { return radius_; }
  const std::vector<std::pair<int, int>>& offsets() const { return offsets_; }

  /// Cost of the edge leaving node k along offsets()[o]; +inf when the target
  /// lies outside the grid.
  double edge_weight(std::size_t k, std::size_t o) const { return weights_[k * offsets_.size() + o]; }

  /// Nodes farther than max rho from every box edge.
  bool interior(std::size_t k) const;

  /// Shortest-path distances from the node nearest to z to every node.
  std::vector<double> distances_from(cplx z) const;
  std::vector<double> distances_from_node(std::size_t source) const;

  /// Largest ratio of graph length to Euclidean length over all directions
  /// for a constant rho.
  double anisotropy_bound() const { return anisotropy_; }

 private:
  GridField rho_;
  int radius_;
  std::vector<std::pair<int, int>> offsets_;
  std::vector<double> weights_;
  double ring_ = 0.0;
  double anisotropy_ = 1.0;
};

MetricGraph build_metric_graph(const GridField& rho_field, int stencil_radius = 3);

/// Worst-direction overestimate factor of the stencil of the given radius
/// (sec(pi/8) for radius 1).
double stencil_anisotropy(int stencil_radius);

/// d_phi between the interior nodes nearest to z and zeta. Exactly symmetric.
double d_phi(const MetricGraph& graph, cplx z, cplx zeta);

struct DistanceBoundsReport {
  double near_min = 0.0;  ///< min of d_phi / (|z - zeta| / rho(z)) over zeta in D^r(z)
  double near_max = 0.0;
  std::size_t near_samples = 0;
  double far_lower_slope = 0.0;  ///< smallest log-log chord slope from the nearest far point
  double far_upper_slope = 0.0;  ///< largest such slope
  double delta_fit = 0.0;        ///< min(lower, 2 - upper, 1); positive iff one delta fits both
  bool common_delta = false;
  double anisotropy_bound = 1.0;
};

/// Near regime: every node of D^r(z) other than z. Far regime: the given
/// points, which must lie outside D^r(z); at least 8 are required.
DistanceBoundsReport distance_bounds_check(const MetricGraph& graph, cplx z, double r,
                                           const std::vector<cplx>& far_points);

/// Sum over nodes of |z - zeta|^k exp(-d_phi(z, zeta)^eps) mu(z) h^2 / rho(zeta)^k.
/// Throws BoxError when the integrand exceeds 1e-10 on the box boundary.
double integrability_check(const GridField& mu, const MetricGraph& graph, cplx zeta, double k,
                           double epsilon);

}  // namespace fock::metric
