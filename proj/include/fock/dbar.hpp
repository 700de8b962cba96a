#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fock/bergman.hpp"
#include "fock/grid.hpp"
#include "fock/weights.hpp"

namespace fock::metric {
class MetricGraph;
}

namespace fock::dbar {

// ---------------------------------------------------------------------------
// Cauchy transform
// ---------------------------------------------------------------------------

/// u(z) = -(1/pi) int f(zeta) / (zeta - z) dm(zeta) for f piecewise constant on
/// the grid cells. Cell integrals of 1/zeta are evaluated in closed form and
/// the sum is a discrete convolution carried out with FFTW.
class CauchyOperator {
 public:
  explicit CauchyOperator(const Grid& grid);
  ~CauchyOperator();
  CauchyOperator(const CauchyOperator&) = delete;
  CauchyOperator& operator=(const CauchyOperator&) = delete;

  const Grid& grid() const { return grid_; }
  /// Throws BoxError when f is nonzero on the outermost node ring.
  ComplexField apply(const ComplexField& f) const;

 private:
  struct Plans;
  Grid grid_;
  std::size_t m_ = 0;
  std::vector<cplx> kernel_hat_;
  std::unique_ptr<Plans> plans_;
};

ComplexField cauchy_transform(const ComplexField& f);

/// Closed-form integral of 1/zeta over [x0, x1] x [y0, y1].
cplx cell_integral_inverse(double x0, double x1, double y0, double y1);

/// Central-difference d/dzbar = (d/dx + i d/dy) / 2; the outer ring is left 0.
ComplexField dbar_difference(const ComplexField& u);

/// || dbar(u) - f || / || f || in L^2(e^{-2 phi}) over nodes at least two
/// cells from the box edge.
double dbar_residual(const ComplexField& u, const ComplexField& f, const GridField& phi);

// ---------------------------------------------------------------------------
// Covering and partition of unity
// ---------------------------------------------------------------------------

/// exp(-1 / (1 - t^2)) on |t| < 1, 0 elsewhere.
double bump(double t);

struct PartitionEntry {
  std::size_t node = 0;
  double chi = 0.0;
  cplx dbar_chi;
};

struct Covering {
  Grid grid;
  double r = 0.75;
  /// Minimal centre distance in units of r * min(rho, rho').
  double separation = 0.8;
  std::vector<cplx> centers;
  std::vector<double> center_rho;
  /// Per centre: nodes of supp chi_i with chi_i and dbar chi_i there.
  std::vector<std::vector<PartitionEntry>> partition;
  std::size_t max_overlap = 0;
  /// sup |dbar chi_i|^2 rho^2 / chi_i over the supports.
  double gradient_constant = 0.0;
  /// Per centre: min over supp chi_i of |k_{z_i}| e^{-phi} rho(z_i); empty until certified.
  std::vector<double> certificates;
  GridField rho_field;

  /// (centre, chi_i(z)) for every centre whose support contains z.
  std::vector<std::pair<std::size_t, double>> partition_at(cplx z) const;
  bool certified() const { return certificates.size() == centers.size() && !centers.empty(); }
};

/// Greedy maximal set of centres over the grid nodes (visited by increasing
/// |z|) with pairwise distance >= separation * r * min(rho); chi_i is the bump
/// of |z - z_i| / (r rho(z_i)) divided by the sum. Throws DomainError unless
/// 0.5 <= r <= 2.
Covering build_covering(const GridField& rho_field, double r = 0.75, double separation = 0.8);

/// Fills the nonvanishing certificates and throws CertificateError (suggesting
/// a smaller r) when some min falls below threshold.
void certify_covering(Covering& covering, const bergman::KernelModel& model,
                      double threshold = 1e-10);

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

enum class SolveMethod { cauchy, covering_G, canonical };
std::string_view to_string(SolveMethod m);

struct SolveReport {
  SolveMethod method = SolveMethod::cauchy;
  double residual = 0.0;
  double norm_u = 0.0;
  double orthogonality_defect = 0.0;
  double norm_u0 = 0.0;
  double norm_projection = 0.0;
  std::size_t grid_nodes = 0;
  std::size_t active_centers = 0;
};

/// phi sampled at the nodes of grid.
GridField sample_phi(const bergman::KernelModel& model, const Grid& grid);

/// u = sum_i k_{z_i}(z) (-1/pi) int f chi_i / ((zeta - z) k_{z_i}(zeta)) dm.
/// Certifies the covering first when needed.
std::pair<ComplexField, SolveReport> apply_G(Covering& covering, const bergman::KernelModel& model,
                                             const ComplexField& f);

/// G(z, zeta) including the factor e^{phi(zeta) - phi(z)}; z != zeta.
cplx G_kernel(const Covering& covering, const bergman::KernelModel& model, cplx z, cplx zeta);

/// u = u0 - P u0 with the tensor model on the model grid. When f is given the
/// report carries the dbar residual against it.
std::pair<ComplexField, SolveReport> canonical_solve(const bergman::KernelModel& model,
                                                     const ComplexField& u0,
                                                     const ComplexField* f = nullptr);

/// max over k <= N - 5 of |<u, z^k>| / (||u|| ||z^k||) with the discrete inner product.
double orthogonality_defect(const bergman::KernelModel& model, const ComplexField& u);

// ---------------------------------------------------------------------------
// Kernel estimates
// ---------------------------------------------------------------------------

struct RegimeReport {
  double near_slope = 0.0;
  std::size_t near_samples = 0;
  double near_constant = 0.0;  ///< max |kernel| |z - zeta|
  bergman::DecayFit far;
};

struct KernelEstimateReport {
  RegimeReport G;
  bool has_canonical = false;
  RegimeReport canonical;
  double mollifier_scale = 0.0;
};

struct KernelEstimateOptions {
  double near_min = 0.02;  ///< near samples |z - zeta| / rho(zeta) in [near_min, near_max]
  double near_max = 0.9;
  double far_min = 1.2;    ///< far samples in [far_min, far_max]
  double far_max = 6.0;
  std::size_t radii = 12;
  std::size_t angles = 8;
  std::size_t canonical_sources = 0;  ///< probe points also solved column-wise (0 = none)
};

/// Near regime: least-squares slope of log|G| against log|z - zeta|. Far regime:
/// |G| rho(z) <= C exp(-a d_phi^eps) with C = e max(near_constant, far values),
/// fit on alternate samples and covered on the rest. The canonical kernel is
/// sampled from canonical_solve applied to Cauchy transforms of Gaussian
/// mollified point masses of scale 1.5 h (tensor model required).
KernelEstimateReport kernel_estimate_check(Covering& covering, const bergman::KernelModel& model,
                                           const weights::RhoMap& rho_map,
                                           const metric::MetricGraph& graph,
                                           const std::vector<cplx>& probe_points,
                                           const KernelEstimateOptions& options = {},
                                           const bergman::KernelModel* canonical_model = nullptr);

// ---------------------------------------------------------------------------
// Compactness probe
// ---------------------------------------------------------------------------

struct ProbeRow {
  cplx zj;
  double abs_zj = 0.0;
  double rho_zj = 0.0;
  double norm_uj = 0.0;
  double ratio = 0.0;        ///< norm_uj / rho_zj
  double kernel_norm = 0.0;  ///< ||k_{z_j}|| by the same quadrature
  double orthogonality = 0.0;  ///< max_k<=2 |<u_j, z^k>| / (||u_j|| ||z^k||)
  std::vector<double> concentration;  ///< share of ||u_j||^2 inside D^r(z_j) per radius
};

enum class ProbeVerdict { non_compact_signature, compact_signature, inconclusive };
std::string_view to_string(ProbeVerdict v);

struct ProbeOptions {
  double spread_max = 1.5;
  double decay_max = 0.6;
  double kernel_tolerance = 1e-3;
  double window = 12.0;  ///< integration radius in units of rho(z_j)
  std::size_t radial_nodes = 160;
  std::size_t angular_nodes = 192;
  std::vector<double> concentration_radii{2.0, 4.0, 6.0};
};

struct ProbeReport {
  std::vector<ProbeRow> rows;
  double spread = 0.0;  ///< max / min of ratio
  double decay = 0.0;   ///< norm_uj of the farthest centre over the nearest
  ProbeVerdict verdict = ProbeVerdict::inconclusive;
};

/// For each centre builds u_j = conj(z - z_j) k_{z_j}(z), which solves
/// dbar u = k_{z_j} and is orthogonal to the polynomials, and integrates its
/// norm on a polar window around z_j. Throws CertificateError when
/// | ||k_{z_j}|| - 1 | exceeds the kernel tolerance.
ProbeReport compactness_probe(const bergman::KernelModel& model, const weights::RhoMap& rho_map,
                              const std::vector<cplx>& centers, const ProbeOptions& options = {});

// ---------------------------------------------------------------------------
// L^p bounds for the canonical solution
// ---------------------------------------------------------------------------

struct LpBound {
  double p = 2.0;  ///< infinity for the sup norm
  std::vector<double> ratios;  ///< ||u e^{-phi}||_p / ||f e^{-phi} rho||_p per sample (0/0 skipped)
  double max_ratio = 0.0;
  double min_ratio = 0.0;
};

/// Canonical solutions of the sampled right sides and their L^p ratios.
std::vector<LpBound> minimal_solution_bound_check(const bergman::KernelModel& model,
                                                  const weights::RhoMap& rho_map,
                                                  const std::vector<ComplexField>& f_samples,
                                                  const std::vector<double>& ps);

}  // namespace fock::dbar
