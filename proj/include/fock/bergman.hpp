#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fock/grid.hpp"
#include "fock/weights.hpp"

namespace fock::metric {
class MetricGraph;
}

namespace fock::bergman {

enum class QuadMode { radial, tensor };
std::string_view to_string(QuadMode m);
QuadMode quad_mode_from_string(std::string_view s);

struct ModelOptions {
  std::size_t degree = 40;
  double L = 6.0;
  QuadMode mode = QuadMode::radial;
  /// Gauss-Legendre nodes along the radius (radial) or nodes per side (tensor).
  std::size_t quad_nodes = 2048;
  double eval_fraction = 0.6;
  double tail_tolerance = 1e-14;
  double spectral_cutoff = 1e-12;
};

struct KernelValue {
  cplx value;
  bool outside_validated = false;
};

/// log |K| and arg K, so that kernels of size e^{2 phi} stay representable.
struct LogValue {
  double log_abs = 0.0;
  double arg = 0.0;
};

/// Bergman kernel of the weighted space spanned by 1, z, ..., z^N.
///
/// Radial mode integrates the Gram diagonal c_n = 2 pi int r^{2n+1} e^{-2 phi} dr
/// on a Gauss-Legendre rule and keeps log c_n; the quadrature radius grows past
/// L until the tail test passes. Tensor mode sums over the nodes of the grid
/// [-L, L]^2 with weights h^2 e^{-2 phi}, scales the Gram matrix to unit
/// diagonal and inverts it through a Hermitian eigendecomposition truncated at
/// the relative spectral cutoff.
class KernelModel {
 public:
  KernelModel(const weights::WeightSpec& spec, const ModelOptions& options);

  const ModelOptions& options() const { return opt_; }
  const weights::WeightSpec& spec() const { return spec_; }
  std::size_t degree() const { return opt_.degree; }
  QuadMode mode() const { return opt_.mode; }
  std::size_t rank() const { return rank_; }
  double validated_radius() const { return opt_.eval_fraction * opt_.L; }
  /// Radius of the region actually integrated (radial mode may exceed L).
  double quadrature_radius() const { return quad_radius_; }
  /// Largest e^{-2 phi} |z|^{2N} at the truncation radius relative to its maximum.
  double tail_ratio() const { return tail_ratio_; }

  double phi(cplx z) const { return phi_(z); }

  /// Share of the top-degree term |z|^{2N}/c_N in K(z, z); small when the
  /// truncation is converged at z.
  double truncation_ratio(cplx z) const;

  /// Gram matrix H[j][m] = <z^m, z^j>. Radial mode fills the diagonal only.
  Eigen::MatrixXcd gram() const;
  /// log H[n][n].
  const std::vector<double>& log_gram_diagonal() const { return log_c_; }

  /// Orthonormal basis coefficients: e_a(z) = sum_n E[n][a] z^n (tensor mode,
  /// or radial mode when the diagonal is representable).
  const Eigen::MatrixXcd& orthonormal_coefficients() const { return E_; }

  /// Tensor mode only.
  const Grid& quad_grid() const;
  const GridField& quad_phi() const;

  /// q with K(z, w) = sum_n q[n] z^n; needs orthonormal coefficients.
  Eigen::VectorXcd kernel_coefficients(cplx w) const;

  KernelValue eval(cplx z, cplx zeta) const;
  cplx kernel(cplx z, cplx zeta) const { return eval(z, zeta).value; }
  LogValue log_kernel(cplx z, cplx zeta) const;
  /// |K(z, zeta)| e^{-phi(z) - phi(zeta)}.
  double weighted_abs(cplx z, cplx zeta) const;
  /// K(z, zeta) e^{-phi(z) - phi(zeta)} with its phase.
  cplx weighted(cplx z, cplx zeta) const;

 private:
  Eigen::VectorXcd basis_values(cplx z) const;

  weights::WeightSpec spec_;
  ModelOptions opt_;
  std::function<double(cplx)> phi_;
  std::vector<double> log_c_;
  Eigen::MatrixXcd H_;
  Eigen::MatrixXcd E_;
  std::size_t rank_ = 0;
  double quad_radius_ = 0.0;
  double tail_ratio_ = 0.0;
  std::optional<Grid> grid_;
  GridField grid_phi_;
};

/// Builds the Gram part and factorization; throws DomainError when the tail
/// test fails in tensor mode.
KernelModel gram_matrix(const weights::WeightSpec& spec, const ModelOptions& options);

/// Matrix [K(z_i, z_j)].
Eigen::MatrixXcd kernel_matrix(const KernelModel& model, const std::vector<cplx>& points);

/// Monomial coefficients of the projection of f (tensor mode, f on the model grid).
Eigen::VectorXcd bergman_project(const KernelModel& model, const ComplexField& f);
/// The projection evaluated at the grid nodes.
ComplexField project_field(const KernelModel& model, const ComplexField& f);
/// sum_n c_n z^n sampled on a grid.
ComplexField polynomial_field(const Grid& grid, const Eigen::VectorXcd& coeffs);
cplx polynomial_value(const Eigen::VectorXcd& coeffs, cplx z);

/// max over points of |f(z) - int f K(z, .) e^{-2 phi} dm| / (1 + |f(z)|), the
/// integral taken with a polar product rule independent of the Gram quadrature.
double check_reproducing(const KernelModel& model, const Eigen::VectorXcd& coeffs,
                         const std::vector<cplx>& points);

/// K(z,z) rho^2(z) e^{-2 phi(z)} per point.
std::vector<double> diagonal_check(const KernelModel& model, const weights::RhoMap& rho_map,
                                   const std::vector<cplx>& points);

struct CoarseReport {
  double max_value = 0.0;
  std::size_t argmax = 0;
  double argmax_separation = 0.0;  ///< |z - zeta| / rho(z) at the maximizing pair
  std::vector<double> values;
};
/// |K(z, zeta)| rho(z) rho(zeta) e^{-phi(z) - phi(zeta)} over pairs.
CoarseReport coarse_check(const KernelModel& model, const weights::RhoMap& rho_map,
                          const std::vector<std::pair<cplx, cplx>>& pairs);

enum class DecayModel { stretched, metric, christ };
std::string_view to_string(DecayModel m);
DecayModel decay_model_from_string(std::string_view s);

struct DecayFit {
  DecayModel model = DecayModel::stretched;
  double C_fit = 0.0;
  double eps_fit = 0.0;
  double rate = 1.0;  ///< a in C exp(-a sep^eps); 1 for the linear model
  double coverage = 0.0;
  std::size_t fit_used = 0;
  std::size_t holdout_used = 0;
};

struct DecaySample {
  double sep = 0.0;
  double value = 0.0;
};

/// Fit of value <= C exp(-rate sep^eps) (stretched, metric) or C exp(-eps sep)
/// (christ) with C given. eps is the least-squares slope of log(-log(v/C))
/// against log sep, rate the envelope over the fit samples; coverage is the
/// fraction of holdout samples under the bound (relative tolerance 1e-9).
/// Samples below 1e-13 are dropped; fewer than 10 usable fit samples is an error.
DecayFit envelope_fit(const std::vector<DecaySample>& fit_samples,
                      const std::vector<DecaySample>& holdout_samples, double C, DecayModel choice);

/// Fits |K| rho rho e^{-phi-phi} <= C exp(-a sep^eps) (stretched: sep = |z-zeta|/rho(z);
/// metric: sep = d_phi) or |K| rho(z)^2 e^{-phi-phi} <= C exp(-eps d_phi) (christ).
/// C is the largest diagonal value over the fit endpoints; a is the envelope
/// over the fit pairs. Pairs below 1e-13 are dropped; fewer than 10 usable
/// fit pairs is an error.
DecayFit decay_fit(const KernelModel& model, const weights::RhoMap& rho_map,
                   const metric::MetricGraph* graph,
                   const std::vector<std::pair<cplx, cplx>>& fit_pairs,
                   const std::vector<std::pair<cplx, cplx>>& holdout_pairs, DecayModel choice);

struct SubmeanRatios {
  cplx z;
  double a = 0.0;  ///< |f|^2 e^{-2phi}(z) / int_{D^r(z)} |f|^2 e^{-2phi} / rho^2
  double b = 0.0;  ///< |grad(|f| e^{-phi})|^2(z) / same integral
  double b_scaled = 0.0;  ///< b * rho^2(z), the scale-invariant form of b
  double c = 0.0;  ///< |f|^2 e^{-2phi}(z) / int over D^s(z) minus D^r(z)
};
std::vector<SubmeanRatios> submean_check(const KernelModel& model, const weights::RhoMap& rho_map,
                                         const Eigen::VectorXcd& coeffs, double r, double s,
                                         const std::vector<cplx>& points);

}  // namespace fock::bergman
