#include "fock/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "fock/metric.hpp"
#include "fock/quadrature.hpp"

namespace fock::bergman {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// log(|z|^{2N} e^{-2 phi}) along the positive axis, relative to its maximum.
struct TailProfile {
  std::function<double(double)> phi;
  double power;

  double g(double r) const { return power * std::log(r) - 2.0 * phi(r); }

  // Maximum over (0, r_max] by a fine scan; grows r_max until g has dropped.
  double max_value(double L) {
    if (power == 0.0) {
      r_end = L;
      return -2.0 * phi(0.0);
    }
    double best = -std::numeric_limits<double>::infinity();
    double r_max = L;
    for (int round = 0; round < 20; ++round) {
      const double dr = r_max / 4000.0;
      for (int k = 1; k <= 4000; ++k) best = std::max(best, g(dr * k));
      if (g(r_max) < best - 50.0) break;
      r_max *= 2.0;
    }
    r_end = r_max;
    return best;
  }

  // Largest g on [R, max(r_end, 2R)] relative to gmax.
  double log_ratio_beyond(double R, double gmax) const {
    if (power == 0.0) return g0_beyond(R) - gmax;
    const double hi = std::max(r_end, 2.0 * R);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 2000; ++k) best = std::max(best, g(R + (hi - R) * k / 2000.0));
    return std::min(0.0, best - gmax);
  }

  double g0_beyond(double R) const { return -2.0 * phi(R); }

  double r_end = 0.0;
};

}  // namespace

std::string_view to_string(QuadMode m) { return m == QuadMode::radial ? "radial" : "tensor"; }

QuadMode quad_mode_from_string(std::string_view s) {
  if (s == "radial") return QuadMode::radial;
  if (s == "tensor") return QuadMode::tensor;
  throw ConfigError("quad.mode must be 'radial' or 'tensor', got '" + std::string(s) + "'");
}

std::string_view to_string(DecayModel m) {
  switch (m) {
    case DecayModel::stretched: return "stretched";
    case DecayModel::metric: return "metric";
    case DecayModel::christ: return "christ";
  }
  return "stretched";
}

DecayModel decay_model_from_string(std::string_view s) {
  for (DecayModel m : {DecayModel::stretched, DecayModel::metric, DecayModel::christ}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown decay model '" + std::string(s) + "'");
}

KernelModel::KernelModel(const weights::WeightSpec& spec, const ModelOptions& options)
    : spec_(spec), opt_(options) {
  spec_.validate();
  if (!(opt_.L > 0.0)) throw DomainError("model half-width must be positive");
  if (opt_.quad_nodes < 8) throw DomainError("model quadrature needs at least 8 nodes");
  const std::size_t N = opt_.degree;
  auto profile = weights::weight_profile(spec_);
  if (profile) {
    phi_ = profile->at;
  } else {
    phi_ = [spec = spec_](cplx z) { return weights::evaluate_phi(spec, z); };
  }

  if (opt_.mode == QuadMode::radial) {
    if (!profile || !profile->is_radial()) {
      throw DomainError("radial quadrature needs a rotation-invariant closed-form weight");
    }
    auto radial_phi = profile->radial;
    TailProfile tail{radial_phi, 2.0 * static_cast<double>(N)};
    const double gmax = tail.max_value(opt_.L);
    const double log_tol = std::log(opt_.tail_tolerance);
    double R = opt_.L;
    while (tail.log_ratio_beyond(R, gmax) > log_tol) R *= 1.05;
    quad_radius_ = R;
    tail_ratio_ = std::exp(tail.log_ratio_beyond(R, gmax));

    const auto rule = quad::gauss_legendre(opt_.quad_nodes, 0.0, R);
    std::vector<double> base(rule.nodes.size()), logr(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      logr[k] = std::log(rule.nodes[k]);
      base[k] = std::log(rule.weights[k]) + logr[k] - 2.0 * radial_phi(rule.nodes[k]);
    }
    log_c_.resize(N + 1);
    std::vector<double> terms(base.size());
    for (std::size_t n = 0; n <= N; ++n) {
      for (std::size_t k = 0; k < base.size(); ++k) terms[k] = base[k] + 2.0 * n * logr[k];
      log_c_[n] = std::log(2.0 * kPi) + quad::log_sum_exp(terms);
    }
    rank_ = N + 1;
    const bool representable = std::all_of(log_c_.begin(), log_c_.end(),
                                           [](double v) { return std::abs(v) < 600.0; });
    if (representable) {
      E_ = Eigen::MatrixXcd::Zero(N + 1, N + 1);
      for (std::size_t n = 0; n <= N; ++n) E_(n, n) = std::exp(-0.5 * log_c_[n]);
    }
    return;
  }

  // Tensor mode.
  // Scan several directions in case the weight is not radial.
  double log_worst = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < 16; ++a) {
    const cplx dir = std::polar(1.0, 2.0 * kPi * a / 16.0);
    TailProfile tail{[this, dir](double r) { return phi_(r * dir); }, 2.0 * static_cast<double>(N)};
    const double gmax = tail.max_value(opt_.L);
    log_worst = std::max(log_worst, tail.log_ratio_beyond(opt_.L, gmax));
  }
  tail_ratio_ = std::exp(log_worst);
  if (tail_ratio_ > opt_.tail_tolerance) {
    throw DomainError("tail test failed: e^{-2 phi}|z|^{2N} at |z| = L is " +
                      format_double(tail_ratio_) + " of its maximum (needs < " +
                      format_double(opt_.tail_tolerance) + "); increase L or lower N");
  }
  quad_radius_ = opt_.L;
  grid_ = Grid(opt_.L, opt_.quad_nodes);
  const Grid& g = *grid_;
  grid_phi_ = GridField::sample(g, Meaning::weight, phi_);
  const Eigen::Index npts = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd P(npts, static_cast<Eigen::Index>(N + 1));
  const double h = g.spacing();
  for (Eigen::Index k = 0; k < npts; ++k) {
    const cplx z = g.node(static_cast<std::size_t>(k));
    const double sw = h * std::exp(-grid_phi_[static_cast<std::size_t>(k)]);
    cplx p = sw;
    for (std::size_t n = 0; n <= N; ++n) {
      P(k, static_cast<Eigen::Index>(n)) = p;
      p *= z;
    }
  }
  H_ = P.adjoint() * P;
  Eigen::VectorXd s(N + 1);
  log_c_.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    s(n) = std::sqrt(H_(n, n).real());
    log_c_[n] = std::log(H_(n, n).real());
  }
  const Eigen::MatrixXcd B = s.cwiseInverse().asDiagonal() * H_ * s.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(B);
  const auto& lam = eig.eigenvalues();
  const double lmax = lam.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > opt_.spectral_cutoff * lmax) keep.push_back(i);
  }
  rank_ = keep.size();
  E_.resize(N + 1, static_cast<Eigen::Index>(rank_));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    E_.col(static_cast<Eigen::Index>(a)) =
        s.cwiseInverse().asDiagonal() * eig.eigenvectors().col(keep[a]) / std::sqrt(lam(keep[a]));
  }
}

Eigen::MatrixXcd KernelModel::gram() const {
  if (opt_.mode == QuadMode::tensor) return H_;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(opt_.degree + 1, opt_.degree + 1);
  for (std::size_t n = 0; n <= opt_.degree; ++n) H(n, n) = std::exp(log_c_[n]);
  return H;
}

const Grid& KernelModel::quad_grid() const {
  if (!grid_) throw DomainError("radial models carry no quadrature grid");
  return *grid_;
}

const GridField& KernelModel::quad_phi() const {
  if (!grid_) throw DomainError("radial models carry no quadrature grid");
  return grid_phi_;
}

Eigen::VectorXcd KernelModel::basis_values(cplx z) const {
  Eigen::VectorXcd v(opt_.degree + 1);
  cplx p = 1.0;
  for (std::size_t n = 0; n <= opt_.degree; ++n) {
    v(n) = p;
    p *= z;
  }
  return E_.transpose() * v;
}

LogValue KernelModel::log_kernel(cplx z, cplx zeta) const {
  if (opt_.mode == QuadMode::tensor) {
    const cplx K = basis_values(zeta).dot(basis_values(z));
    return {std::log(std::abs(K)), std::arg(K)};
  }
  const cplx w = z * std::conj(zeta);
  const double t = std::abs(w);
  if (t == 0.0) return {-log_c_[0], 0.0};
  const double lt = std::log(t);
  double M = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < log_c_.size(); ++n) M = std::max(M, n * lt - log_c_[n]);
  const cplx step = w / t;
  cplx phase = 1.0;
  cplx S = 0.0;
  for (std::size_t n = 0; n < log_c_.size(); ++n) {
    S += std::exp(n * lt - log_c_[n] - M) * phase;
    phase *= step;
  }
  return {M + std::log(std::abs(S)), std::arg(S)};
}

Eigen::VectorXcd KernelModel::kernel_coefficients(cplx w) const {
  if (E_.size() == 0) throw DomainError("monomial norms are not representable; use log_kernel");
  return E_ * basis_values(w).conjugate();
}

double KernelModel::truncation_ratio(cplx z) const {
  const double N = static_cast<double>(opt_.degree);
  if (z == 0.0) return opt_.degree == 0 ? 1.0 : 0.0;
  const double last = 2.0 * N * std::log(std::abs(z)) - log_c_.back();
  return std::exp(std::min(0.0, last - log_kernel(z, z).log_abs));
}

KernelValue KernelModel::eval(cplx z, cplx zeta) const {
  KernelValue out;
  out.outside_validated =
      std::abs(z) > validated_radius() || std::abs(zeta) > validated_radius();
  if (opt_.mode == QuadMode::tensor) {
    out.value = basis_values(zeta).dot(basis_values(z));
  } else {
    const auto lv = log_kernel(z, zeta);
    out.value = std::polar(std::exp(lv.log_abs), lv.arg);
  }
  return out;
}

double KernelModel::weighted_abs(cplx z, cplx zeta) const {
  return std::exp(log_kernel(z, zeta).log_abs - phi_(z) - phi_(zeta));
}

cplx KernelModel::weighted(cplx z, cplx zeta) const {
  const auto lv = log_kernel(z, zeta);
  return std::polar(std::exp(lv.log_abs - phi_(z) - phi_(zeta)), lv.arg);
}

KernelModel gram_matrix(const weights::WeightSpec& spec, const ModelOptions& options) {
  return KernelModel(spec, options);
}

Eigen::MatrixXcd kernel_matrix(const KernelModel& model, const std::vector<cplx>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXcd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      M(i, j) = model.kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
  }
  return M;
}

Eigen::VectorXcd bergman_project(const KernelModel& model, const ComplexField& f) {
  if (model.mode() != QuadMode::tensor) throw DomainError("projection needs a tensor-mode model");
  const Grid& g = model.quad_grid();
  if (!(f.grid() == g)) throw DomainError("field grid does not match the model quadrature grid");
  const std::size_t N = model.degree();
  const GridField& phi = model.quad_phi();
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(N + 1);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx wf = f[k] * std::exp(-2.0 * phi[k]);
    if (wf == 0.0) continue;
    const cplx zc = std::conj(g.node(k));
    cplx p = 1.0;
    for (std::size_t n = 0; n <= N; ++n) {
      b(n) += wf * p;
      p *= zc;
    }
  }
  b *= g.cell_area();
  const auto& E = model.orthonormal_coefficients();
  return E * (E.adjoint() * b);
}

cplx polynomial_value(const Eigen::VectorXcd& coeffs, cplx z) {
  cplx acc = 0.0;
  for (Eigen::Index n = coeffs.size() - 1; n >= 0; --n) acc = acc * z + coeffs(n);
  return acc;
}

ComplexField polynomial_field(const Grid& grid, const Eigen::VectorXcd& coeffs) {
  return ComplexField::sample(grid, Meaning::function,
                              [&](cplx z) { return polynomial_value(coeffs, z); });
}

ComplexField project_field(const KernelModel& model, const ComplexField& f) {
  return polynomial_field(model.quad_grid(), bergman_project(model, f));
}

double check_reproducing(const KernelModel& model, const Eigen::VectorXcd& coeffs,
                         const std::vector<cplx>& points) {
  Eigen::Index deg = coeffs.size() - 1;
  while (deg > 0 && coeffs(deg) == 0.0) --deg;
  if (static_cast<std::size_t>(deg) + 5 > model.degree()) {
    throw DomainError("reproducing check needs deg f <= N - 5");
  }
  const double R = model.quadrature_radius();
  const auto rule = quad::gauss_legendre(400, 0.0, R);
  const std::size_t M = 2 * (model.degree() + static_cast<std::size_t>(deg)) + 16;
  const double dtheta = 2.0 * kPi / static_cast<double>(M);
  double worst = 0.0;
  for (const cplx z : points) {
    cplx acc = 0.0;
    for (std::size_t a = 0; a < M; ++a) {
      const cplx dir = std::polar(1.0, dtheta * static_cast<double>(a));
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = rule.nodes[k];
        const cplx w = t * dir;
        acc += rule.weights[k] * t * polynomial_value(coeffs, w) * model.weighted(z, w) *
               std::exp(-model.phi(w));
      }
    }
    acc *= dtheta * std::exp(model.phi(z));
    const cplx fz = polynomial_value(coeffs, z);
    worst = std::max(worst, std::abs(fz - acc) / (1.0 + std::abs(fz)));
  }
  return worst;
}

std::vector<double> diagonal_check(const KernelModel& model, const weights::RhoMap& rho_map,
                                   const std::vector<cplx>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const cplx z : points) {
    const double r = rho_map(z);
    out.push_back(std::exp(model.log_kernel(z, z).log_abs - 2.0 * model.phi(z)) * r * r);
  }
  return out;
}

CoarseReport coarse_check(const KernelModel& model, const weights::RhoMap& rho_map,
                          const std::vector<std::pair<cplx, cplx>>& pairs) {
  if (pairs.empty()) throw DomainError("coarse check needs at least one pair");
  CoarseReport rep;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [z, zeta] = pairs[k];
    const double rz = rho_map(z);
    const double v = model.weighted_abs(z, zeta) * rz * rho_map(zeta);
    rep.values.push_back(v);
    if (v > rep.max_value) {
      rep.max_value = v;
      rep.argmax = k;
      rep.argmax_separation = std::abs(z - zeta) / rz;
    }
  }
  return rep;
}

DecayFit envelope_fit(const std::vector<DecaySample>& fit_samples,
                      const std::vector<DecaySample>& holdout_samples, double C, DecayModel choice) {
  constexpr double kNoiseFloor = 1e-13;
  if (!(C > 0.0)) throw DomainError("decay fit needs a positive constant");
  DecayFit fit;
  fit.model = choice;
  fit.C_fit = C;
  const bool linear = choice == DecayModel::christ;
  std::vector<double> x, y;
  std::vector<DecaySample> used;
  for (const auto& s : fit_samples) {
    if (s.value < kNoiseFloor) continue;
    const double q = -std::log(s.value / C);
    if (!(q > 1e-12) || !(s.sep > 0.0)) continue;
    used.push_back(s);
    x.push_back(linear ? s.sep : std::log(s.sep));
    y.push_back(linear ? q : std::log(q));
  }
  fit.fit_used = used.size();
  if (used.size() < 10) {
    throw DomainError("decay fit needs at least 10 usable pairs, got " + std::to_string(used.size()));
  }
  if (linear) {
    fit.rate = 1.0;
    fit.eps_fit = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < x.size(); ++k) fit.eps_fit = std::min(fit.eps_fit, y[k] / x[k]);
  } else {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      mx += x[k];
      my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sxy += (x[k] - mx) * (y[k] - my);
      sxx += (x[k] - mx) * (x[k] - mx);
    }
    if (!(sxx > 0.0)) throw DomainError("decay fit pairs do not span distinct separations");
    fit.eps_fit = sxy / sxx;
    fit.rate = std::numeric_limits<double>::infinity();
    for (const auto& s : used) {
      fit.rate = std::min(fit.rate, -std::log(s.value / C) / std::pow(s.sep, fit.eps_fit));
    }
  }
  std::size_t covered = 0;
  for (const auto& s : holdout_samples) {
    if (s.value < kNoiseFloor) continue;
    ++fit.holdout_used;
    const double expo = linear ? fit.eps_fit * s.sep : fit.rate * std::pow(s.sep, fit.eps_fit);
    if (s.value <= C * std::exp(-expo) * (1.0 + 1e-9)) ++covered;
  }
  fit.coverage = fit.holdout_used > 0
                     ? static_cast<double>(covered) / static_cast<double>(fit.holdout_used)
                     : 0.0;
  return fit;
}

DecayFit decay_fit(const KernelModel& model, const weights::RhoMap& rho_map,
                   const metric::MetricGraph* graph,
                   const std::vector<std::pair<cplx, cplx>>& fit_pairs,
                   const std::vector<std::pair<cplx, cplx>>& holdout_pairs, DecayModel choice) {
  if (choice != DecayModel::stretched && graph == nullptr) {
    throw DomainError("metric and christ decay models need a metric graph");
  }
  std::map<std::size_t, std::vector<double>> dist_cache;
  auto separation = [&](cplx z, cplx zeta) {
    if (choice == DecayModel::stretched) return std::abs(z - zeta) / rho_map(z);
    const Grid& g = graph->grid();
    const std::size_t src = g.snap(z);
    auto it = dist_cache.find(src);
    if (it == dist_cache.end()) it = dist_cache.emplace(src, graph->distances_from_node(src)).first;
    return it->second[g.snap(zeta)];
  };
  auto normalized = [&](cplx z, cplx zeta) {
    const double rz = rho_map(z);
    const double scale = choice == DecayModel::christ ? rz * rz : rz * rho_map(zeta);
    return model.weighted_abs(z, zeta) * scale;
  };
  double C = 0.0;
  std::vector<DecaySample> fit_samples, holdout_samples;
  for (const auto& [z, zeta] : fit_pairs) {
    for (cplx p : {z, zeta}) {
      const double r = rho_map(p);
      C = std::max(C, std::exp(model.log_kernel(p, p).log_abs - 2.0 * model.phi(p)) * r * r);
    }
    const double v = normalized(z, zeta);
    C = std::max(C, v);
    fit_samples.push_back({separation(z, zeta), v});
  }
  for (const auto& [z, zeta] : holdout_pairs) {
    holdout_samples.push_back({separation(z, zeta), normalized(z, zeta)});
  }
  return envelope_fit(fit_samples, holdout_samples, C, choice);
}

std::vector<SubmeanRatios> submean_check(const KernelModel& model, const weights::RhoMap& rho_map,
                                         const Eigen::VectorXcd& coeffs, double r, double s,
                                         const std::vector<cplx>& points) {
  if (!(r > 0.0 && s > r)) throw DomainError("sub-mean check needs s > r > 0");
  auto density = [&](cplx w) {
    const double rw = rho_map(w);
    return std::norm(polynomial_value(coeffs, w)) * std::exp(-2.0 * model.phi(w)) / (rw * rw);
  };
  auto annulus = [&](cplx z, double a, double b) {
    const auto rule = quad::gauss_legendre(48, a, b);
    const std::size_t M = 96;
    double acc = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      const cplx dir = std::polar(1.0, 2.0 * kPi * (k + 0.5) / M);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * rule.nodes[i] * density(z + rule.nodes[i] * dir);
      }
    }
    return acc * 2.0 * kPi / M;
  };
  auto g = [&](cplx w) { return std::abs(polynomial_value(coeffs, w)) * std::exp(-model.phi(w)); };
  std::vector<SubmeanRatios> out;
  for (const cplx z : points) {
    const double rz = rho_map(z);
    const double left = std::norm(polynomial_value(coeffs, z)) * std::exp(-2.0 * model.phi(z));
    const double inner = annulus(z, 0.0, r * rz);
    const double ring = annulus(z, r * rz, s * rz);
    const double d = 1e-5 * rz;
    const double gx = (g(z + cplx{d, 0.0}) - g(z - cplx{d, 0.0})) / (2.0 * d);
    const double gy = (g(z + cplx{0.0, d}) - g(z - cplx{0.0, d})) / (2.0 * d);
    const double b = (gx * gx + gy * gy) / inner;
    out.push_back({z, left / inner, b, b * rz * rz, left / ring});
  }
  return out;
}

}  // namespace fock::bergman
