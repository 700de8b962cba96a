#include "fock/dbar.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "fock/metric.hpp"
#include "fock/quadrature.hpp"

namespace fock::dbar {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Antiderivatives with d^2/dxdy equal to x/r^2 and y/r^2.
long double anti_x(long double x, long double y) {
  const long double r2 = x * x + y * y;
  const long double a = x == 0.0L ? 0.0L : x * std::atan(y / x);
  const long double b = y == 0.0L ? 0.0L : 0.5L * y * std::log(r2);
  return a + b;
}

long double anti_y(long double x, long double y) { return anti_x(y, x); }

cplx horner(const Eigen::VectorXcd& q, cplx z) {
  cplx acc = 0.0;
  for (Eigen::Index n = q.size() - 1; n >= 0; --n) acc = acc * z + q(n);
  return acc;
}

// Normalized reproducing kernel k_w(z) = K(z, w) / sqrt(K(w, w)) as a polynomial.
struct NormalizedKernel {
  Eigen::VectorXcd q;
  double norm = 1.0;

  NormalizedKernel(const bergman::KernelModel& model, cplx w) : q(model.kernel_coefficients(w)) {
    norm = std::sqrt(horner(q, w).real());
  }
  cplx operator()(cplx z) const { return horner(q, z) / norm; }
};

double weighted_sq_norm(const ComplexField& f, const GridField& phi) {
  double acc = 0.0;
  for (std::size_t k = 0; k < f.grid().size(); ++k) acc += std::norm(f[k]) * std::exp(-2.0 * phi[k]);
  return acc * f.grid().cell_area();
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
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
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::vector<double> log_space(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
    out[k] = a * std::pow(b / a, t);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cauchy transform
// ---------------------------------------------------------------------------

cplx cell_integral_inverse(double x0, double x1, double y0, double y1) {
  auto rect = [&](auto F) {
    return F(x1, y1) - F(x0, y1) - F(x1, y0) + F(x0, y0);
  };
  const long double re = rect([](long double x, long double y) { return anti_x(x, y); });
  const long double im = rect([](long double x, long double y) { return anti_y(x, y); });
  return {static_cast<double>(re), -static_cast<double>(im)};
}

struct CauchyOperator::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

CauchyOperator::CauchyOperator(const Grid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  const std::size_t n = grid.n();
  m_ = 2 * n;
  const double h = grid.spacing();
  const std::size_t total = m_ * m_;
  auto* buf = fftw_alloc_complex(total);
  auto* out = fftw_alloc_complex(total);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plans_->forward = fftw_plan_dft_2d(static_cast<int>(m_), static_cast<int>(m_), buf, out,
                                       FFTW_FORWARD, FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft_2d(static_cast<int>(m_), static_cast<int>(m_), buf, out,
                                        FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  std::fill(reinterpret_cast<double*>(buf), reinterpret_cast<double*>(buf) + 2 * total, 0.0);
  const auto nn = static_cast<long>(n);
  const auto mm = static_cast<long>(m_);
  for (long ey = -(nn - 1); ey <= nn - 1; ++ey) {
    for (long ex = -(nn - 1); ex <= nn - 1; ++ex) {
      const double cx = static_cast<double>(ex) * h;
      const double cy = static_cast<double>(ey) * h;
      const cplx v = cell_integral_inverse(cx - 0.5 * h, cx + 0.5 * h, cy - 0.5 * h, cy + 0.5 * h) / kPi;
      const std::size_t ix = static_cast<std::size_t>((ex + mm) % mm);
      const std::size_t iy = static_cast<std::size_t>((ey + mm) % mm);
      buf[iy * m_ + ix][0] = v.real();
      buf[iy * m_ + ix][1] = v.imag();
    }
  }
  fftw_execute_dft(plans_->forward, buf, out);
  kernel_hat_.resize(total);
  for (std::size_t k = 0; k < total; ++k) kernel_hat_[k] = {out[k][0], out[k][1]};
  fftw_free(buf);
  fftw_free(out);
}

CauchyOperator::~CauchyOperator() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

ComplexField CauchyOperator::apply(const ComplexField& f) const {
  if (!(f.grid() == grid_)) throw DomainError("Cauchy transform: field grid does not match the operator");
  const std::size_t n = grid_.n();
  double fmax = 0.0;
  for (const cplx& v : f.values()) fmax = std::max(fmax, std::abs(v));
  ComplexField u(grid_, Meaning::function);
  if (fmax == 0.0) return u;
  double edge = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    edge = std::max({edge, std::abs(f(k, 0)), std::abs(f(k, n - 1)), std::abs(f(0, k)), std::abs(f(n - 1, k))});
  }
  if (edge > 1e-12 * fmax) throw BoxError("Cauchy transform: right side touches the box boundary");

  const std::size_t total = m_ * m_;
  auto* buf = fftw_alloc_complex(total);
  auto* out = fftw_alloc_complex(total);
  std::fill(reinterpret_cast<double*>(buf), reinterpret_cast<double*>(buf) + 2 * total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      buf[j * m_ + i][0] = f(i, j).real();
      buf[j * m_ + i][1] = f(i, j).imag();
    }
  }
  fftw_execute_dft(plans_->forward, buf, out);
  for (std::size_t k = 0; k < total; ++k) {
    const cplx v = cplx{out[k][0], out[k][1]} * kernel_hat_[k];
    buf[k][0] = v.real();
    buf[k][1] = v.imag();
  }
  fftw_execute_dft(plans_->backward, buf, out);
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) u(i, j) = cplx{out[j * m_ + i][0], out[j * m_ + i][1]} * scale;
  }
  fftw_free(buf);
  fftw_free(out);
  return u;
}

ComplexField cauchy_transform(const ComplexField& f) { return CauchyOperator(f.grid()).apply(f); }

ComplexField dbar_difference(const ComplexField& u) {
  const Grid& g = u.grid();
  const std::size_t n = g.n();
  const double h = g.spacing();
  ComplexField d(g, Meaning::function);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const cplx ux = (u(i + 1, j) - u(i - 1, j)) / (2.0 * h);
      const cplx uy = (u(i, j + 1) - u(i, j - 1)) / (2.0 * h);
      d(i, j) = 0.5 * (ux + cplx{0.0, 1.0} * uy);
    }
  }
  return d;
}

double dbar_residual(const ComplexField& u, const ComplexField& f, const GridField& phi) {
  if (!(u.grid() == f.grid()) || !(u.grid() == phi.grid())) {
    throw DomainError("dbar residual: grids differ");
  }
  const auto d = dbar_difference(u);
  const std::size_t n = u.grid().n();
  double num = 0.0, den = 0.0;
  for (std::size_t j = 2; j + 2 < n; ++j) {
    for (std::size_t i = 2; i + 2 < n; ++i) {
      const double w = std::exp(-2.0 * phi(i, j));
      num += std::norm(d(i, j) - f(i, j)) * w;
      den += std::norm(f(i, j)) * w;
    }
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Covering
// ---------------------------------------------------------------------------

double bump(double t) {
  const double a = 1.0 - t * t;
  return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}

std::vector<std::pair<std::size_t, double>> Covering::partition_at(cplx z) const {
  std::vector<std::pair<std::size_t, double>> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double b = bump(std::abs(z - centers[i]) / (r * center_rho[i]));
    if (b > 0.0) {
      out.emplace_back(i, b);
      sum += b;
    }
  }
  if (sum == 0.0) throw BoxError("point not covered by the partition of unity");
  for (auto& e : out) e.second /= sum;
  return out;
}

Covering build_covering(const GridField& rho_field, double r, double separation) {
  if (!(r >= 0.5 && r <= 2.0)) throw DomainError("covering multiplier r must lie in [0.5, 2]");
  if (!(separation > 0.0 && separation < 1.0)) throw DomainError("covering separation must lie in (0, 1)");
  const Grid& g = rho_field.grid();
  Covering cov;
  cov.grid = g;
  cov.r = r;
  cov.separation = separation;
  cov.rho_field = rho_field;

  double rho_max = 0.0;
  for (double v : rho_field.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("covering needs a positive finite rho field");
    rho_max = std::max(rho_max, v);
  }
  std::vector<std::size_t> order(g.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::norm(g.node(a)) < std::norm(g.node(b));
  });

  const double cell = separation * r * rho_max;
  auto key = [&](cplx z) {
    const auto bx = static_cast<long long>(std::floor(z.real() / cell));
    const auto by = static_cast<long long>(std::floor(z.imag() / cell));
    return std::pair<long long, long long>{bx, by};
  };
  auto hash = [](long long bx, long long by) { return (bx * 73856093LL) ^ (by * 19349663LL); };
  std::unordered_map<long long, std::vector<std::size_t>> buckets;
  for (std::size_t k : order) {
    const cplx z = g.node(k);
    const double rz = rho_field[k];
    const auto [bx, by] = key(z);
    bool free = true;
    for (long long dx = -1; dx <= 1 && free; ++dx) {
      for (long long dy = -1; dy <= 1 && free; ++dy) {
        auto it = buckets.find(hash(bx + dx, by + dy));
        if (it == buckets.end()) continue;
        for (std::size_t c : it->second) {
          const double lim = separation * r * std::min(rz, cov.center_rho[c]);
          if (std::abs(z - cov.centers[c]) < lim) {
            free = false;
            break;
          }
        }
      }
    }
    if (!free) continue;
    buckets[hash(bx, by)].push_back(cov.centers.size());
    cov.centers.push_back(z);
    cov.center_rho.push_back(rz);
  }

  const std::size_t n = g.n();
  const double h = g.spacing();
  const double L = g.half_width();
  std::vector<double> sum(g.size(), 0.0);
  std::vector<cplx> dsum(g.size(), 0.0);
  std::vector<std::size_t> count(g.size(), 0);
  cov.partition.resize(cov.centers.size());
  for (std::size_t c = 0; c < cov.centers.size(); ++c) {
    const cplx zc = cov.centers[c];
    const double R = r * cov.center_rho[c];
    const auto lo_i = static_cast<long>(std::ceil((zc.real() - R + L) / h));
    const auto hi_i = static_cast<long>(std::floor((zc.real() + R + L) / h));
    const auto lo_j = static_cast<long>(std::ceil((zc.imag() - R + L) / h));
    const auto hi_j = static_cast<long>(std::floor((zc.imag() + R + L) / h));
    for (long j = std::max(0L, lo_j); j <= std::min<long>(hi_j, static_cast<long>(n) - 1); ++j) {
      for (long i = std::max(0L, lo_i); i <= std::min<long>(hi_i, static_cast<long>(n) - 1); ++i) {
        const std::size_t k = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        const cplx d = g.node(k) - zc;
        const double dist = std::abs(d);
        const double t = dist / R;
        const double b = bump(t);
        if (b <= 0.0) continue;
        cplx db = 0.0;
        if (dist > 0.0) {
          const double a = 1.0 - t * t;
          db = b * (-2.0 * t / (a * a)) * d / (2.0 * dist * R);
        }
        cov.partition[c].push_back({k, b, db});
        sum[k] += b;
        dsum[k] += db;
        ++count[k];
      }
    }
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(sum[k] > 0.0)) {
      throw DomainError("covering leaves the node at " + std::to_string(g.node(k).real()) + "," +
                        std::to_string(g.node(k).imag()) + " uncovered");
    }
    cov.max_overlap = std::max(cov.max_overlap, count[k]);
  }
  for (auto& entries : cov.partition) {
    for (auto& e : entries) {
      const double b = e.chi;
      e.chi = b / sum[e.node];
      e.dbar_chi = e.dbar_chi / sum[e.node] - b * dsum[e.node] / (sum[e.node] * sum[e.node]);
      if (e.chi > 0.0) {
        const double rk = rho_field[e.node];
        cov.gradient_constant = std::max(cov.gradient_constant, std::norm(e.dbar_chi) * rk * rk / e.chi);
      }
    }
  }
  return cov;
}

GridField sample_phi(const bergman::KernelModel& model, const Grid& grid) {
  return GridField::sample(grid, Meaning::weight, [&](cplx z) { return model.phi(z); });
}

void certify_covering(Covering& covering, const bergman::KernelModel& model, double threshold) {
  const GridField phi = sample_phi(model, covering.grid);
  covering.certificates.assign(covering.centers.size(), 0.0);
  for (std::size_t c = 0; c < covering.centers.size(); ++c) {
    const NormalizedKernel k(model, covering.centers[c]);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& e : covering.partition[c]) {
      const cplx z = covering.grid.node(e.node);
      worst = std::min(worst, std::abs(k(z)) * std::exp(-phi[e.node]) * covering.center_rho[c]);
    }
    covering.certificates[c] = worst;
    if (!(worst > threshold)) {
      covering.certificates.clear();
      throw CertificateError("normalized kernel at centre " + std::to_string(covering.centers[c].real()) +
                             "," + std::to_string(covering.centers[c].imag()) +
                             " nearly vanishes on its support (min " + std::to_string(worst) +
                             "); use a smaller covering multiplier r");
    }
  }
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

std::string_view to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::cauchy: return "cauchy";
    case SolveMethod::covering_G: return "covering_G";
    case SolveMethod::canonical: return "canonical";
  }
  return "cauchy";
}

std::pair<ComplexField, SolveReport> apply_G(Covering& covering, const bergman::KernelModel& model,
                                             const ComplexField& f) {
  const Grid& g = covering.grid;
  if (!(f.grid() == g)) throw DomainError("apply_G: right side grid does not match the covering");
  if (!covering.certified()) certify_covering(covering, model);
  const GridField phi = sample_phi(model, g);
  const CauchyOperator op(g);
  ComplexField u(g, Meaning::function);
  SolveReport rep;
  rep.method = SolveMethod::covering_G;
  rep.grid_nodes = g.n();
  std::vector<cplx> kz(g.size());
  for (std::size_t c = 0; c < covering.centers.size(); ++c) {
    const auto& entries = covering.partition[c];
    bool active = false;
    for (const auto& e : entries) {
      if (f[e.node] != 0.0) {
        active = true;
        break;
      }
    }
    if (!active) continue;
    ++rep.active_centers;
    const NormalizedKernel k(model, covering.centers[c]);
    for (std::size_t m = 0; m < g.size(); ++m) kz[m] = k(g.node(m));
    ComplexField gi(g, Meaning::function);
    for (const auto& e : entries) gi[e.node] = f[e.node] * e.chi / kz[e.node];
    const auto ci = op.apply(gi);
    for (std::size_t m = 0; m < g.size(); ++m) u[m] += kz[m] * ci[m];
  }
  rep.residual = dbar_residual(u, f, phi);
  rep.norm_u = std::sqrt(weighted_sq_norm(u, phi));
  return {std::move(u), rep};
}

cplx G_kernel(const Covering& covering, const bergman::KernelModel& model, cplx z, cplx zeta) {
  if (z == zeta) throw DomainError("G kernel is singular on the diagonal");
  cplx acc = 0.0;
  const double pz = model.phi(z);
  const double pzeta = model.phi(zeta);
  for (const auto& [c, chi] : covering.partition_at(zeta)) {
    const NormalizedKernel k(model, covering.centers[c]);
    const cplx ratio = (k(z) * std::exp(-pz)) / (k(zeta) * std::exp(-pzeta));
    acc += ratio * chi / (zeta - z);
  }
  return -acc / kPi;
}

double orthogonality_defect(const bergman::KernelModel& model, const ComplexField& u) {
  const Grid& g = model.quad_grid();
  if (!(u.grid() == g)) throw DomainError("orthogonality defect: grid mismatch");
  const GridField& phi = model.quad_phi();
  const std::size_t kmax = model.degree() >= 5 ? model.degree() - 5 : 0;
  std::vector<cplx> inner(kmax + 1, 0.0);
  std::vector<double> norms(kmax + 1, 0.0);
  double unorm = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double w = std::exp(-2.0 * phi[m]);
    unorm += std::norm(u[m]) * w;
    const cplx zc = std::conj(g.node(m));
    cplx p = 1.0;
    for (std::size_t k = 0; k <= kmax; ++k) {
      inner[k] += u[m] * p * w;
      norms[k] += std::norm(p) * w;
      p *= zc;
    }
  }
  if (unorm == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    worst = std::max(worst, std::abs(inner[k]) / std::sqrt(unorm * norms[k]));
  }
  return worst;
}

std::pair<ComplexField, SolveReport> canonical_solve(const bergman::KernelModel& model,
                                                     const ComplexField& u0, const ComplexField* f) {
  if (model.mode() != bergman::QuadMode::tensor) throw DomainError("canonical solve needs a tensor-mode model");
  const Grid& g = model.quad_grid();
  if (!(u0.grid() == g)) throw DomainError("canonical solve: u0 grid does not match the model grid");
  const GridField& phi = model.quad_phi();
  const auto pu0 = bergman::project_field(model, u0);
  ComplexField u(g, Meaning::function);
  for (std::size_t m = 0; m < g.size(); ++m) u[m] = u0[m] - pu0[m];
  SolveReport rep;
  rep.method = SolveMethod::canonical;
  rep.grid_nodes = g.n();
  rep.norm_u = std::sqrt(weighted_sq_norm(u, phi));
  rep.norm_u0 = std::sqrt(weighted_sq_norm(u0, phi));
  rep.norm_projection = std::sqrt(weighted_sq_norm(pu0, phi));
  rep.orthogonality_defect = orthogonality_defect(model, u);
  if (f != nullptr) rep.residual = dbar_residual(u, *f, phi);
  return {std::move(u), rep};
}

// ---------------------------------------------------------------------------
// Kernel estimates
// ---------------------------------------------------------------------------

KernelEstimateReport kernel_estimate_check(Covering& covering, const bergman::KernelModel& model,
                                           const weights::RhoMap& rho_map,
                                           const metric::MetricGraph& graph,
                                           const std::vector<cplx>& probe_points,
                                           const KernelEstimateOptions& options,
                                           const bergman::KernelModel* canonical_model) {
  if (probe_points.empty()) throw DomainError("kernel estimate check needs probe points");
  if (!covering.certified()) certify_covering(covering, model);
  const Grid& gg = graph.grid();
  const double e = std::exp(1.0);
  KernelEstimateReport rep;

  // Entrywise G.
  std::vector<double> nx, ny;
  double near_c = 0.0;
  std::vector<bergman::DecaySample> far;
  double far_max = 0.0;
  for (const cplx zeta : probe_points) {
    const double r0 = rho_map(zeta);
    const auto dist = graph.distances_from_node(gg.snap(zeta));
    for (std::size_t a = 0; a < options.angles; ++a) {
      const cplx dir = std::polar(1.0, 2.0 * kPi * static_cast<double>(a) / options.angles + 0.1);
      for (double s : log_space(options.near_min, options.near_max, options.radii)) {
        const cplx z = zeta + s * r0 * dir;
        const double v = std::abs(G_kernel(covering, model, z, zeta));
        nx.push_back(std::log(s * r0));
        ny.push_back(std::log(v));
        near_c = std::max(near_c, v * s * r0);
      }
      for (double s : log_space(options.far_min, options.far_max, options.radii)) {
        const cplx z = zeta + s * r0 * dir;
        if (!gg.contains(z) || gg.edge_distance(z) < 2.0 * gg.spacing() ||
            !covering.grid.contains(z) || covering.grid.edge_distance(z) < 2.0 * covering.grid.spacing()) {
          continue;
        }
        const double v = std::abs(G_kernel(covering, model, z, zeta)) * rho_map(z);
        far.push_back({dist[gg.snap(z)], v});
        far_max = std::max(far_max, v);
      }
    }
  }
  if (nx.size() < 3) throw DomainError("kernel estimate check: too few near-regime probes");
  rep.G.near_slope = lsq_slope(nx, ny);
  rep.G.near_samples = nx.size();
  rep.G.near_constant = near_c;
  {
    std::vector<bergman::DecaySample> fit, hold;
    for (std::size_t k = 0; k < far.size(); ++k) (k % 2 == 0 ? fit : hold).push_back(far[k]);
    rep.G.far = bergman::envelope_fit(fit, hold, e * std::max(near_c, far_max), bergman::DecayModel::metric);
  }

  if (options.canonical_sources == 0 || canonical_model == nullptr) return rep;
  const Grid& g = canonical_model->quad_grid();
  const GridField& phi = canonical_model->quad_phi();
  const double sigma = 1.5 * g.spacing();
  rep.mollifier_scale = sigma;
  rep.has_canonical = true;
  const CauchyOperator op(g);
  std::vector<double> cx, cy;
  double c_near = 0.0, c_far_max = 0.0;
  std::vector<bergman::DecaySample> cfar;
  const std::size_t sources = std::min(options.canonical_sources, probe_points.size());
  for (std::size_t s = 0; s < sources; ++s) {
    const cplx zeta = probe_points[s];
    const double r0 = rho_map(zeta);
    auto f = ComplexField::sample(g, Meaning::function, [&](cplx z) {
      return cplx{std::exp(-std::norm(z - zeta) / (2.0 * sigma * sigma)), 0.0};
    });
    double mass = 0.0;
    for (const cplx& v : f.values()) mass += v.real();
    mass *= g.cell_area();
    for (cplx& v : f.values()) v /= mass;
    const auto u0 = op.apply(f);
    const auto [u, srep] = canonical_solve(*canonical_model, u0);
    const double pz0 = canonical_model->phi(zeta);
    const auto dist = graph.distances_from_node(gg.snap(zeta));
    const std::size_t stride = std::max<std::size_t>(1, g.n() / 96);
    for (std::size_t j = 2; j + 2 < g.n(); j += 1) {
      for (std::size_t i = 2; i + 2 < g.n(); i += 1) {
        const cplx z = g.node(i, j);
        const double d = std::abs(z - zeta);
        const double val = std::abs(u(i, j)) * std::exp(pz0 - phi(i, j));
        if (d >= 4.0 * sigma && d <= options.near_max * r0) {
          cx.push_back(std::log(d));
          cy.push_back(std::log(val));
          c_near = std::max(c_near, val * d);
        } else if (d >= options.far_min * r0 && d <= options.far_max * r0 && i % stride == 0 &&
                   j % stride == 0 && gg.contains(z) && gg.edge_distance(z) >= 2.0 * gg.spacing()) {
          const double v = val * rho_map(z);
          cfar.push_back({dist[gg.snap(z)], v});
          c_far_max = std::max(c_far_max, v);
        }
      }
    }
  }
  rep.canonical.near_slope = cx.size() >= 3 ? lsq_slope(cx, cy) : std::numeric_limits<double>::quiet_NaN();
  rep.canonical.near_samples = cx.size();
  rep.canonical.near_constant = c_near;
  std::vector<bergman::DecaySample> fit, hold;
  for (std::size_t k = 0; k < cfar.size(); ++k) (k % 2 == 0 ? fit : hold).push_back(cfar[k]);
  rep.canonical.far =
      bergman::envelope_fit(fit, hold, e * std::max(c_near, c_far_max), bergman::DecayModel::metric);
  return rep;
}

// ---------------------------------------------------------------------------
// Compactness probe
// ---------------------------------------------------------------------------

std::string_view to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::non_compact_signature: return "non-compact-signature";
    case ProbeVerdict::compact_signature: return "compact-signature";
    case ProbeVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ProbeReport compactness_probe(const bergman::KernelModel& model, const weights::RhoMap& rho_map,
                              const std::vector<cplx>& centers, const ProbeOptions& options) {
  if (centers.empty()) throw DomainError("compactness probe needs centres");
  std::vector<double> radii = options.concentration_radii;
  std::sort(radii.begin(), radii.end());
  if (radii.empty() || radii.front() <= 0.0 || radii.back() >= options.window) {
    throw DomainError("concentration radii must lie in (0, window)");
  }
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), radii.begin(), radii.end());
  edges.push_back(options.window);
  const std::size_t per_segment = std::max<std::size_t>(8, options.radial_nodes / (edges.size() - 1));
  const std::size_t M = options.angular_nodes;
  const auto& log_c = model.log_gram_diagonal();

  ProbeReport rep;
  for (const cplx zj : centers) {
    if (std::abs(zj) > model.validated_radius()) {
      throw DomainError("probe centre outside the validated disk of the model");
    }
    ProbeRow row;
    row.zj = zj;
    row.abs_zj = std::abs(zj);
    row.rho_zj = rho_map(zj);
    const double diag = model.weighted_abs(zj, zj);
    const double scale = 1.0 / std::sqrt(diag);
    double knorm = 0.0, unorm = 0.0;
    std::vector<double> segment_mass;
    std::vector<cplx> inner(3, 0.0);
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      const auto rule = quad::gauss_legendre(per_segment, edges[s] * row.rho_zj, edges[s + 1] * row.rho_zj);
      double seg = 0.0;
      for (std::size_t a = 0; a < M; ++a) {
        const cplx dir = std::polar(1.0, 2.0 * kPi * (static_cast<double>(a) + 0.5) / M);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
          const double t = rule.nodes[k];
          const cplx w = zj + t * dir;
          const double wt = rule.weights[k] * t * 2.0 * kPi / M;
          const cplx kw = model.weighted(w, zj) * scale;  // k_{z_j}(w) e^{-phi(w)}
          const cplx uw = std::conj(w - zj) * kw;
          knorm += std::norm(kw) * wt;
          seg += std::norm(uw) * wt;
          const double ew = std::exp(-model.phi(w));
          cplx p = ew;
          for (std::size_t m = 0; m < inner.size(); ++m) {
            inner[m] += uw * std::conj(p) * wt;
            p *= w;
          }
        }
      }
      segment_mass.push_back(seg);
      unorm += seg;
    }
    row.kernel_norm = std::sqrt(knorm);
    if (std::abs(row.kernel_norm - 1.0) > options.kernel_tolerance) {
      throw CertificateError("normalized kernel at |z_j| = " + std::to_string(row.abs_zj) +
                             " has norm " + std::to_string(row.kernel_norm) +
                             "; raise the degree or the window");
    }
    row.norm_uj = std::sqrt(unorm);
    row.ratio = row.norm_uj / row.rho_zj;
    for (std::size_t m = 0; m < inner.size() && m < log_c.size(); ++m) {
      row.orthogonality = std::max(row.orthogonality,
                                   std::abs(inner[m]) / (row.norm_uj * std::exp(0.5 * log_c[m])));
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < radii.size(); ++s) {
      acc += segment_mass[s];
      row.concentration.push_back(acc / unorm);
    }
    rep.rows.push_back(row);
  }
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const ProbeRow& a, const ProbeRow& b) { return a.abs_zj < b.abs_zj; });
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool decreasing = true;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    lo = std::min(lo, rep.rows[k].ratio);
    hi = std::max(hi, rep.rows[k].ratio);
    if (k > 0 && !(rep.rows[k].norm_uj < rep.rows[k - 1].norm_uj)) decreasing = false;
  }
  rep.spread = hi / lo;
  rep.decay = rep.rows.back().norm_uj / rep.rows.front().norm_uj;
  if (rep.rows.size() > 1 && decreasing && rep.decay <= options.decay_max) {
    rep.verdict = ProbeVerdict::compact_signature;
  } else if (lo > 0.0 && rep.spread <= options.spread_max) {
    rep.verdict = ProbeVerdict::non_compact_signature;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// L^p bounds
// ---------------------------------------------------------------------------

std::vector<LpBound> minimal_solution_bound_check(const bergman::KernelModel& model,
                                                  const weights::RhoMap& rho_map,
                                                  const std::vector<ComplexField>& f_samples,
                                                  const std::vector<double>& ps) {
  const Grid& g = model.quad_grid();
  const GridField& phi = model.quad_phi();
  for (double p : ps) {
    if (!(p == 1.0 || p == 2.0 || std::isinf(p))) throw DomainError("L^p check supports p in {1, 2, inf}");
  }
  const GridField rho = rho_map.sample(g);
  const CauchyOperator op(g);
  auto lp = [&](const std::vector<double>& v, double p) {
    if (std::isinf(p)) return *std::max_element(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v) acc += std::pow(x, p);
    return std::pow(acc * g.cell_area(), 1.0 / p);
  };
  std::vector<LpBound> out;
  for (double p : ps) out.push_back({p, {}, 0.0, 0.0});
  for (const auto& f : f_samples) {
    if (!(f.grid() == g)) throw DomainError("L^p check: sample grid does not match the model grid");
    std::vector<double> fw(g.size()), uw(g.size());
    double fmax = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      fw[m] = std::abs(f[m]) * std::exp(-phi[m]) * rho[m];
      fmax = std::max(fmax, fw[m]);
    }
    if (fmax == 0.0) continue;
    const auto [u, rep] = canonical_solve(model, op.apply(f));
    for (std::size_t m = 0; m < g.size(); ++m) uw[m] = std::abs(u[m]) * std::exp(-phi[m]);
    for (auto& b : out) b.ratios.push_back(lp(uw, b.p) / lp(fw, b.p));
  }
  for (auto& b : out) {
    if (b.ratios.empty()) continue;
    b.max_ratio = *std::max_element(b.ratios.begin(), b.ratios.end());
    b.min_ratio = *std::min_element(b.ratios.begin(), b.ratios.end());
  }
  return out;
}

}  // namespace fock::dbar
