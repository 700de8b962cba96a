#include "fock/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/roots.hpp>

#include "fock/quadrature.hpp"

namespace fock::weights {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_point(cplx z) {
  std::ostringstream os;
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

double bump_value(const Bump& b, cplx z) {
  const double s2 = std::norm(z - b.center);
  return b.height * std::exp(-s2 / (b.width * b.width));
}

double bump_laplacian(const Bump& b, cplx z) {
  const double w2 = b.width * b.width;
  const double s2 = std::norm(z - b.center);
  return b.height * std::exp(-s2 / w2) * (4.0 * s2 / (w2 * w2) - 4.0 / w2);
}

double power_value(const RadialPower& p, double t) { return p.coeff * std::pow(t, p.alpha); }

double power_laplacian(const RadialPower& p, double t) {
  return p.coeff * p.alpha * p.alpha * std::pow(t, p.alpha - 2.0);
}

// Mass of the power density over D(0, a).
double power_mass(const RadialPower& p, double a) {
  return 2.0 * kPi * p.coeff * p.alpha * std::pow(a, p.alpha);
}

bool all_bumps_centered(const PerturbedRadial& p) {
  return std::all_of(p.bumps.begin(), p.bumps.end(),
                     [](const Bump& b) { return b.center == cplx{0.0, 0.0}; });
}

// Laplacian density sampled at a node. Near an integrable singularity at the
// origin (alpha < 2) the node value is replaced by the mean over the disk of
// the same area as one cell.
double density_at_node(const ExactProfile& density, cplx z, double h) {
  const double v = density.at(z);
  if (std::isfinite(v)) return v;
  if (density.radial_mass) {
    const double a = h / std::sqrt(kPi);
    return density.radial_mass(a) / (kPi * a * a);
  }
  return density.at(z + cplx{0.25 * h, 0.0});
}

void check_box(const Grid& grid, cplx z, double r) {
  if (!grid.contains_disk(z, r)) {
    const double need = std::max(std::abs(z.real()), std::abs(z.imag())) + r;
    std::ostringstream os;
    os << "disk D(" << z.real() << "+" << z.imag() << "i, " << r << ") leaves the box [-"
       << grid.half_width() << ", " << grid.half_width() << "]^2; a half-width of at least "
       << need << " is required";
    throw BoxError(os.str());
  }
}

double radial_mass_exact(const ExactProfile& density, double s, double r) {
  if (density.radial_mass) {
    return quad::radial_disk_integral(density.radial, s, r, density.radial_mass, 64);
  }
  return quad::radial_disk_integral(density.radial, s, r, 64);
}

double exact_mass(const ExactProfile& density, cplx z, double r) {
  if (r <= 0.0) return 0.0;
  if (density.is_radial()) return radial_mass_exact(density, std::abs(z), r);
  return quad::disk_integral(density.at, z, r, 32, 64);
}

// Root of mass(r) = 1 given a monotone mass function; `limit` caps the radius.
double solve_unit_mass(const std::function<double(double)>& mass, double start, double limit) {
  double lo = 0.0;
  double hi = std::min(start, limit);
  double f_hi = mass(hi) - 1.0;
  while (f_hi < 0.0) {
    if (hi >= limit) {
      throw BoxError("the measure never reaches mass 1 inside the box; enlarge the box");
    }
    lo = hi;
    hi = std::min(2.0 * hi, limit);
    f_hi = mass(hi) - 1.0;
  }
  if (f_hi == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10; };
  auto [a, b] = boost::math::tools::toms748_solve([&](double r) { return mass(r) - 1.0; }, lo,
                                                  hi, -1.0, f_hi, tol, max_iter);
  return 0.5 * (a + b);
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

}  // namespace

// ---------------------------------------------------------------------------

void WeightSpec::validate() const {
  auto check_power = [](const RadialPower& p) {
    if (!(p.alpha > 0.0)) throw DomainError("weight exponent alpha must be positive");
    if (!(p.coeff > 0.0)) throw DomainError("weight coefficient must be positive");
  };
  std::visit(overloaded{
                 [&](const RadialPower& p) { check_power(p); },
                 [&](const PerturbedRadial& p) {
                   check_power(p.base);
                   for (const auto& b : p.bumps) {
                     if (!(b.width > 0.0)) throw DomainError("bump width must be positive");
                   }
                 },
                 [&](const GridSampled& g) {
                   if (!g.field) throw DomainError("grid-sampled weight without a field");
                 },
             },
             family);
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const RadialPower& p) {
                   os << "radial_power(alpha=" << p.alpha << ", coeff=" << p.coeff << ")";
                 },
                 [&](const PerturbedRadial& p) {
                   os << "perturbed_radial(alpha=" << p.base.alpha << ", coeff=" << p.base.coeff
                      << ", bumps=" << p.bumps.size() << ")";
                 },
                 [&](const GridSampled& g) {
                   os << "grid_sampled(L=" << g.field->grid().half_width()
                      << ", n=" << g.field->grid().n() << ")";
                 },
             },
             family);
  return os.str();
}

std::shared_ptr<const ExactProfile> weight_profile(const WeightSpec& spec) {
  spec.validate();
  return std::visit(
      overloaded{
          [](const RadialPower& p) -> std::shared_ptr<const ExactProfile> {
            auto density = std::make_shared<ExactProfile>();
            density->at = [p](cplx z) { return power_laplacian(p, std::abs(z)); };
            density->radial = [p](double t) { return power_laplacian(p, t); };
            density->radial_mass = [p](double a) { return power_mass(p, a); };
            density->description = "laplacian";
            auto phi = std::make_shared<ExactProfile>();
            phi->at = [p](cplx z) { return power_value(p, std::abs(z)); };
            phi->radial = [p](double t) { return power_value(p, t); };
            phi->laplacian = density;
            phi->description = "weight";
            return phi;
          },
          [](const PerturbedRadial& p) -> std::shared_ptr<const ExactProfile> {
            auto value = [p](cplx z) {
              double v = power_value(p.base, std::abs(z));
              for (const auto& b : p.bumps) v += bump_value(b, z);
              return v;
            };
            auto lap = [p](cplx z) {
              double v = power_laplacian(p.base, std::abs(z));
              for (const auto& b : p.bumps) v += bump_laplacian(b, z);
              return v;
            };
            auto density = std::make_shared<ExactProfile>();
            density->at = lap;
            auto phi = std::make_shared<ExactProfile>();
            phi->at = value;
            if (all_bumps_centered(p)) {
              density->radial = [lap](double t) { return lap(cplx{t, 0.0}); };
              density->radial_mass = [p](double a) {
                double m = power_mass(p.base, a);
                for (const auto& b : p.bumps) {
                  const double w2 = b.width * b.width;
                  // Flux of the bump gradient through the circle of radius a.
                  m += 2.0 * kPi * a * b.height * (-2.0 * a / w2) * std::exp(-a * a / w2);
                }
                return m;
              };
              phi->radial = [value](double t) { return value(cplx{t, 0.0}); };
            }
            density->description = "laplacian";
            phi->laplacian = density;
            phi->description = "weight";
            return phi;
          },
          [](const GridSampled&) -> std::shared_ptr<const ExactProfile> { return nullptr; },
      },
      spec.family);
}

double evaluate_phi(const WeightSpec& spec, cplx z) {
  if (const auto* g = std::get_if<GridSampled>(&spec.family)) {
    spec.validate();
    return g->field->interpolate(z);
  }
  return weight_profile(spec)->at(z);
}

GridField stencil_laplacian(const GridField& f) {
  const Grid& g = f.grid();
  const std::size_t n = g.n();
  const double inv_h2 = 1.0 / g.cell_area();
  GridField out(g, Meaning::density);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      out(i, j) = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * inv_h2;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || j == 0 || i + 1 == n || j + 1 == n) {
        out(i, j) = out(std::clamp<std::size_t>(i, 1, n - 2), std::clamp<std::size_t>(j, 1, n - 2));
      }
    }
  }
  return out;
}

GridField laplacian(const GridField& phi) {
  if (phi.exact() && phi.exact()->laplacian) {
    const Grid& g = phi.grid();
    const auto& density = phi.exact()->laplacian;
    GridField out(g, Meaning::density);
    for (std::size_t k = 0; k < g.size(); ++k) {
      out[k] = density_at_node(*density, g.node(k), g.spacing());
    }
    out.set_exact(density);
    return out;
  }
  return stencil_laplacian(phi);
}

GridField sample_weight(const WeightSpec& spec, double L, std::size_t n) {
  spec.validate();
  if (n < 64) throw DomainError("weight grids need at least 64 nodes per side");
  const Grid grid(L, n);
  if (const auto* gs = std::get_if<GridSampled>(&spec.family)) {
    const GridField& src = *gs->field;
    GridField out(grid, Meaning::weight);
    if (src.grid() == grid) {
      out.values() = src.values();
    } else {
      for (std::size_t k = 0; k < grid.size(); ++k) out[k] = src.interpolate(grid.node(k));
    }
    const GridField lap = stencil_laplacian(out);
    double scale = 0.0;
    for (double v : lap.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (lap[k] < -1e-6 * scale) {
        throw SubharmonicityError("sampled weight is not subharmonic near " +
                                  format_point(grid.node(k)) + " (discrete Laplacian " +
                                  std::to_string(lap[k]) + ")");
      }
    }
    return out;
  }
  auto profile = weight_profile(spec);
  GridField out = GridField::sample(grid, Meaning::weight, profile->at);
  out.set_exact(profile);
  if (std::holds_alternative<PerturbedRadial>(spec.family)) {
    const GridField lap = laplacian(out);
    double scale = 0.0;
    for (double v : lap.values()) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * (1.0 + scale);
    std::size_t worst = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (lap[k] < lap[worst]) worst = k;
    }
    if (lap[worst] < -tol) {
      throw SubharmonicityError("Laplacian of the weight is negative at " +
                                format_point(grid.node(worst)) + " (value " +
                                std::to_string(lap[worst]) + ")");
    }
  }
  return out;
}

double cell_disk_integral(const GridField& f, cplx z, double r) {
  if (r <= 0.0) return 0.0;
  const Grid& g = f.grid();
  const double h = g.spacing();
  const double L = g.half_width();
  const auto last = static_cast<double>(g.n() - 1);
  auto first_index = [&](double t) {
    return static_cast<std::size_t>(std::clamp(std::floor((t + L) / h - 0.5), 0.0, last));
  };
  auto last_index = [&](double t) {
    return static_cast<std::size_t>(std::clamp(std::ceil((t + L) / h + 0.5), 0.0, last));
  };
  const std::size_t i0 = first_index(z.real() - r), i1 = last_index(z.real() + r);
  const std::size_t j0 = first_index(z.imag() - r), j1 = last_index(z.imag() + r);
  const double r2 = r * r;
  double acc = 0.0;
  for (std::size_t j = j0; j <= j1; ++j) {
    for (std::size_t i = i0; i <= i1; ++i) {
      const cplx c = g.node(i, j);
      const double x0 = c.real() - 0.5 * h, x1 = c.real() + 0.5 * h;
      const double y0 = c.imag() - 0.5 * h, y1 = c.imag() + 0.5 * h;
      const double nx = std::clamp(z.real(), x0, x1) - z.real();
      const double ny = std::clamp(z.imag(), y0, y1) - z.imag();
      if (nx * nx + ny * ny >= r2) continue;
      const double fx = std::max(std::abs(x0 - z.real()), std::abs(x1 - z.real()));
      const double fy = std::max(std::abs(y0 - z.imag()), std::abs(y1 - z.imag()));
      const double area =
          fx * fx + fy * fy <= r2 ? h * h : quad::disk_rect_area(z, r, x0, x1, y0, y1);
      acc += area * f(i, j);
    }
  }
  return acc;
}

double mass_in_disk(const GridField& mu, cplx z, double r) {
  if (!(r >= 0.0)) throw DomainError("disk radius must be non-negative");
  if (r == 0.0) return 0.0;
  check_box(mu.grid(), z, r);
  if (mu.exact()) return exact_mass(*mu.exact(), z, r);
  return cell_disk_integral(mu, z, r);
}

double rho(const GridField& mu, cplx z) {
  const Grid& g = mu.grid();
  if (!g.contains(z)) throw BoxError("point " + format_point(z) + " lies outside the box");
  auto mass = [&](double r) {
    return mu.exact() ? exact_mass(*mu.exact(), z, r) : cell_disk_integral(mu, z, r);
  };
  return solve_unit_mass(mass, g.spacing(), g.edge_distance(z));
}

RhoMap::RhoMap(const GridField& mu, std::size_t table_nodes) : mu_(mu) {
  const Grid& g = mu.grid();
  if (mu.exact() && mu.exact()->is_radial()) {
    if (table_nodes < 8) throw DomainError("rho table needs at least 8 nodes");
    radial_ = true;
    const auto density = mu.exact();
    const double t_max = std::sqrt(2.0) * g.half_width();
    t_step_ = t_max / static_cast<double>(table_nodes - 1);
    table_.resize(table_nodes);
    double guess = g.spacing();
    for (std::size_t k = 0; k < table_nodes; ++k) {
      const double t = t_step_ * static_cast<double>(k);
      table_[k] = solve_unit_mass([&](double r) { return radial_mass_exact(*density, t, r); },
                                  guess, std::numeric_limits<double>::infinity());
      guess = table_[k];
      max_rho_ = std::max(max_rho_, table_[k]);
    }
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        table_.begin(), table_.end(), 0.0, t_step_);
    spline_ = [spline](double t) { return (*spline)(t); };
    return;
  }
  const std::size_t nc = mu.exact() ? 33 : std::min<std::size_t>(g.n(), 65);
  const Grid cg(g.half_width(), nc);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  coarse_ = GridField(cg, Meaning::rho, nan);
  std::vector<std::size_t> valid;
  for (std::size_t k = 0; k < cg.size(); ++k) {
    try {
      coarse_[k] = rho(mu, cg.node(k));
      valid.push_back(k);
      max_rho_ = std::max(max_rho_, coarse_[k]);
    } catch (const BoxError&) {
    }
  }
  if (valid.empty()) {
    throw BoxError("the measure never reaches mass 1 inside the box; enlarge the box");
  }
  // Nodes whose unit-mass disk leaves the box borrow the nearest solved value.
  for (std::size_t k = 0; k < cg.size(); ++k) {
    if (!std::isnan(coarse_[k])) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t v : valid) {
      const double d = std::norm(cg.node(k) - cg.node(v));
      if (d < best) {
        best = d;
        coarse_[k] = coarse_[v];
      }
    }
  }
}

double RhoMap::operator()(cplx z) const {
  if (radial_) {
    const double t = std::abs(z);
    if (t > t_step_ * static_cast<double>(table_.size() - 1) * (1.0 + 1e-12)) {
      throw BoxError("point " + format_point(z) + " lies outside the rho table");
    }
    return spline_(t);
  }
  return coarse_.interpolate(z);
}

GridField RhoMap::sample(const Grid& grid) const {
  return GridField::sample(grid, Meaning::rho, [this](cplx z) { return (*this)(z); });
}

std::vector<bool> interior_mask(const Grid& grid, double ring) {
  std::vector<bool> mask(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) mask[k] = grid.edge_distance(grid.node(k)) > ring;
  return mask;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DoublingVerdict v) {
  return v == DoublingVerdict::doubling ? "doubling" : "suspect_non_doubling";
}

DoublingReport doubling_report(const GridField& mu, const std::vector<double>& radii,
                               const std::vector<cplx>& centers, const DoublingOptions& options) {
  if (radii.empty() || centers.empty()) throw DomainError("doubling report needs radii and centres");
  struct Disk {
    cplx z;
    double r;
    double m;
  };
  DoublingReport rep;
  std::vector<Disk> disks;
  std::vector<double> max_ratio(radii.size(), 0.0);
  double worst = 0.0;
  for (const cplx z : centers) {
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double r = radii[k];
      const double m1 = mass_in_disk(mu, z, r);
      const double m2 = mass_in_disk(mu, z, 2.0 * r);
      const double ratio = m1 > 0.0 ? m2 / m1 : std::numeric_limits<double>::infinity();
      rep.samples.push_back({z, r, ratio});
      max_ratio[k] = std::max(max_ratio[k], ratio);
      worst = std::max(worst, ratio);
      disks.push_back({z, r, m1});
      disks.push_back({z, 2.0 * r, m2});
    }
  }
  rep.constant_estimate = worst;
  if (radii.size() >= 2) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      x.push_back(std::log(radii[k]));
      y.push_back(max_ratio[k]);
    }
    rep.growth_trend = lsq_slope(x, y);
  }
  double sxy = 0.0, sxx = 0.0;
  for (const auto& a : disks) {
    for (const auto& b : disks) {
      if (!(a.r > b.r) || !(a.m > b.m) || !(b.m > 0.0)) continue;
      if (std::abs(a.z - b.z) >= a.r + b.r) continue;
      const double x = std::log(a.m / b.m);
      const double y = std::log(a.r / b.r);
      sxy += x * y;
      sxx += x * x;
    }
  }
  if (sxx > 0.0 && sxy > 0.0) {
    const double s = sxy / sxx;
    rep.gamma_estimate = std::min(s, 1.0 / s);
  }
  const bool suspect = !std::isfinite(worst) || worst > options.constant_cap ||
                       rep.growth_trend > options.growth_threshold;
  rep.verdict = suspect ? DoublingVerdict::suspect_non_doubling : DoublingVerdict::doubling;
  return rep;
}

PowerBoundReport power_bound_check(const GridField& mu, const RhoMap& rho_map,
                                   const std::vector<cplx>& centers,
                                   const std::vector<double>& radii, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  if (radii.size() < 2) throw DomainError("power bound check needs at least two radii");
  PowerBoundReport rep;
  rep.min_slope = std::numeric_limits<double>::infinity();
  rep.max_slope = -std::numeric_limits<double>::infinity();
  for (const cplx z : centers) {
    const double rz = rho_map(z);
    std::vector<double> x, y;
    for (double r : radii) {
      const double m = mass_in_disk(mu, z, r * rz);
      rep.constant = std::max({rep.constant, std::pow(r, gamma) / m, m / std::pow(r, 1.0 / gamma)});
      x.push_back(std::log(r));
      y.push_back(std::log(m));
    }
    const double slope = lsq_slope(x, y);
    rep.min_slope = std::min(rep.min_slope, slope);
    rep.max_slope = std::max(rep.max_slope, slope);
  }
  return rep;
}

double rho_near_constancy(const RhoMap& rho_map, const std::vector<cplx>& points) {
  std::vector<double> r(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) r[k] = rho_map(points[k]);
  double worst = 1.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      if (std::abs(points[a] - points[b]) < r[a] + r[b]) {
        worst = std::max({worst, r[a] / r[b], r[b] / r[a]});
      }
    }
  }
  return worst;
}

QuotientFit quotient_bound_fit(const RhoMap& rho_map, const std::vector<cplx>& points) {
  std::vector<double> r(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) r[k] = rho_map(points[k]);
  std::vector<double> x, y;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = 0; b < points.size(); ++b) {
      const double d = std::abs(points[a] - points[b]);
      if (a == b || d < r[a]) continue;
      x.push_back(std::log(d / r[b]));
      y.push_back(std::log(r[a] / r[b]));
    }
  }
  QuotientFit fit;
  fit.pairs = x.size();
  if (x.size() < 2) return fit;
  fit.slope = lsq_slope(x, y);
  fit.log_constant = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    fit.log_constant = std::max(fit.log_constant, y[k] - fit.slope * x[k]);
  }
  return fit;
}

double rho_growth_slope(const RhoMap& rho_map, double t_min, double t_max, std::size_t samples) {
  if (!(t_min > 0.0 && t_max > t_min) || samples < 2) {
    throw DomainError("rho growth slope needs 0 < t_min < t_max and two samples");
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = t_min * std::pow(t_max / t_min, static_cast<double>(k) / (samples - 1.0));
    x.push_back(std::log(t));
    y.push_back(std::log(rho_map(cplx{t, 0.0})));
  }
  return lsq_slope(x, y);
}

// ---------------------------------------------------------------------------

RegularizedWeight regularize_weight(const WeightSpec& spec, const Grid& grid) {
  const GridField phi = sample_weight(spec, grid.half_width(), grid.n());
  const RhoMap rho_map(laplacian(phi));
  return regularize_weight(phi, rho_map);
}

RegularizedWeight regularize_weight(const GridField& phi, const RhoMap& rho_map) {
  const Grid& g = phi.grid();
  RegularizedWeight out;
  out.ring = rho_map.max_rho();
  out.field = GridField(g, Meaning::regularized);
  const auto& ex = phi.exact();
  const GridField rho_f = rho_map.sample(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx z = g.node(k);
    const double r = rho_f[k];
    const double area = kPi * r * r;
    if (ex && ex->is_radial()) {
      out.field[k] = quad::radial_disk_integral(ex->radial, std::abs(z), r, 64) / area;
    } else if (ex) {
      out.field[k] = quad::disk_integral(ex->at, z, r, 24, 48) / area;
    } else if (g.contains_disk(z, r)) {
      out.field[k] = cell_disk_integral(phi, z, r) / area;
    } else {
      out.field[k] = phi[k];
    }
  }
  out.laplacian = stencil_laplacian(out.field);
  const auto mask = interior_mask(g, out.ring + g.spacing());
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!mask[k]) continue;
    out.sup_difference = std::max(out.sup_difference, std::abs(phi[k] - out.field[k]));
    const double scaled = out.laplacian[k] * rho_f[k] * rho_f[k];
    out.lower = std::min(out.lower, scaled);
    out.upper = std::max(out.upper, scaled);
  }
  return out;
}

// ---------------------------------------------------------------------------

double power_disk_average(double p, double s, double R) {
  if (!(p > -2.0)) throw DomainError("power average needs an exponent above -2");
  if (!(R > 0.0)) throw DomainError("power average needs a positive radius");
  auto g = [p](double t) { return std::pow(t, p); };
  auto inner = [p](double a) { return 2.0 * kPi * std::pow(a, p + 2.0) / (p + 2.0); };
  return quad::radial_disk_integral(g, s, R, inner, 64) / (kPi * R * R);
}

GadgetReport proof_gadget_suite(const WeightSpec& spec, cplx zeta, double epsilon,
                                const Grid& grid) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  const GridField phi = sample_weight(spec, grid.half_width(), grid.n());
  const RhoMap rho_map(laplacian(phi));
  const RegularizedWeight reg = regularize_weight(phi, rho_map);
  if (!grid.contains(zeta) || grid.edge_distance(zeta) < 2.0 * reg.ring) {
    throw DomainError("zeta " + format_point(zeta) +
                      " must lie at least twice the largest rho inside the box");
  }
  const double eps = epsilon;
  const double R = rho_map(zeta);
  const double Re = std::pow(R, eps);
  const GridField rho_f = rho_map.sample(grid);

  GadgetReport rep;
  rep.epsilon = eps;
  rep.zeta = zeta;
  rep.rho_zeta = R;
  rep.phi_eps = GridField(grid, Meaning::gadget);
  rep.psi = GridField(grid, Meaning::gadget);
  rep.big_phi = GridField(grid, Meaning::gadget);
  rep.varrho = GridField(grid, Meaning::gadget);
  GridField lap_psi(grid, Meaning::density);
  GridField dpsi(grid, Meaning::gadget);
  const double delta = 1e-4 * R;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double s = std::abs(grid.node(k) - zeta);
    rep.phi_eps[k] = std::pow(s / R, eps);
    rep.psi[k] = power_disk_average(eps, s, R) / Re;
    rep.big_phi[k] = 0.25 * eps * eps / (Re * Re) * power_disk_average(2.0 * eps - 2.0, s, R);
    lap_psi[k] = eps * eps / Re * power_disk_average(eps - 2.0, s, R);
    if (s > delta) {
      const double d =
          (power_disk_average(eps, s + delta, R) - power_disk_average(eps, s - delta, R)) /
          (2.0 * delta * Re);
      dpsi[k] = 0.5 * std::abs(d);
    }
    rep.varrho[k] = reg.field[k] - rep.psi[k];
  }
  rep.big_phi_at_zeta_scaled =
      0.25 * eps * eps / (Re * Re) * power_disk_average(2.0 * eps - 2.0, 0.0, R) * R * R;

  const GridField lap_varrho = stencil_laplacian(rep.varrho);
  const auto mask = interior_mask(grid, reg.ring + grid.spacing());
  rep.psi_minus_phi_min = std::numeric_limits<double>::infinity();
  rep.varrho_ratio_min = std::numeric_limits<double>::infinity();
  rep.varrho_ratio_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!mask[k]) continue;
    const double r2 = rho_f[k] * rho_f[k];
    const double s = std::abs(grid.node(k) - zeta);
    const double diff = rep.psi[k] - rep.phi_eps[k];
    rep.c1 = std::max(rep.c1, dpsi[k] * dpsi[k] * r2);
    rep.c2 = std::max(rep.c2, lap_psi[k] * r2);
    rep.big_phi_sup_scaled = std::max(rep.big_phi_sup_scaled, rep.big_phi[k] * r2);
    rep.psi_minus_phi_min = std::min(rep.psi_minus_phi_min, diff);
    if (s <= 2.0 * R) rep.psi_minus_phi_max_near = std::max(rep.psi_minus_phi_max_near, diff);
    if (s >= R) rep.psi_minus_phi_sup = std::max(rep.psi_minus_phi_sup, std::abs(diff));
    if (reg.laplacian[k] > 0.0) {
      const double ratio = lap_varrho[k] / reg.laplacian[k];
      rep.varrho_ratio_min = std::min(rep.varrho_ratio_min, ratio);
      rep.varrho_ratio_max = std::max(rep.varrho_ratio_max, ratio);
    }
  }
  return rep;
}

}  // namespace fock::weights
