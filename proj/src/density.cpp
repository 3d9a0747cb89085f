#include "ergoinv/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ergoinv/error.hpp"
#include "ergoinv/expression.hpp"

namespace ergoinv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Mass of each layer orthogonal to each axis: profile[a][j].
std::vector<std::vector<double>> face_profiles(const GridSpec& grid, std::span<const double> v) {
  const std::size_t d = grid.dim();
  std::vector<std::vector<double>> profile(d);
  for (std::size_t a = 0; a < d; ++a) profile[a].assign(grid.nodes(a), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.quadrature_weight(k);
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t j = grid.axis_index(k, a);
      profile[a][j] += v[k] * w / grid.axis_weights(a)[j];
    }
  }
  return profile;
}

}  // namespace

NormalizationResult normalization_constant(const GridSpec& grid, std::span<const double> values,
                                           double tail_tol) {
  if (values.size() != grid.size()) throw Error(ErrorKind::precondition, "value count != grid size");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::precondition, "density values must be finite and nonnegative");
    }
  }
  NormalizationResult r;
  r.z = integrate(grid, values);
  const auto profile = face_profiles(grid, values);
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const std::size_t n = grid.nodes(a);
    const std::size_t layers = std::max<std::size_t>(2, n / 10);
    const double h = grid.spacing(a);
    for (int side = 0; side < 2; ++side) {
      const double edge = side == 0 ? profile[a][0] : profile[a][n - 1];
      const double inner = side == 0 ? profile[a][layers] : profile[a][n - 1 - layers];
      if (edge <= 0.0) continue;
      const double ratio = inner > 0.0 ? std::pow(edge / inner, 1.0 / static_cast<double>(layers))
                                       : std::numeric_limits<double>::infinity();
      if (!(ratio < 1.0)) {
        r.divergent = true;
        r.tail_estimate = std::numeric_limits<double>::infinity();
        std::ostringstream os;
        os << "values do not decay toward the " << (side == 0 ? "lower" : "upper") << " face of axis "
           << a << "; integrability suspect";
        r.warnings.push_back(os.str());
        continue;
      }
      // Geometric extrapolation, or a power law |x - c|^{-s} about the axis
      // center when that predicts more mass (algebraic tails).
      double tail = edge * h * ratio / (1.0 - ratio);
      const double r_edge = 0.5 * (grid.upper(a) - grid.lower(a));
      const double r_inner = r_edge - static_cast<double>(layers) * h;
      if (r_inner > 0.0) {
        const double s = std::log(inner / edge) / std::log(r_edge / r_inner);
        if (s > 1.0) tail = std::max(tail, edge * r_edge / (s - 1.0));
      }
      r.tail_estimate += tail;
    }
  }
  r.heavy_tail = !(r.tail_estimate <= tail_tol * r.z);
  if (r.heavy_tail && !r.divergent) {
    std::ostringstream os;
    os << "heavy tail: extrapolated mass beyond the box is " << r.tail_estimate / r.z
       << " of the total";
    r.warnings.push_back(os.str());
  }
  return r;
}

double DensityGrid::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

std::vector<std::uint8_t> DensityGrid::floor_mask() const {
  const double floor = kRelativeFloor * max_value();
  std::vector<std::uint8_t> m(values.size(), 0);
  for (std::size_t k = 0; k < values.size(); ++k) m[k] = values[k] < floor ? 1 : 0;
  return m;
}

namespace {

double suggested_half_width(const GridSpec& grid) {
  double w = 0.0;
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    w = std::max({w, std::abs(grid.lower(a)), std::abs(grid.upper(a))});
  }
  return 2.0 * w;
}

void apply_tail_policy(DensityGrid& p, const NormalizationResult& norm, const DensityOptions& opts) {
  p.tail_mass = norm.z > 0.0 ? norm.tail_estimate / norm.z : std::numeric_limits<double>::infinity();
  p.warnings.insert(p.warnings.end(), norm.warnings.begin(), norm.warnings.end());
  if (!(p.tail_mass <= opts.tail_tol) && opts.strict_tail) {
    throw TruncationError(p.tail_mass, opts.tail_tol, suggested_half_width(p.grid));
  }
}

}  // namespace

DensityGrid DensityGrid::from_log(GridSpec grid, std::vector<double> log_unnormalized,
                                  const DensityOptions& opts) {
  if (log_unnormalized.size() != grid.size()) {
    throw Error(ErrorKind::precondition, "log-value count != grid size");
  }
  double shift = kNegInf;
  for (double v : log_unnormalized) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorKind::coefficient, "log-density is NaN or +inf on the grid");
    }
    shift = std::max(shift, v);
  }
  if (shift == kNegInf) throw Error(ErrorKind::coefficient, "density vanishes on the whole grid");

  DensityGrid p;
  p.grid = std::move(grid);
  std::vector<double> w(log_unnormalized.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_unnormalized[k] - shift);
  const auto norm = normalization_constant(p.grid, w, opts.tail_tol);
  p.log_normalizer = shift + std::log(norm.z);
  p.log_values = std::move(log_unnormalized);
  p.values.resize(p.log_values.size());
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    p.log_values[k] -= p.log_normalizer;
    p.values[k] = std::exp(p.log_values[k]);
  }
  p.mass = integrate(p.grid, p.values);
  p.normalized = true;
  apply_tail_policy(p, norm, opts);
  return p;
}

DensityGrid DensityGrid::from_values(GridSpec grid, std::vector<double> values, bool normalize,
                                     const DensityOptions& opts) {
  DensityGrid p;
  p.grid = std::move(grid);
  const auto norm = normalization_constant(p.grid, values, opts.tail_tol);
  if (!(norm.z > 0.0)) throw Error(ErrorKind::coefficient, "density has zero mass on the grid");
  p.values = std::move(values);
  if (normalize) {
    for (double& v : p.values) v /= norm.z;
    p.log_normalizer = std::log(norm.z);
  }
  p.log_values.resize(p.values.size());
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    p.log_values[k] = p.values[k] > 0.0 ? std::log(p.values[k]) : kNegInf;
  }
  p.mass = integrate(p.grid, p.values);
  p.normalized = normalize;
  apply_tail_policy(p, norm, opts);
  return p;
}

// ---- primitives ---------------------------------------------------------------

Primitive1D::Primitive1D(std::function<double(double)> f, double anchor, double lower,
                         double upper, double h)
    : f_(std::move(f)), anchor_(anchor), h_(h) {
  if (!(h > 0.0) || !(upper > lower)) throw Error(ErrorKind::precondition, "invalid primitive table");
  lo_index_ = static_cast<std::ptrdiff_t>(std::floor((std::min(lower, anchor) - anchor) / h));
  const auto hi_index = static_cast<std::ptrdiff_t>(std::ceil((std::max(upper, anchor) - anchor) / h));
  table_.assign(static_cast<std::size_t>(hi_index - lo_index_ + 1), 0.0);
  const auto zero = static_cast<std::size_t>(-lo_index_);
  for (std::size_t i = zero + 1; i < table_.size(); ++i) {
    const double a = anchor_ + static_cast<double>(static_cast<std::ptrdiff_t>(i - 1) + lo_index_) * h_;
    table_[i] = table_[i - 1] + simpson_panel(a, a + h_);
  }
  for (std::size_t i = zero; i-- > 0;) {
    const double b = anchor_ + static_cast<double>(static_cast<std::ptrdiff_t>(i + 1) + lo_index_) * h_;
    table_[i] = table_[i + 1] - simpson_panel(b - h_, b);
  }
}

double Primitive1D::simpson_panel(double a, double b) const {
  return (b - a) / 6.0 * (f_(a) + 4.0 * f_(0.5 * (a + b)) + f_(b));
}

double Primitive1D::at_offset(std::ptrdiff_t i) const {
  const std::ptrdiff_t idx = i - lo_index_;
  if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(table_.size())) {
    throw Error(ErrorKind::precondition, "primitive table offset out of range");
  }
  return table_[static_cast<std::size_t>(idx)];
}

double Primitive1D::operator()(double x) const {
  const auto last = static_cast<std::ptrdiff_t>(table_.size()) - 1;
  auto node = [&](std::ptrdiff_t idx) {
    return anchor_ + static_cast<double>(idx + lo_index_) * h_;
  };
  auto idx = static_cast<std::ptrdiff_t>(std::floor((x - anchor_) / h_)) - lo_index_;
  if (idx >= 0 && idx < last) {
    return table_[static_cast<std::size_t>(idx)] + simpson_panel(node(idx), x);
  }
  if (idx >= last) {
    double acc = table_.back();
    double a = node(last);
    while (x - a > h_) {
      acc += simpson_panel(a, a + h_);
      a += h_;
    }
    return acc + simpson_panel(a, x);
  }
  double acc = table_.front();
  double b = node(0);
  while (b - x > h_) {
    acc -= simpson_panel(b - h_, b);
    b -= h_;
  }
  return acc - simpson_panel(x, b);
}

// ---- closed forms -----------------------------------------------------------

DensityGrid closed_form_density_1d(const CoefficientPair& pair, double lower, double upper,
                                   std::size_t n_nodes, const DensityOptions& opts) {
  if (pair.dim() != 1) throw Error(ErrorKind::precondition, "closed_form_density_1d needs d = 1");
  GridSpec grid(Box{{lower}, {upper}}, {n_nodes});
  const double h = grid.spacing(0);
  const auto center = static_cast<std::ptrdiff_t>((n_nodes - 1) / 2);
  const double xc = grid.coordinate(0, static_cast<std::size_t>(center));

  auto b_over_d = [&pair](double x) {
    const double dx = diffusion_1d(pair, x);
    double b = 0.0;
    pair.drift(std::span<const double>(&x, 1), std::span<double>(&b, 1));
    return b / dx;
  };
  std::vector<double> log_unnorm(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double x = grid.coordinate(0, i);
    const double dx = diffusion_1d(pair, x);
    if (!(dx > 0.0)) {
      std::ostringstream os;
      os << "diffusion D(x) = " << dx << " <= 0 at x = " << x;
      throw Error(ErrorKind::coefficient, os.str());
    }
    log_unnorm[i] = -std::log(dx);
  }
  const Primitive1D primitive(b_over_d, xc, lower, upper, h);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    log_unnorm[i] += primitive.at_offset(static_cast<std::ptrdiff_t>(i) - center);
  }
  return DensityGrid::from_log(std::move(grid), std::move(log_unnorm), opts);
}

DensityGrid gibbs_density(const ScalarField& potential, double beta, const GridSpec& grid,
                          const DensityOptions& opts) {
  if (!(beta > 0.0)) throw Error(ErrorKind::precondition, "beta must be positive");
  if (grid.dim() > 3) throw Error(ErrorKind::precondition, "gibbs_density supports d <= 3");
  std::vector<double> log_unnorm(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static) if (opts.exec == Exec::parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    double x[3];
    grid.point(static_cast<std::size_t>(k), std::span<double>(x, grid.dim()));
    log_unnorm[static_cast<std::size_t>(k)] =
        2.0 * potential(std::span<const double>(x, grid.dim())) / beta;
  }
  return DensityGrid::from_log(grid, std::move(log_unnorm), opts);
}

DensityGrid gibbs_density(const ScalarField& potential, double beta, double lower, double upper,
                          std::size_t nodes_per_axis, std::size_t d, const DensityOptions& opts) {
  return gibbs_density(potential, beta, GridSpec::uniform(d, lower, upper, nodes_per_axis), opts);
}

// ---- operators --------------------------------------------------------------

VectorGridField grad_log(const DensityGrid& p, Exec exec) {
  const GridSpec& g = p.grid;
  VectorGridField out(g);
  const double floor = kRelativeFloor * p.max_value();
  const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    std::vector<std::size_t> nodes;
    bool masked = false;
    for (std::size_t a = 0; a < g.dim() && !masked; ++a) {
      stencil_nodes(g, k, a, 1, nodes);
      for (std::size_t s : nodes) {
        if (p.values[s] < floor || !std::isfinite(p.log_values[s])) {
          masked = true;
          break;
        }
      }
    }
    out.mask[k] = masked ? 1 : 0;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      out.components[a][k] = masked ? 0.0 : first_difference(g, p.log_values, k, a);
    }
  }
  return out;
}

GridField laplacian(const DensityGrid& p, Exec exec) {
  GridField out(p.grid);
  const auto n = static_cast<std::ptrdiff_t>(p.grid.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    double acc = 0.0;
    for (std::size_t a = 0; a < p.grid.dim(); ++a) acc += second_difference(p.grid, p.values, k, a);
    out.values[k] = acc;
  }
  return out;
}

GridField divergence(const VectorGridField& v, Exec exec) {
  GridField out(v.grid);
  const auto n = static_cast<std::ptrdiff_t>(v.grid.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < n; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    std::vector<std::size_t> nodes;
    bool masked = false;
    double acc = 0.0;
    for (std::size_t a = 0; a < v.grid.dim(); ++a) {
      stencil_nodes(v.grid, k, a, 1, nodes);
      for (std::size_t s : nodes) masked = masked || v.mask[s] != 0;
      acc += first_difference(v.grid, v.components[a], k, a);
    }
    out.mask[k] = masked ? 1 : 0;
    out.values[k] = masked ? 0.0 : acc;
  }
  return out;
}

// ---- weak-form probes -------------------------------------------------------

double BumpFunction::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t a = 0; a < center.size(); ++a) s += (x[a] - center[a]) * (x[a] - center[a]);
  s /= radius * radius;
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

void BumpFunction::derivatives(std::span<const double> x, std::span<double> grad,
                               std::span<double> hess) const {
  const std::size_t d = center.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  std::fill(hess.begin(), hess.end(), 0.0);
  const double r2 = radius * radius;
  double s = 0.0;
  for (std::size_t a = 0; a < d; ++a) s += (x[a] - center[a]) * (x[a] - center[a]);
  s /= r2;
  if (!(s < 1.0)) return;
  const double u = 1.0 - s;
  const double phi = std::exp(-1.0 / u);
  if (phi == 0.0) return;
  const double g1 = -1.0 / (u * u);       // d/ds of -1/(1-s)
  const double g2 = -2.0 / (u * u * u);   // second derivative
  for (std::size_t i = 0; i < d; ++i) {
    const double si = 2.0 * (x[i] - center[i]) / r2;
    grad[i] = phi * g1 * si;
    for (std::size_t j = 0; j < d; ++j) {
      const double sj = 2.0 * (x[j] - center[j]) / r2;
      hess[i * d + j] = phi * ((g2 + g1 * g1) * si * sj + (i == j ? g1 * 2.0 / r2 : 0.0));
    }
  }
}

std::vector<BumpFunction> weak_form_probes(const Box& box) {
  constexpr std::size_t count = 8;
  const std::size_t d = box.dim();
  std::vector<BumpFunction> probes;
  if (d == 1) {
    const double len = box.upper[0] - box.lower[0];
    for (std::size_t j = 0; j < count; ++j) {
      probes.push_back({{box.lower[0] + static_cast<double>(j + 1) * len / 9.0}, 0.9 * len / 9.0});
    }
    return probes;
  }
  double width = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < d; ++a) width = std::min(width, box.upper[a] - box.lower[a]);
  const double r = width / 6.0;
  const auto unit = halton_points(count, d, 0x7E57F00Dull);
  for (const auto& u : unit) {
    BumpFunction b;
    b.radius = r;
    for (std::size_t a = 0; a < d; ++a) {
      b.center.push_back(box.lower[a] + r + u[a] * (box.upper[a] - box.lower[a] - 2.0 * r));
    }
    probes.push_back(std::move(b));
  }
  return probes;
}

double ResidualReport::weak_form_max() const {
  double m = 0.0;
  for (const auto& w : weak_form_values) m = std::max(m, std::abs(w.value));
  return m;
}

ResidualReport fp_residual(const DensityGrid& p, const CoefficientPair& pair,
                           std::size_t interior_margin, Exec exec) {
  const GridSpec& g = p.grid;
  const std::size_t d = g.dim();
  if (pair.dim() != d) throw Error(ErrorKind::precondition, "pair dimension does not match grid");
  if (interior_margin < 2) interior_margin = 2;
  const std::size_t n = g.size();

  // flux_d[i*d+j][k] = D^{ij} p, flux_b[i][k] = b^i p
  std::vector<std::vector<double>> flux_d(d * d, std::vector<double>(n));
  std::vector<std::vector<double>> flux_b(d, std::vector<double>(n));
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < sn; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    std::vector<double> x(d), b(d);
    g.point(k, x);
    const auto tensor = diffusion_tensor(pair, x);
    pair.drift(x, b);
    for (std::size_t i = 0; i < d; ++i) {
      flux_b[i][k] = b[i] * p.values[k];
      for (std::size_t j = 0; j < d; ++j) {
        flux_d[i * d + j][k] = tensor.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * p.values[k];
      }
    }
  }

  // Mixed terms via composed first differences, 2 * d_i d_j for i < j.
  std::vector<std::vector<double>> mixed;
  std::vector<std::pair<std::size_t, std::size_t>> mixed_axes;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      mixed.push_back(differentiate(g, flux_d[i * d + j], j, exec));
      mixed_axes.emplace_back(i, j);
    }
  }

  std::vector<double> residual(n, 0.0);
  std::vector<std::uint8_t> used(n, 0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t kk = 0; kk < sn; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    if (!g.is_interior(k, interior_margin)) continue;
    double r = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      r += second_difference(g, flux_d[i * d + i], k, i);
      r -= first_difference(g, flux_b[i], k, i);
    }
    for (std::size_t m = 0; m < mixed.size(); ++m) {
      r += 2.0 * first_difference(g, mixed[m], k, mixed_axes[m].first);
    }
    residual[k] = r;
    used[k] = 1;
  }

  ResidualReport rep;
  rep.interior_margin = interior_margin;
  double sum2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!used[k]) continue;
    ++rep.evaluated_nodes;
    rep.linf = std::max(rep.linf, std::abs(residual[k]));
    sum2 += residual[k] * residual[k];
  }
  rep.l2 = std::sqrt(sum2 * g.cell_volume());

  // Weak form: int p (D^{ij} d_ij phi + b^i d_i phi), D p and b p reused from the fluxes.
  const auto probes = weak_form_probes(g.box());
  for (std::size_t id = 0; id < probes.size(); ++id) {
    const auto& probe = probes[id];
    std::vector<double> integrand(n, 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (std::ptrdiff_t kk = 0; kk < sn; ++kk) {
      const auto k = static_cast<std::size_t>(kk);
      std::vector<double> x(d), grad(d), hess(d * d);
      g.point(k, x);
      probe.derivatives(x, grad, hess);
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        acc += flux_b[i][k] * grad[i];
        for (std::size_t j = 0; j < d; ++j) acc += flux_d[i * d + j][k] * hess[i * d + j];
      }
      integrand[k] = acc;
    }
    rep.weak_form_values.push_back({id, probe.center, probe.radius, integrate(g, integrand)});
  }
  return rep;
}

// ---- serialization ------------------------------------------------------------

void write_density_csv(const std::filesystem::path& path, const DensityGrid& p) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  const auto mask = p.floor_mask();
  for (std::size_t a = 0; a < p.dim(); ++a) os << "x" << (a + 1) << ",";
  os << "value,mask\n";
  os << std::setprecision(17);
  std::vector<double> x(p.dim());
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    p.grid.point(k, x);
    for (double c : x) os << c << ",";
    os << p.values[k] << "," << static_cast<int>(mask[k]) << "\n";
  }
}

void write_density_json(const std::filesystem::path& path, const DensityGrid& p) {
  nlohmann::json j;
  j["dimension"] = p.dim();
  j["lower"] = p.grid.box().lower;
  j["upper"] = p.grid.box().upper;
  j["nodes"] = p.grid.nodes();
  std::vector<double> spacing;
  for (std::size_t a = 0; a < p.dim(); ++a) spacing.push_back(p.grid.spacing(a));
  j["spacing"] = spacing;
  j["mass"] = p.mass;
  j["normalized"] = p.normalized;
  j["log_normalizer"] = p.log_normalizer;
  j["tail_mass"] = p.tail_mass;
  j["warnings"] = p.warnings;
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  os << std::setw(2) << j << "\n";
}

DensityGrid read_density(const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw Error(ErrorKind::config, "cannot read " + json_path.string());
  nlohmann::json j;
  try {
    js >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, json_path.string() + ": " + e.what());
  }
  GridSpec grid(Box{j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()},
                j.at("nodes").get<std::vector<std::size_t>>());
  std::ifstream cs(csv_path);
  if (!cs) throw Error(ErrorKind::config, "cannot read " + csv_path.string());
  std::string line;
  std::getline(cs, line);  // header
  std::vector<double> values;
  values.reserve(grid.size());
  std::size_t line_no = 1;
  while (std::getline(cs, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_list(line, ',');
    if (cells.size() != grid.dim() + 2) {
      throw Error(ErrorKind::config, csv_path.string() + ":" + std::to_string(line_no) +
                                         ": expected " + std::to_string(grid.dim() + 2) + " columns");
    }
    values.push_back(std::stod(cells[grid.dim()]));
  }
  if (values.size() != grid.size()) throw Error(ErrorKind::config, "CSV row count does not match header");
  DensityGrid p;
  p.grid = std::move(grid);
  p.values = std::move(values);
  p.log_values.resize(p.values.size());
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    p.log_values[k] = p.values[k] > 0.0 ? std::log(p.values[k]) : kNegInf;
  }
  p.mass = j.value("mass", integrate(p.grid, p.values));
  p.normalized = j.value("normalized", false);
  p.log_normalizer = j.value("log_normalizer", 0.0);
  p.tail_mass = j.value("tail_mass", 0.0);
  return p;
}

void write_field_csv(const std::filesystem::path& path, const VectorGridField& v,
                     const std::vector<std::string>& component_names) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
  for (std::size_t a = 0; a < v.grid.dim(); ++a) os << "x" << (a + 1) << ",";
  for (const auto& name : component_names) os << name << ",";
  os << "mask\n" << std::setprecision(17);
  std::vector<double> x(v.grid.dim());
  for (std::size_t k = 0; k < v.grid.size(); ++k) {
    v.grid.point(k, x);
    for (double c : x) os << c << ",";
    for (const auto& comp : v.components) os << comp[k] << ",";
    os << static_cast<int>(v.mask[k]) << "\n";
  }
}

}  // namespace ergoinv
