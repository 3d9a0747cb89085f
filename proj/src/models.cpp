#include "ergoinv/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ergoinv/error.hpp"
#include "ergoinv/rng.hpp"

namespace ergoinv {

const char* to_string(CoefficientKind kind) noexcept {
  switch (kind) {
    case CoefficientKind::general: return "general";
    case CoefficientKind::additive: return "additive";
    case CoefficientKind::langevin: return "langevin";
  }
  return "unknown";
}

double CoefficientPair::potential(std::span<const double> x) const {
  if (!potential_) throw Error(ErrorKind::precondition, "pair '" + name_ + "' has no potential");
  return potential_(x);
}

std::vector<double> CoefficientPair::drift(std::span<const double> x) const {
  std::vector<double> out(dim_);
  drift_(x, out);
  return out;
}

Eigen::MatrixXd CoefficientPair::sigma_matrix(std::span<const double> x) const {
  std::vector<double> buf(dim_ * noise_dim_);
  sigma_(x, buf);
  Eigen::MatrixXd s(dim_, noise_dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t l = 0; l < noise_dim_; ++l) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = buf[i * noise_dim_ + l];
  }
  return s;
}

CoefficientPair make_general(std::size_t d, std::size_t m, VectorField drift, MatrixField sigma,
                             std::string name) {
  if (d == 0 || m == 0) throw Error(ErrorKind::precondition, "dimensions must be positive");
  if (!drift || !sigma) throw Error(ErrorKind::precondition, "drift and sigma must be callable");
  CoefficientPair p;
  p.dim_ = d;
  p.noise_dim_ = m;
  p.kind_ = CoefficientKind::general;
  p.drift_ = std::move(drift);
  p.sigma_ = std::move(sigma);
  p.name_ = std::move(name);
  return p;
}

CoefficientPair make_additive(std::size_t d, std::size_t m, VectorField drift,
                              Eigen::MatrixXd sigma, std::string name) {
  if (static_cast<std::size_t>(sigma.rows()) != d || static_cast<std::size_t>(sigma.cols()) != m) {
    throw Error(ErrorKind::precondition, "additive sigma must be d x m");
  }
  std::vector<double> flat(d * m);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t l = 0; l < m; ++l) flat[i * m + l] = sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
  }
  auto p = make_general(
      d, m, std::move(drift),
      [flat](std::span<const double>, std::span<double> out) {
        std::copy(flat.begin(), flat.end(), out.begin());
      },
      std::move(name));
  p.kind_ = CoefficientKind::additive;
  return p;
}

void fd_gradient(const ScalarField& potential, std::span<const double> x, std::span<double> out) {
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + kGradientStep;
    const double up = potential(y);
    y[i] = x[i] - kGradientStep;
    const double dn = potential(y);
    y[i] = x[i];
    out[i] = (up - dn) / (2.0 * kGradientStep);
  }
}

std::vector<std::vector<double>> halton_points(std::size_t count, std::size_t dim,
                                               std::uint64_t seed) {
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim > std::size(primes)) throw Error(ErrorKind::precondition, "Halton dimension too large");
  const CounterRng rng(seed);
  std::vector<double> shift(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    shift[a] = rng.uniform2(Stream::halton_shift, static_cast<std::uint32_t>(a), 0, 0)[0];
  }
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t a = 0; a < dim; ++a) {
      double f = 1.0;
      double r = 0.0;
      std::size_t n = i + 1;
      while (n > 0) {
        f /= primes[a];
        r += f * static_cast<double>(n % primes[a]);
        n /= primes[a];
      }
      double v = r + shift[a];
      pts[i][a] = v - std::floor(v);
    }
  }
  return pts;
}

CoefficientPair make_langevin(std::size_t d, ScalarField potential, VectorField gradient,
                              double beta, std::string name, const Box* check_box) {
  if (!(beta > 0.0)) throw Error(ErrorKind::precondition, "langevin beta must be positive");
  if (!potential) throw Error(ErrorKind::precondition, "langevin pair needs a potential");
  if (!gradient) {
    gradient = [potential](std::span<const double> x, std::span<double> out) {
      fd_gradient(potential, x, out);
    };
  } else {
    const Box box = check_box ? *check_box : Box::cube(d, -2.0, 2.0);
    const auto pts = halton_points(16, d, 0x1A2B3C4Dull);
    std::vector<double> x(d), g(d), fd(d);
    for (const auto& u : pts) {
      for (std::size_t a = 0; a < d; ++a) x[a] = box.lower[a] + u[a] * (box.upper[a] - box.lower[a]);
      gradient(x, g);
      fd_gradient(potential, x, fd);
      for (std::size_t a = 0; a < d; ++a) {
        if (!(std::abs(g[a] - fd[a]) <= kGradientTolerance)) {
          std::ostringstream os;
          os << "langevin pair '" << name << "': drift component " << a
             << " differs from the gradient of the potential by " << std::abs(g[a] - fd[a]);
          throw Error(ErrorKind::coefficient, os.str());
        }
      }
    }
  }
  auto p = make_additive(d, d, std::move(gradient),
                         std::sqrt(beta) * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                         std::move(name));
  p.kind_ = CoefficientKind::langevin;
  p.potential_ = std::move(potential);
  p.beta_ = beta;
  return p;
}

DiffusionTensor diffusion_tensor(const CoefficientPair& pair, std::span<const double> x) {
  const Eigen::MatrixXd s = pair.sigma_matrix(x);
  DiffusionTensor t;
  t.matrix = 0.5 * s * s.transpose();
  if (!t.matrix.allFinite()) {
    throw Error(ErrorKind::coefficient, "sigma of pair '" + pair.name() + "' is not finite");
  }
  if (t.matrix.rows() == 1) {
    t.min_eigenvalue = t.matrix(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.matrix, Eigen::EigenvaluesOnly);
    t.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  t.degenerate = !(t.min_eigenvalue > kStrictSlack);
  return t;
}

double diffusion_1d(const CoefficientPair& pair, double x) {
  const std::size_t m = pair.noise_dim();
  double buf[16];
  std::vector<double> heap;
  std::span<double> s;
  if (m <= 16) {
    s = std::span<double>(buf, m);
  } else {
    heap.resize(m);
    s = heap;
  }
  pair.sigma(std::span<const double>(&x, 1), s);
  double acc = 0.0;
  for (double v : s) acc += v * v;
  return 0.5 * acc;
}

// ---- condition checking ---------------------------------------------------

namespace {

struct PairSample {
  double monotone_ratio = 0.0;  // [2<b(x)-b(y),x-y> + |s(x)-s(y)|^2] / |x-y|^2
  double coercive = 0.0;        // 2<b(x),x> + |s(x)|^2
  double norm_x = 0.0;
  double norm_b = 0.0;
  double min_eig = 0.0;
};

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

}  // namespace

ConditionReport check_conditions(const CoefficientPair& pair, const Box& domain,
                                 std::size_t n_samples, std::uint64_t seed, Exec exec) {
  domain.validate();
  const std::size_t d = pair.dim();
  const std::size_t m = pair.noise_dim();
  if (domain.dim() != d) throw Error(ErrorKind::precondition, "domain dimension mismatch");
  if (n_samples < 2) throw Error(ErrorKind::precondition, "check_conditions needs n_samples >= 2");

  const auto unit = halton_points(n_samples, 2 * d, seed);
  std::vector<PairSample> samples(n_samples);
  std::vector<std::vector<double>> points(n_samples, std::vector<double>(d));

  const auto n = static_cast<std::ptrdiff_t>(n_samples);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    std::vector<double> x(d), y(d), bx(d), by(d), sx(d * m), sy(d * m);
    for (std::size_t a = 0; a < d; ++a) {
      const double w = domain.upper[a] - domain.lower[a];
      x[a] = domain.lower[a] + unit[i][a] * w;
      y[a] = domain.lower[a] + unit[i][d + a] * w;
    }
    pair.drift(x, bx);
    pair.drift(y, by);
    pair.sigma(x, sx);
    pair.sigma(y, sy);
    double inner = 0.0, dist2 = 0.0, sdiff = 0.0, bxx = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      inner += (bx[a] - by[a]) * (x[a] - y[a]);
      dist2 += (x[a] - y[a]) * (x[a] - y[a]);
      bxx += bx[a] * x[a];
    }
    for (std::size_t e = 0; e < d * m; ++e) sdiff += (sx[e] - sy[e]) * (sx[e] - sy[e]);
    PairSample& s = samples[i];
    s.monotone_ratio = dist2 > 0.0 ? (2.0 * inner + sdiff) / dist2
                                   : -std::numeric_limits<double>::infinity();
    s.coercive = 2.0 * bxx + sq_norm(sx);
    s.norm_x = std::sqrt(sq_norm(x));
    s.norm_b = std::sqrt(sq_norm(bx));
    s.min_eig = diffusion_tensor(pair, x).min_eigenvalue;
    points[i] = std::move(x);
  }

  // Serial reductions in sample order keep the report independent of threading.
  ConditionReport r;
  r.sampled_points = n_samples;
  r.monotone_constant = -std::numeric_limits<double>::infinity();
  r.min_eigen_diffusion = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  for (const auto& s : samples) {
    r.monotone_constant = std::max(r.monotone_constant, s.monotone_ratio);
    r.min_eigen_diffusion = std::min(r.min_eigen_diffusion, s.min_eig);
    max_norm = std::max(max_norm, s.norm_x);
  }

  // Coercivity: slope from the outer half of the sampled radii, halved so that
  // a finite offset L1 absorbs the inner region.
  const double r0 = 0.5 * max_norm;
  double slope = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto& s = samples[i];
    if (s.norm_x >= r0 && s.norm_x > 0.0) {
      const double v = -s.coercive / (s.norm_x * s.norm_x);
      if (v < slope) {
        slope = v;
        worst = i;
      }
    }
  }
  if (!std::isfinite(slope)) slope = 0.0;
  r.coercive_rate = slope > 0.0 ? 0.5 * slope : slope;
  r.coercive_offset = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    r.coercive_offset = std::max(r.coercive_offset, s.coercive + r.coercive_rate * s.norm_x * s.norm_x);
  }
  if (!(r.coercive_rate > kStrictSlack)) {
    r.violations.push_back({"coe-", points[worst], samples[worst].coercive});
  }

  // Polynomial growth |b| <= L3 + L4 |x|^q with q from the doubling ratio of
  // max |b| over nested balls.
  auto max_b_within = [&](double radius) {
    double mb = 0.0;
    for (const auto& s : samples) {
      if (s.norm_x <= radius) mb = std::max(mb, s.norm_b);
    }
    return mb;
  };
  const double m_full = max_b_within(max_norm);
  const double m_half = max_b_within(0.5 * max_norm);
  r.growth_exponent = 1.0;
  if (m_half > 0.0 && m_full > m_half) {
    r.growth_exponent = std::max(1.0, std::log(m_full / m_half) / std::log(2.0));
  }
  r.growth_offset = 0.0;
  r.growth_rate = 0.0;
  for (const auto& s : samples) {
    if (s.norm_x <= 1.0) {
      r.growth_offset = std::max(r.growth_offset, s.norm_b);
    } else {
      r.growth_rate = std::max(r.growth_rate, s.norm_b / std::pow(s.norm_x, r.growth_exponent));
    }
  }

  // Re-verify every sampled inequality against the reported constants.
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto& s = samples[i];
    const double scale = 1.0 + std::abs(s.coercive) + s.norm_b;
    if (!std::isfinite(s.monotone_ratio) && s.monotone_ratio > 0.0) {
      r.violations.push_back({"mon-", points[i], s.monotone_ratio});
    }
    if (s.coercive > r.coercive_offset - r.coercive_rate * s.norm_x * s.norm_x + kStrictSlack * scale) {
      r.violations.push_back({"coe-", points[i], s.coercive});
    }
    if (s.norm_b > r.growth_offset + r.growth_rate * std::pow(s.norm_x, r.growth_exponent) +
                       kStrictSlack * scale) {
      r.violations.push_back({"pol-", points[i], s.norm_b});
    }
    if (!(s.min_eig > kStrictSlack)) {
      r.violations.push_back({"non", points[i], s.min_eig});
    }
  }
  r.pass = r.violations.empty() && r.coercive_rate > 0.0 && r.min_eigen_diffusion > 0.0 &&
           std::isfinite(r.monotone_constant);
  return r;
}

// ---- constructors -----------------------------------------------------------

namespace {

double horner(std::span<const double> c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace

CoefficientPair polynomial_pair(std::span<const double> drift_coeffs,
                                std::span<const double> sigma_coeffs) {
  const std::size_t na = drift_coeffs.size();
  if (na < 2 || na % 2 != 0) {
    throw Error(ErrorKind::precondition,
                "polynomial drift must have odd degree 2k+1 (an even number of coefficients)");
  }
  const std::size_t k = na / 2 - 1;
  if (sigma_coeffs.empty() || sigma_coeffs.size() > k + 2) {
    throw Error(ErrorKind::precondition, "polynomial sigma must have degree at most k+1");
  }
  const double lead = drift_coeffs.back();
  if (!(lead < 0.0)) {
    throw Error(ErrorKind::precondition, "condition a_{2k+1} < 0 violated");
  }
  const double c_top = sigma_coeffs.size() == k + 2 ? sigma_coeffs.back() : 0.0;
  const double balance = 2.0 * lead + c_top * c_top;
  if (!(balance < -kStrictSlack)) {
    std::ostringstream os;
    os << "condition 2a_{2k+1} + c_{k+1}^2 < 0 violated (value " << balance << ")";
    throw Error(ErrorKind::precondition, os.str());
  }
  std::vector<double> a(drift_coeffs.begin(), drift_coeffs.end());
  std::vector<double> c(sigma_coeffs.begin(), sigma_coeffs.end());
  return make_general(
      1, 1, [a](std::span<const double> x, std::span<double> out) { out[0] = horner(a, x[0]); },
      [c](std::span<const double> x, std::span<double> out) { out[0] = horner(c, x[0]); },
      "polynomial");
}

Eigen::MatrixXd skew_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::precondition, "skew_matrix needs a square matrix");
  return 0.5 * (m - m.transpose());
}

Eigen::MatrixXd skew_from_upper(std::size_t d, std::span<const double> upper_entries) {
  if (upper_entries.size() != d * (d - 1) / 2) {
    throw Error(ErrorKind::precondition, "skew_from_upper expects d(d-1)/2 entries");
  }
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::size_t k = 0;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r + 1; c < d; ++c) {
      j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = upper_entries[k];
      j(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = -upper_entries[k];
      ++k;
    }
  }
  return j;
}

// ---- presets ----------------------------------------------------------------

std::vector<std::string> preset_names() {
  return {"ou", "cauchy_drift", "cauchy_gauge", "quartic", "double_well", "gaussian_2d",
          "skew_gaussian_2d"};
}

CoefficientPair preset_pair(const std::string& name) {
  if (name == "ou") {
    return make_langevin(
        1, [](std::span<const double> x) { return -0.5 * x[0] * x[0]; },
        [](std::span<const double> x, std::span<double> out) { out[0] = -x[0]; }, 2.0, "ou");
  }
  if (name == "cauchy_drift" || name == "cauchy") {
    return make_langevin(
        1, [](std::span<const double> x) { return -std::log1p(x[0] * x[0]); },
        [](std::span<const double> x, std::span<double> out) {
          out[0] = -2.0 * x[0] / (1.0 + x[0] * x[0]);
        },
        2.0, "cauchy_drift");
  }
  if (name == "cauchy_gauge") {
    return make_general(
        1, 1,
        [](std::span<const double> x, std::span<double> out) {
          out[0] = -2.0 * x[0] / (1.0 + x[0] * x[0]);
        },
        [](std::span<const double> x, std::span<double> out) {
          out[0] = std::sqrt(2.0 * (2.0 + x[0] * x[0]));
        },
        "cauchy_gauge");
  }
  if (name == "quartic") {
    return make_langevin(
        1, [](std::span<const double> x) { return -0.25 * std::pow(x[0], 4); },
        [](std::span<const double> x, std::span<double> out) { out[0] = -x[0] * x[0] * x[0]; },
        2.0, "quartic");
  }
  if (name == "double_well") {
    return make_langevin(
        1, [](std::span<const double> x) { return 0.5 * x[0] * x[0] - 0.25 * std::pow(x[0], 4); },
        [](std::span<const double> x, std::span<double> out) { out[0] = x[0] - x[0] * x[0] * x[0]; },
        2.0, "double_well");
  }
  if (name == "gaussian_2d") {
    return make_langevin(
        2, [](std::span<const double> x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); },
        [](std::span<const double> x, std::span<double> out) {
          out[0] = -x[0];
          out[1] = -x[1];
        },
        2.0, "gaussian_2d");
  }
  if (name == "skew_gaussian_2d") {
    return make_additive(
        2, 2,
        [](std::span<const double> x, std::span<double> out) {
          out[0] = -x[0] + x[1];
          out[1] = -x[1] - x[0];
        },
        std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2), "skew_gaussian_2d");
  }
  throw Error(ErrorKind::config, "unknown preset '" + name + "'");
}

}  // namespace ergoinv
