#pragma once

// Independent reference computations used as test oracles. They rely only on
// the standard library, never on the code under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double cauchy_pdf(double x) { return 1.0 / (std::numbers::pi * (1.0 + x * x)); }
inline double cauchy_cdf(double x) { return 0.5 + std::atan(x) / std::numbers::pi; }

// Composite trapezoid rule on n uniform panels; a deliberately different rule
// from the Simpson quadrature in the library.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
  return s * h;
}

// Golden-section maximization of a unimodal function on [a, b].
inline double maximize(const std::function<double(double)>& f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) > f(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return f(0.5 * (a + b));
}

// Richardson-extrapolated central difference.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-3) {
  const auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
  return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double e : v) s += (e - m) * (e - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double empirical_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

}  // namespace oracle

#include "ergoinv/rng.hpp"
#include "ergoinv/simulate.hpp"

namespace oracle {

// Exact i.i.d. draws packed as an empirical measure of `chains` equal chains,
// so estimators can be tested apart from the mixing of any simulator.
inline ergoinv::EmpiricalMeasure iid_measure(std::size_t n, std::size_t dim, std::uint64_t seed,
                                             const std::function<double(double)>& from_normal,
                                             std::size_t chains = 4) {
  ergoinv::EmpiricalMeasure em;
  em.dim = dim;
  em.samples.resize(n * dim);
  const ergoinv::CounterRng rng(seed);
  std::vector<double> z(dim);
  for (std::size_t i = 0; i < n; ++i) {
    rng.normals(ergoinv::Stream::reference_field, i, 0, z);
    for (std::size_t a = 0; a < dim; ++a) em.samples[i * dim + a] = from_normal(z[a]);
  }
  const std::size_t per = n / chains;
  for (std::size_t c = 0; c < chains; ++c) em.chains.push_back({c, seed, c * per, per});
  ergoinv::finalize_statistics(em);
  return em;
}

inline ergoinv::EmpiricalMeasure iid_normal(std::size_t n, std::size_t dim, std::uint64_t seed, double sd = 1.0) {
  return iid_measure(n, dim, seed, [sd](double z) { return sd * z; });
}

// Cauchy(0, 1) by the inverse CDF of Phi(z).
inline ergoinv::EmpiricalMeasure iid_cauchy(std::size_t n, std::uint64_t seed) {
  return iid_measure(n, 1, seed, [](double z) { return std::tan(std::numbers::pi * (normal_cdf(z) - 0.5)); });
}

}  // namespace oracle
