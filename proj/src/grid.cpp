#include "ergoinv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergoinv/error.hpp"

namespace ergoinv {

Box Box::cube(std::size_t d, double lo, double hi) {
  return Box{std::vector<double>(d, lo), std::vector<double>(d, hi)};
}

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw Error(ErrorKind::precondition, "box bounds must be non-empty and of equal dimension");
  }
  for (std::size_t a = 0; a < lower.size(); ++a) {
    if (!(upper[a] > lower[a]) || !std::isfinite(lower[a]) || !std::isfinite(upper[a])) {
      std::ostringstream os;
      os << "degenerate box on axis " << a << ": [" << lower[a] << ", " << upper[a] << "]";
      throw Error(ErrorKind::precondition, os.str());
    }
  }
}

std::vector<double> simpson_weights(std::size_t n, double h) {
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n) {
      w[i] = h / 3.0;
    } else {
      w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
    }
  }
  return w;
}

GridSpec::GridSpec(Box box, std::vector<std::size_t> nodes)
    : box_(std::move(box)), nodes_(std::move(nodes)) {
  box_.validate();
  if (nodes_.size() != box_.dim()) {
    throw Error(ErrorKind::precondition, "node count list does not match box dimension");
  }
  const std::size_t d = nodes_.size();
  spacing_.resize(d);
  strides_.resize(d);
  weights_.resize(d);
  size_ = 1;
  for (std::size_t a = 0; a < d; ++a) {
    if (nodes_[a] < 9) {
      throw Error(ErrorKind::precondition, "grids need at least 9 nodes per axis");
    }
    if (nodes_[a] % 2 == 0) {
      throw Error(ErrorKind::precondition,
                  "Simpson quadrature requires an odd number of nodes per axis");
    }
    spacing_[a] = (box_.upper[a] - box_.lower[a]) / static_cast<double>(nodes_[a] - 1);
    weights_[a] = simpson_weights(nodes_[a], spacing_[a]);
    size_ *= nodes_[a];
  }
  std::size_t stride = 1;
  for (std::size_t a = d; a-- > 0;) {
    strides_[a] = stride;
    stride *= nodes_[a];
  }
}

GridSpec GridSpec::uniform(std::size_t d, double lo, double hi, std::size_t nodes_per_axis) {
  return GridSpec(Box::cube(d, lo, hi), std::vector<std::size_t>(d, nodes_per_axis));
}

double GridSpec::cell_volume() const noexcept {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

void GridSpec::point(std::size_t flat, std::span<double> out) const {
  for (std::size_t a = 0; a < dim(); ++a) out[a] = coordinate(a, axis_index(flat, a));
}

std::vector<double> GridSpec::point(std::size_t flat) const {
  std::vector<double> x(dim());
  point(flat, x);
  return x;
}

double GridSpec::quadrature_weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t a = 0; a < dim(); ++a) w *= weights_[a][axis_index(flat, a)];
  return w;
}

bool GridSpec::is_interior(std::size_t flat, std::size_t margin) const {
  for (std::size_t a = 0; a < dim(); ++a) {
    const std::size_t i = axis_index(flat, a);
    if (i < margin || i + margin >= nodes_[a]) return false;
  }
  return true;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return box_.lower == other.box_.lower && box_.upper == other.box_.upper &&
         nodes_ == other.nodes_;
}

GridField::GridField(GridSpec g)
    : grid(std::move(g)), values(grid.size(), 0.0), mask(grid.size(), 0) {}

std::size_t GridField::masked_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

double GridField::masked_fraction() const noexcept {
  return mask.empty() ? 0.0 : static_cast<double>(masked_count()) / static_cast<double>(mask.size());
}

VectorGridField::VectorGridField(GridSpec g)
    : grid(std::move(g)),
      components(grid.dim(), std::vector<double>(grid.size(), 0.0)),
      mask(grid.size(), 0) {}

std::size_t VectorGridField::masked_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

double VectorGridField::masked_fraction() const noexcept {
  return mask.empty() ? 0.0 : static_cast<double>(masked_count()) / static_cast<double>(mask.size());
}

double integrate(const GridSpec& grid, std::span<const double> values) {
  // Nested Simpson, innermost axis first; summation order is fixed.
  const std::size_t d = grid.dim();
  std::vector<double> current(values.begin(), values.end());
  std::size_t outer = grid.size();
  for (std::size_t a = d; a-- > 0;) {
    const std::size_t n = grid.nodes(a);
    outer /= n;
    const auto& w = grid.axis_weights(a);
    std::vector<double> reduced(outer, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += w[i] * current[o * n + i];
      reduced[o] = acc;
    }
    current.swap(reduced);
  }
  return current.front();
}

double first_difference(const GridSpec& grid, std::span<const double> f, std::size_t flat,
                        std::size_t axis) {
  const std::size_t n = grid.nodes(axis);
  const std::size_t s = grid.stride(axis);
  const std::size_t i = grid.axis_index(flat, axis);
  const double h = grid.spacing(axis);
  if (i == 0) {
    return (-3.0 * f[flat] + 4.0 * f[flat + s] - f[flat + 2 * s]) / (2.0 * h);
  }
  if (i + 1 == n) {
    return (3.0 * f[flat] - 4.0 * f[flat - s] + f[flat - 2 * s]) / (2.0 * h);
  }
  return (f[flat + s] - f[flat - s]) / (2.0 * h);
}

double second_difference(const GridSpec& grid, std::span<const double> f, std::size_t flat,
                         std::size_t axis) {
  const std::size_t n = grid.nodes(axis);
  const std::size_t s = grid.stride(axis);
  const std::size_t i = grid.axis_index(flat, axis);
  const double h2 = grid.spacing(axis) * grid.spacing(axis);
  if (i == 0) {
    return (2.0 * f[flat] - 5.0 * f[flat + s] + 4.0 * f[flat + 2 * s] - f[flat + 3 * s]) / h2;
  }
  if (i + 1 == n) {
    return (2.0 * f[flat] - 5.0 * f[flat - s] + 4.0 * f[flat - 2 * s] - f[flat - 3 * s]) / h2;
  }
  return (f[flat + s] - 2.0 * f[flat] + f[flat - s]) / h2;
}

void stencil_nodes(const GridSpec& grid, std::size_t flat, std::size_t axis, int order,
                   std::vector<std::size_t>& out) {
  out.clear();
  const std::size_t n = grid.nodes(axis);
  const std::size_t s = grid.stride(axis);
  const std::size_t i = grid.axis_index(flat, axis);
  const std::size_t width = order == 1 ? 3 : 4;
  if (i == 0) {
    for (std::size_t k = 0; k < width; ++k) out.push_back(flat + k * s);
  } else if (i + 1 == n) {
    for (std::size_t k = 0; k < width; ++k) out.push_back(flat - k * s);
  } else {
    out.push_back(flat - s);
    out.push_back(flat);
    out.push_back(flat + s);
  }
}

std::vector<double> differentiate(const GridSpec& grid, std::span<const double> f,
                                  std::size_t axis, Exec exec) {
  std::vector<double> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = first_difference(grid, f, static_cast<std::size_t>(k), axis);
  }
  return out;
}

std::vector<double> differentiate2(const GridSpec& grid, std::span<const double> f,
                                   std::size_t axis, Exec exec) {
  std::vector<double> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = second_difference(grid, f, static_cast<std::size_t>(k), axis);
  }
  return out;
}

}  // namespace ergoinv
