#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ergoinv {

enum class Exec { serial, parallel };

// Axis-aligned box [lower_i, upper_i]^d.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
  static Box cube(std::size_t d, double lo, double hi);
  void validate() const;
};

// Uniform tensor grid. Nodes are stored row-major with the last axis fastest.
class GridSpec {
public:
  GridSpec() = default;
  GridSpec(Box box, std::vector<std::size_t> nodes);
  static GridSpec uniform(std::size_t d, double lo, double hi, std::size_t nodes_per_axis);

  std::size_t dim() const noexcept { return nodes_.size(); }
  const Box& box() const noexcept { return box_; }
  double lower(std::size_t axis) const { return box_.lower[axis]; }
  double upper(std::size_t axis) const { return box_.upper[axis]; }
  std::size_t nodes(std::size_t axis) const { return nodes_[axis]; }
  const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept;

  double coordinate(std::size_t axis, std::size_t i) const {
    return box_.lower[axis] + static_cast<double>(i) * spacing_[axis];
  }
  std::size_t axis_index(std::size_t flat, std::size_t axis) const {
    return (flat / strides_[axis]) % nodes_[axis];
  }
  void point(std::size_t flat, std::span<double> out) const;
  std::vector<double> point(std::size_t flat) const;

  // Composite Simpson weight of a node (product over axes); requires odd node counts.
  double quadrature_weight(std::size_t flat) const;
  const std::vector<double>& axis_weights(std::size_t axis) const { return weights_[axis]; }

  // True if the node lies at least `margin` layers away from every face.
  bool is_interior(std::size_t flat, std::size_t margin) const;

  bool operator==(const GridSpec& other) const;

private:
  Box box_;
  std::vector<std::size_t> nodes_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<double>> weights_;
  std::size_t size_ = 0;
};

// Composite Simpson weights for n (odd) nodes with spacing h.
std::vector<double> simpson_weights(std::size_t n, double h);

// Scalar field sampled on a grid; mask[i] != 0 marks nodes excluded from use.
struct GridField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  explicit GridField(GridSpec g = {});
  std::size_t masked_count() const noexcept;
  double masked_fraction() const noexcept;
};

// d-component vector field on a grid (components[a][node]), with a shared mask.
struct VectorGridField {
  GridSpec grid;
  std::vector<std::vector<double>> components;
  std::vector<std::uint8_t> mask;

  explicit VectorGridField(GridSpec g = {});
  std::size_t masked_count() const noexcept;
  double masked_fraction() const noexcept;
};

// Composite Simpson integral of node values over the grid.
double integrate(const GridSpec& grid, std::span<const double> values);

// Second-order finite differences along one axis: central in the interior,
// one-sided second-order at the two boundary layers.
double first_difference(const GridSpec& grid, std::span<const double> f, std::size_t flat,
                        std::size_t axis);
double second_difference(const GridSpec& grid, std::span<const double> f, std::size_t flat,
                         std::size_t axis);
// Stencil node offsets touched by the first/second difference at `flat`.
void stencil_nodes(const GridSpec& grid, std::size_t flat, std::size_t axis, int order,
                   std::vector<std::size_t>& out);

// Applies first_difference to every node (OpenMP when exec == parallel).
std::vector<double> differentiate(const GridSpec& grid, std::span<const double> f,
                                  std::size_t axis, Exec exec = Exec::parallel);
std::vector<double> differentiate2(const GridSpec& grid, std::span<const double> f,
                                   std::size_t axis, Exec exec = Exec::parallel);

}  // namespace ergoinv
