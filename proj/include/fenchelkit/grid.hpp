#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "fenchelkit/error.hpp"
#include "fenchelkit/ext_real.hpp"

namespace fenchelkit {

/// Uniform node set lo = x_0 < x_1 < ... < x_{n-1} = hi.
class Grid1D {
 public:
  Grid1D(double lo, double hi, int n) : lo_(lo), hi_(hi), n_(n) {
    if (!(lo < hi)) throw Error("Grid1D: requires lo < hi");
    if (n < 2) throw Error("Grid1D: requires at least 2 nodes");
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  int size() const noexcept { return n_; }
  double spacing() const noexcept { return (hi_ - lo_) / (n_ - 1); }

  double node(int i) const noexcept {
    // Pin the last node so that hi is reproduced exactly.
    return i == n_ - 1 ? hi_ : lo_ + i * spacing();
  }

  std::vector<double> nodes() const {
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = node(i);
    return out;
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double lo_;
  double hi_;
  int n_;
};

/// Extended-real samples on a 1D grid or on the tensor product of two grids.
/// In 2D, values are stored row-major with the first axis outermost:
/// value(i, j) = values[i * ny + j].
class GridFunction {
 public:
  GridFunction(Grid1D grid, std::vector<ExtReal> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.size())
      throw Error("GridFunction: value count does not match node count");
    check_proper();
  }

  GridFunction(Grid1D gx, Grid1D gy, std::vector<ExtReal> values)
      : grid_(std::move(gx)), grid_y_(std::move(gy)), values_(std::move(values)) {
    if (static_cast<long>(values_.size()) != static_cast<long>(grid_.size()) * grid_y_->size())
      throw Error("GridFunction: value count does not match node count");
    check_proper();
  }

  int dimension() const noexcept { return grid_y_ ? 2 : 1; }
  const Grid1D& grid() const noexcept { return grid_; }
  const Grid1D& grid_y() const {
    if (!grid_y_) throw Error("GridFunction: not two-dimensional");
    return *grid_y_;
  }
  const std::vector<ExtReal>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  const ExtReal& operator[](std::size_t k) const { return values_[k]; }
  const ExtReal& at(int i, int j) const { return values_[static_cast<std::size_t>(i) * grid_y_->size() + j]; }

 private:
  void check_proper() const {
    for (const auto& v : values_)
      if (v.is_finite()) return;
    throw Error("improper function");
  }

  Grid1D grid_;
  std::optional<Grid1D> grid_y_;
  std::vector<ExtReal> values_;
};

}  // namespace fenchelkit
