#pragma once

#include <cmath>
#include <vector>

#include "fenchelkit/error.hpp"

namespace fenchelkit {

/// Uniform node grid with spacing h in both axes, an admissible region Ω and
/// a zero-cost set Σ ⊂ Ω. Node (i, j) sits at (x0 + i h, y0 + j h) and has
/// flat index j·nx + i. A path domain is ny = 1.
struct GridDomain {
  int nx = 0, ny = 1;
  double h = 1.0;
  double x0 = 0.0, y0 = 0.0;
  std::vector<char> omega;  // per node
  std::vector<char> sigma;  // per node; all zero means Σ = ∅
  std::vector<double> f;    // per node source density; may be empty when unused

  GridDomain() = default;
  GridDomain(int nx_, int ny_, double h_, double x0_ = 0.0, double y0_ = 0.0)
      : nx(nx_), ny(ny_), h(h_), x0(x0_), y0(y0_), omega(nodes(), 1), sigma(nodes(), 0), f(nodes(), 0.0) {
    validate();
  }

  int nodes() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  int dim() const { return ny == 1 ? 1 : 2; }
  double cell_measure() const { return dim() == 1 ? h : h * h; }
  double x(int k) const { return x0 + (k % nx) * h; }
  double y(int k) const { return y0 + (k / nx) * h; }
  bool in_omega(int k) const { return omega[k] != 0; }
  bool in_sigma(int k) const { return sigma[k] != 0; }
  bool sigma_empty() const {
    for (char s : sigma)
      if (s) return false;
    return true;
  }

  void validate() const {
    if (nx < 2 || ny < 1) throw Error("GridDomain: need nx >= 2 and ny >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw Error("GridDomain: spacing must be positive");
    const std::size_t n = static_cast<std::size_t>(nodes());
    if (omega.size() != n || sigma.size() != n) throw Error("GridDomain: mask size mismatch");
    if (!f.empty() && f.size() != n) throw Error("GridDomain: source size mismatch");
    for (std::size_t k = 0; k < n; ++k)
      if (sigma[k] && !omega[k]) throw Error("GridDomain: sigma must lie inside omega");
    for (double v : f)
      if (!std::isfinite(v)) throw Error("GridDomain: source must be finite");
  }

  /// Snap a point to its node, within 1e−9·h; −1 if it is not a grid node.
  int locate(double px, double py = 0.0) const {
    const double si = (px - x0) / h, sj = ny == 1 ? 0.0 : (py - y0) / h;
    const double ri = std::round(si), rj = std::round(sj);
    if (std::abs(si - ri) > 1e-9 || std::abs(sj - rj) > 1e-9) return -1;
    const int i = static_cast<int>(ri), j = static_cast<int>(rj);
    if (i < 0 || i >= nx || j < 0 || j >= ny) return -1;
    return index(i, j);
  }

  // Diagonal moves and triangles need the whole cell inside Ω.
  bool cell_in_omega(int i, int j) const {
    return i + 1 < nx && j + 1 < ny && omega[index(i, j)] && omega[index(i + 1, j)] && omega[index(i, j + 1)] &&
           omega[index(i + 1, j + 1)];
  }
};

}  // namespace fenchelkit
