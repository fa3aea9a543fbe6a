#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "fenchelkit/descriptor.hpp"
#include "fenchelkit/grid.hpp"

// Discrete Legendre transform: lower hull of the finite graph points, then a
// merge of the sorted hull slopes against the sorted dual nodes. Exact at the
// dual nodes for the point-set function, O(n + m) after the hull.

namespace fenchelkit {

struct LegendreResult {
  GridFunction values;
  std::vector<int> argsup;  // primal node attaining the sup; smallest index on ties
};

namespace detail {

struct RawTransform {
  std::vector<double> values;
  std::vector<int> argsup;
};

// Requires at least one finite entry in f.
inline RawTransform legendre_raw(const Grid1D& g, const std::vector<ExtReal>& f, const Grid1D& dual) {
  std::vector<int> hull;
  auto x = [&](int i) { return g.node(i); };
  for (int i = 0; i < g.size(); ++i) {
    if (f[i].is_infinite()) continue;
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull.back();
      const double cr = (x(b) - x(a)) * (f[i].value() - f[a].value()) - (f[b].value() - f[a].value()) * (x(i) - x(a));
      if (cr > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  if (hull.empty()) throw Error("improper function");

  RawTransform out;
  out.values.resize(dual.size());
  out.argsup.resize(dual.size());
  std::size_t k = 0;
  for (int j = 0; j < dual.size(); ++j) {
    const double y = dual.node(j);
    while (k + 1 < hull.size()) {
      const int a = hull[k], b = hull[k + 1];
      const double slope = (f[b].value() - f[a].value()) / (x(b) - x(a));
      if (!(slope < y)) break;
      ++k;
    }
    out.argsup[j] = hull[k];
    out.values[j] = x(hull[k]) * y - f[hull[k]].value();
  }
  return out;
}

inline std::vector<ExtReal> to_ext(const std::vector<double>& v) { return {v.begin(), v.end()}; }

inline Grid1D widened(double smin, double smax, int n) {
  if (!(smin < smax)) return Grid1D(smin - 1.0, smin + 1.0, n);
  const double pad = 0.05 * (smax - smin);
  return Grid1D(smin - pad, smax + pad, n);
}

// Slope range of the lower hull of a 1D sample set; nullopt for a single finite node.
inline std::optional<std::pair<double, double>> hull_slope_range(const Grid1D& g, const std::vector<ExtReal>& f) {
  GridFunction gf(g, f);
  std::vector<int> h = lower_hull(gf);
  if (h.size() < 2) return std::nullopt;
  auto slope = [&](std::size_t k) {
    return (f[h[k + 1]].value() - f[h[k]].value()) / (g.node(h[k + 1]) - g.node(h[k]));
  };
  return std::make_pair(slope(0), slope(h.size() - 2));
}

}  // namespace detail

/// Hull slope range widened by 10% of its width, same node count. A single
/// finite node yields [-1, 1].
inline Grid1D default_dual_grid(const GridFunction& f) {
  const int n = f.grid().size();
  auto r = detail::hull_slope_range(f.grid(), f.values());
  if (!r) return Grid1D(-1.0, 1.0, n);
  return detail::widened(r->first, r->second, n);
}

/// Per-axis ranges of the finite forward differences, widened as in 1D.
inline std::pair<Grid1D, Grid1D> default_dual_grids(const GridFunction& f) {
  const Grid1D& gx = f.grid();
  const Grid1D& gy = f.grid_y();
  double lx = kInf, ux = -kInf, ly = kInf, uy = -kInf;
  for (int i = 0; i < gx.size(); ++i)
    for (int j = 0; j < gy.size(); ++j) {
      if (f.at(i, j).is_infinite()) continue;
      if (i + 1 < gx.size() && f.at(i + 1, j).is_finite()) {
        const double s = (f.at(i + 1, j).value() - f.at(i, j).value()) / gx.spacing();
        lx = std::min(lx, s);
        ux = std::max(ux, s);
      }
      if (j + 1 < gy.size() && f.at(i, j + 1).is_finite()) {
        const double s = (f.at(i, j + 1).value() - f.at(i, j).value()) / gy.spacing();
        ly = std::min(ly, s);
        uy = std::max(uy, s);
      }
    }
  auto axis = [](double lo, double hi, int n) {
    if (lo > hi) return Grid1D(-1.0, 1.0, n);
    return detail::widened(lo, hi, n);
  };
  return {axis(lx, ux, gx.size()), axis(ly, uy, gy.size())};
}

/// f*(y_j) = max_i x_i y_j − f_i at every dual node.
inline LegendreResult legendre_1d(const GridFunction& f, const Grid1D& dual) {
  if (f.dimension() != 1) throw Error("legendre_1d: function is not 1D");
  auto raw = detail::legendre_raw(f.grid(), f.values(), dual);
  return {GridFunction(dual, detail::to_ext(raw.values)), std::move(raw.argsup)};
}

/// 2D transform factored into row transforms followed by column transforms.
/// Exact at the dual nodes. argsup holds flattened primal indices.
inline LegendreResult legendre_2d(const GridFunction& f, const Grid1D& dx, const Grid1D& dy) {
  if (f.dimension() != 2) throw Error("legendre_2d: function is not 2D");
  const Grid1D& gx = f.grid();
  const Grid1D& gy = f.grid_y();
  const int nx = gx.size(), ny = gy.size();

  // G(i, k) = −(f(i, ·))*(dy_k), +∞ for rows with no finite entry.
  std::vector<ExtReal> G(static_cast<std::size_t>(nx) * dy.size(), ExtReal::infinity());
  std::vector<int> inner_arg(G.size(), -1);
  std::vector<ExtReal> row(ny);
  for (int i = 0; i < nx; ++i) {
    bool any = false;
    for (int j = 0; j < ny; ++j) {
      row[j] = f.at(i, j);
      any = any || row[j].is_finite();
    }
    if (!any) continue;
    auto r = detail::legendre_raw(gy, row, dy);
    for (int k = 0; k < dy.size(); ++k) {
      G[static_cast<std::size_t>(i) * dy.size() + k] = -r.values[k];
      inner_arg[static_cast<std::size_t>(i) * dy.size() + k] = r.argsup[k];
    }
  }

  std::vector<ExtReal> out(static_cast<std::size_t>(dx.size()) * dy.size());
  std::vector<int> arg(out.size());
  std::vector<ExtReal> col(nx);
  for (int k = 0; k < dy.size(); ++k) {
    for (int i = 0; i < nx; ++i) col[i] = G[static_cast<std::size_t>(i) * dy.size() + k];
    auto r = detail::legendre_raw(gx, col, dx);
    for (int l = 0; l < dx.size(); ++l) {
      const std::size_t idx = static_cast<std::size_t>(l) * dy.size() + k;
      const int i = r.argsup[l];
      out[idx] = r.values[l];
      arg[idx] = i * ny + inner_arg[static_cast<std::size_t>(i) * dy.size() + k];
    }
  }
  return {GridFunction(dx, dy, std::move(out)), std::move(arg)};
}

/// Lower convex envelope of the finite graph points, evaluated at the primal
/// nodes; +∞ outside the hull of the finite nodes.
inline GridFunction convex_envelope(const GridFunction& f) {
  if (f.dimension() != 1) throw Error("convex_envelope: function is not 1D");
  return GridFunction(f.grid(), detail::hull_on_nodes(f));
}

}  // namespace fenchelkit
