#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "fenchelkit/descriptor.hpp"
#include "fenchelkit/legendre.hpp"

namespace fenchelkit {

/// Dual grids for sampled conjugates. Absent axes fall back to the default
/// hull-slope range.
struct DualGrid {
  std::optional<Grid1D> x;
  std::optional<Grid1D> y;
};

namespace detail {

inline bool quadratic_has_negative_eigenvalue(const Quadratic& q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q.A);
  return es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

inline GridFunction sampled_conjugate(const GridFunction& f, const DualGrid& dual) {
  if (f.dimension() == 1) {
    Grid1D g = dual.x ? *dual.x : default_dual_grid(f);
    return legendre_1d(f, g).values;
  }
  auto [dx, dy] = default_dual_grids(f);
  return legendre_2d(f, dual.x ? *dual.x : dx, dual.y ? *dual.y : dy).values;
}

}  // namespace detail

inline FunctionDescriptor biconjugate(const FunctionDescriptor& f);

/// Legendre–Fenchel conjugate. Closed forms map to closed forms; sampled
/// functions go through the discrete transform on `dual` (or its default).
inline FunctionDescriptor conjugate(const FunctionDescriptor& f, const DualGrid& dual = {}) {
  return std::visit(
      [&](const auto& d) -> FunctionDescriptor {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (detail::quadratic_has_negative_eigenvalue(d)) return make_infinity();
          Eigen::LLT<Mat> llt(d.A);
          Eigen::SelfAdjointEigenSolver<Mat> es(d.A);
          const double lmin = es.eigenvalues().minCoeff();
          if (llt.info() != Eigen::Success || lmin <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
            return make_conjugate_of(f);
          Mat Ainv = llt.solve(Mat::Identity(d.A.rows(), d.A.cols()));
          Ainv = 0.5 * (Ainv + Ainv.transpose());
          Vec x0 = Ainv * d.b;
          return make_quadratic(std::move(Ainv), -x0, 0.5 * d.b.dot(x0) - d.c);
        } else if constexpr (std::is_same_v<T, NormPower>) {
          const double q = d.p / (d.p - 1.0);
          return make_norm_power(q, std::pow(d.weight, 1.0 - q));
        } else if constexpr (std::is_same_v<T, AbsValue>) {
          return make_ball(1.0, NormKind::l2);
        } else if constexpr (std::is_same_v<T, Sampled>) {
          return make_sampled(detail::sampled_conjugate(d.f, dual));
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          // f*(y) = g*(y − a) + ⟨s, y⟩ − ⟨s, a⟩ − o: a tilt of g* with the roles of shift and slope swapped.
          DualGrid inner_dual = dual;
          const Eigen::Index n = d.slope.size();
          if (inner_dual.x && n >= 1)
            inner_dual.x = Grid1D(inner_dual.x->lo() - d.slope[0], inner_dual.x->hi() - d.slope[0], inner_dual.x->size());
          if (inner_dual.y && n >= 2)
            inner_dual.y = Grid1D(inner_dual.y->lo() - d.slope[1], inner_dual.y->hi() - d.slope[1], inner_dual.y->size());
          FunctionDescriptor g_star = conjugate(*d.inner, inner_dual);
          const double sa = (d.shift.size() == 0 || n == 0) ? 0.0 : d.shift.dot(d.slope);
          Vec new_slope = d.shift.size() != 0 ? d.shift : Vec(Vec::Zero(n));
          return make_tilt(std::move(g_star), std::move(new_slope), -sa - d.offset, d.slope);
        } else if constexpr (std::is_same_v<T, ConjugateOf>) {
          return biconjugate(*d.inner);
        } else if constexpr (std::is_same_v<T, Infinity>) {
          throw Error("improper function");
        } else {
          // Entropy, MinimalSurface, indicators: evaluated through conjugate_value.
          return make_conjugate_of(f);
        }
      },
      f.v);
}

/// Largest convex lsc minorant. Sampled 1D inputs get the exact lower hull at
/// the nodes; sampled 2D inputs go through a double transform on the default
/// dual grid, which can only underestimate.
inline FunctionDescriptor biconjugate(const FunctionDescriptor& f) {
  return std::visit(
      [&](const auto& d) -> FunctionDescriptor {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (detail::quadratic_has_negative_eigenvalue(d)) throw Error("no affine minorant");
          return f;
        } else if constexpr (std::is_same_v<T, Sampled>) {
          if (d.f.dimension() == 1) return make_sampled(convex_envelope(d.f));
          auto [dx, dy] = default_dual_grids(d.f);
          GridFunction fs = legendre_2d(d.f, dx, dy).values;
          return make_sampled(legendre_2d(fs, d.f.grid(), d.f.grid_y()).values);
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          return FunctionDescriptor{AffineTilt{std::make_shared<const FunctionDescriptor>(biconjugate(*d.inner)),
                                               d.slope, d.offset, d.shift}};
        } else if constexpr (std::is_same_v<T, Infinity>) {
          throw Error("improper function");
        } else {
          // Remaining closed forms and conjugates are already convex and lsc.
          return f;
        }
      },
      f.v);
}

/// f(x) + f*(y) − ⟨x, y⟩; +∞ when either term is.
inline ExtReal fenchel_gap(const FunctionDescriptor& f, const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw Error("fenchel_gap: x and y differ in dimension");
  ExtReal fx = evaluate(f, x);
  if (fx.is_infinite()) return ExtReal::infinity();
  ExtReal fy = conjugate_value(f, y);
  if (fy.is_infinite()) return ExtReal::infinity();
  return fx.value() + fy.value() - x.dot(y);
}

inline ExtReal fenchel_gap(const FunctionDescriptor& f, double x, double y) {
  return fenchel_gap(f, Vec::Constant(1, x), Vec::Constant(1, y));
}

struct MinCheck {
  ExtReal value;           // f*(0) = −inf f
  bool unbounded = false;  // f*(0) = +∞, i.e. inf f = −∞
};

inline MinCheck check_min_via_conjugate(const FunctionDescriptor& f) {
  const int d = fixed_dimension(f).value_or(1);
  ExtReal v = conjugate_value(f, Vec::Zero(d));
  return {v, v.is_infinite()};
}

// ---- subdifferential ----------------------------------------------------------

/// ∂f(x) as a closed interval (1D) or as polygon vertices (2D).
struct SubdiffSet {
  int dim = 1;
  double lo = 0.0, hi = -1.0;  // 1D interval; lo > hi encodes the empty set
  std::vector<Eigen::Vector2d> vertices;  // 2D, counterclockwise
  double tol = 0.0;
  bool out_of_domain = false;

  bool empty() const noexcept { return dim == 1 ? lo > hi : vertices.empty(); }

  static SubdiffSet interval(double a, double b, double tol = 0.0) { return {1, a, b, {}, tol, false}; }
  static SubdiffSet none(int dim, bool ood, double tol = 0.0) { return {dim, 0.0, -1.0, {}, tol, ood}; }
};

namespace detail {

inline std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> p) {
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Eigen::Vector2d> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

inline SubdiffSet singleton(const Vec& g) {
  if (g.size() == 1) return SubdiffSet::interval(g[0], g[0]);
  SubdiffSet s{2, 0.0, -1.0, {Eigen::Vector2d(g[0], g[1])}, 0.0, false};
  return s;
}

inline SubdiffSet translate(SubdiffSet s, const Vec& a) {
  if (a.size() == 0) return s;
  if (s.dim == 1) {
    if (!s.empty()) {
      s.lo += a[0];
      s.hi += a[0];
    }
  } else {
    for (auto& v : s.vertices) v += Eigen::Vector2d(a[0], a[1]);
  }
  return s;
}

// {y on the dual grid : f(x) + f*(y) − ⟨x,y⟩ ≤ tol}.
inline SubdiffSet gap_scan(const FunctionDescriptor& f, const Vec& x, double tol, const DualGrid& dual) {
  const ExtReal fx = evaluate(f, x);
  if (fx.is_infinite()) return SubdiffSet::none(static_cast<int>(x.size()), true, tol);
  if (x.size() == 1) {
    Grid1D g = dual.x ? *dual.x : Grid1D(-10.0, 10.0, 2001);
    std::vector<double> vals(g.size(), kInf);
    if (f.is<Sampled>()) {
      auto t = legendre_1d(f.as<Sampled>().f, g);
      for (int j = 0; j < g.size(); ++j) vals[j] = t.values[j].value();
    } else {
      for (int j = 0; j < g.size(); ++j) vals[j] = conjugate_value(f, g.node(j)).to_double();
    }
    double lo = kInf, hi = -kInf;
    for (int j = 0; j < g.size(); ++j) {
      const double y = g.node(j);
      if (fx.value() + vals[j] - x[0] * y <= tol) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    if (lo > hi) return SubdiffSet::none(1, false, tol);
    return SubdiffSet::interval(lo, hi, tol);
  }
  if (x.size() != 2) throw Error("subdifferential: only dimensions 1 and 2 are supported");
  Grid1D gx = dual.x ? *dual.x : Grid1D(-10.0, 10.0, 201);
  Grid1D gy = dual.y ? *dual.y : Grid1D(-10.0, 10.0, 201);
  std::optional<GridFunction> table;
  if (f.is<Sampled>()) table = legendre_2d(f.as<Sampled>().f, gx, gy).values;
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < gx.size(); ++i)
    for (int j = 0; j < gy.size(); ++j) {
      const Vec y{{gx.node(i), gy.node(j)}};
      const ExtReal fy = table ? table->at(i, j) : conjugate_value(f, y);
      if (fy.is_finite() && fx.value() + fy.value() - x.dot(y) <= tol) pts.emplace_back(y[0], y[1]);
    }
  SubdiffSet s{2, 0.0, -1.0, convex_hull_2d(std::move(pts)), tol, false};
  return s;
}

}  // namespace detail

/// {y : f(x) + f*(y) − ⟨x, y⟩ ≤ tol}. Differentiable closed forms return the
/// gradient and the 1D kinks of |·| and of the indicators return exact
/// (possibly unbounded) intervals; everything else is a Fenchel-gap scan over
/// the dual grid (default [-10, 10] per axis for closed forms, the hull-slope
/// range for sampled functions).
inline SubdiffSet subdifferential(const FunctionDescriptor& f, const Vec& x, double tol, const DualGrid& dual = {}) {
  if (!(tol > 0.0)) throw Error("subdifferential: tol must be positive");
  const int n = static_cast<int>(x.size());
  if (evaluate(f, x).is_infinite()) return SubdiffSet::none(n, true, tol);
  return std::visit(
      [&](const auto& d) -> SubdiffSet {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (detail::quadratic_has_negative_eigenvalue(d)) return SubdiffSet::none(n, false, tol);
          return detail::singleton(d.A * x + d.b);
        } else if constexpr (std::is_same_v<T, NormPower>) {
          const double r = x.norm();
          return detail::singleton(r == 0.0 ? Vec(Vec::Zero(n)) : Vec(d.weight * std::pow(r, d.p - 2.0) * x));
        } else if constexpr (std::is_same_v<T, AbsValue>) {
          const double r = x.norm();
          if (r > 0.0) return detail::singleton(x / r);
          if (n == 1) return SubdiffSet::interval(-1.0, 1.0);
          return detail::gap_scan(f, x, tol, dual);
        } else if constexpr (std::is_same_v<T, Entropy>) {
          if ((x.array() <= 0.0).any()) return SubdiffSet::none(n, false, tol);
          return detail::singleton((x.array().log() + 1.0).matrix());
        } else if constexpr (std::is_same_v<T, MinimalSurface>) {
          return detail::singleton(x / std::sqrt(1.0 + x.squaredNorm()));
        } else if constexpr (std::is_same_v<T, IndicatorInterval>) {
          if (n != 1) return detail::gap_scan(f, x, tol, dual);
          const bool at_lo = x[0] == d.lo[0], at_hi = x[0] == d.hi[0];
          return SubdiffSet::interval(at_lo ? -kInf : 0.0, at_hi ? kInf : 0.0);
        } else if constexpr (std::is_same_v<T, IndicatorBall>) {
          if (n != 1) return detail::gap_scan(f, x, tol, dual);
          const bool at_lo = x[0] == -d.radius, at_hi = x[0] == d.radius;
          return SubdiffSet::interval(at_lo ? -kInf : 0.0, at_hi ? kInf : 0.0);
        } else if constexpr (std::is_same_v<T, Sampled>) {
          DualGrid g = dual;
          if (d.f.dimension() == 1 && !g.x) g.x = default_dual_grid(d.f);
          if (d.f.dimension() == 2 && (!g.x || !g.y)) {
            auto [dx, dy] = default_dual_grids(d.f);
            if (!g.x) g.x = dx;
            if (!g.y) g.y = dy;
          }
          return detail::gap_scan(f, x, tol, g);
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          if (d.slope.size() != 0 && (d.slope.size() != x.size()))
            throw Error("dimension mismatch: affine tilt");
          SubdiffSet inner = subdifferential(*d.inner, detail::shifted(x, d.shift), tol, dual);
          return detail::translate(std::move(inner), d.slope);
        } else {
          return detail::gap_scan(f, x, tol, dual);
        }
      },
      f.v);
}

inline SubdiffSet subdifferential(const FunctionDescriptor& f, double x, double tol, const DualGrid& dual = {}) {
  return subdifferential(f, Vec::Constant(1, x), tol, dual);
}

}  // namespace fenchelkit
