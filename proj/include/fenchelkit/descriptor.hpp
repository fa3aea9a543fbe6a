#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fenchelkit/error.hpp"
#include "fenchelkit/ext_real.hpp"
#include "fenchelkit/grid.hpp"

namespace fenchelkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NormKind { l1, l2, linf };

inline NormKind dual_norm(NormKind k) noexcept {
  switch (k) {
    case NormKind::l1: return NormKind::linf;
    case NormKind::linf: return NormKind::l1;
    default: return NormKind::l2;
  }
}

inline double norm_of(const Vec& v, NormKind k) {
  switch (k) {
    case NormKind::l1: return v.lpNorm<1>();
    case NormKind::linf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
    default: return v.norm();
  }
}

struct FunctionDescriptor;
using DescriptorPtr = std::shared_ptr<const FunctionDescriptor>;

/// ½ xᵀAx + bᵀx + c.
struct Quadratic {
  Mat A;
  Vec b;
  double c = 0.0;
};

/// (weight/p) ‖x‖₂^p.
struct NormPower {
  double p = 2.0;
  double weight = 1.0;
};

/// ‖x‖₂.
struct AbsValue {};

/// Σ x_i log x_i on the nonnegative orthant, 0 log 0 = 0.
struct Entropy {};

/// √(1 + ‖x‖₂²).
struct MinimalSurface {};

/// Indicator of the box Π [lo_i, hi_i]; bounds may be infinite.
struct IndicatorInterval {
  Vec lo;
  Vec hi;
};

/// Indicator of {‖x‖ ≤ radius} in the tagged norm.
struct IndicatorBall {
  double radius = 1.0;
  NormKind norm = NormKind::l2;
};

/// Grid samples, linearly (1D) or bilinearly (2D) interpolated between nodes
/// and +∞ off the grid.
struct Sampled {
  GridFunction f;
};

/// x ↦ inner(x − shift) + ⟨slope, x⟩ + offset. An empty shift means zero.
struct AffineTilt {
  DescriptorPtr inner;
  Vec slope;
  double offset = 0.0;
  Vec shift;
};

/// The conjugate inner*, evaluated in closed form.
struct ConjugateOf {
  DescriptorPtr inner;
};

/// The constant +∞.
struct Infinity {};

struct FunctionDescriptor {
  using Variant = std::variant<Quadratic, NormPower, AbsValue, Entropy, MinimalSurface, IndicatorInterval,
                               IndicatorBall, Sampled, AffineTilt, ConjugateOf, Infinity>;
  Variant v;

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(v);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v);
  }
};

// ---- validated constructors -------------------------------------------------

inline FunctionDescriptor make_quadratic(Mat A, Vec b, double c = 0.0) {
  if (A.rows() != A.cols() || A.rows() == 0) throw Error("Quadratic: A must be square");
  if (b.size() != A.rows()) throw Error("Quadratic: b has the wrong length");
  if ((A - A.transpose()).norm() > 1e-12) throw Error("Quadratic: A must be symmetric");
  if (!A.allFinite() || !b.allFinite() || !std::isfinite(c)) throw Error("Quadratic: entries must be finite");
  return {Quadratic{std::move(A), std::move(b), c}};
}

inline FunctionDescriptor make_quadratic(double a, double b = 0.0, double c = 0.0) {
  return make_quadratic(Mat::Constant(1, 1, a), Vec::Constant(1, b), c);
}

inline FunctionDescriptor make_norm_power(double p, double weight = 1.0) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error("NormPower: exponent must be finite and > 1");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw Error("NormPower: weight must be positive");
  return {NormPower{p, weight}};
}

inline FunctionDescriptor make_abs() { return {AbsValue{}}; }
inline FunctionDescriptor make_entropy() { return {Entropy{}}; }
inline FunctionDescriptor make_minimal_surface() { return {MinimalSurface{}}; }
inline FunctionDescriptor make_infinity() { return {Infinity{}}; }

inline FunctionDescriptor make_interval(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw Error("IndicatorInterval: bound lengths differ");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i])) throw Error("IndicatorInterval: NaN bound");
    if (!(lo[i] <= hi[i]) || lo[i] == kInf || hi[i] == -kInf)
      throw Error("IndicatorInterval: requires a <= b");
  }
  return {IndicatorInterval{std::move(lo), std::move(hi)}};
}

inline FunctionDescriptor make_interval(double lo, double hi) {
  return make_interval(Vec::Constant(1, lo), Vec::Constant(1, hi));
}

inline FunctionDescriptor make_ball(double radius, NormKind k = NormKind::l2) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw Error("IndicatorBall: radius must be finite and >= 0");
  return {IndicatorBall{radius, k}};
}

inline FunctionDescriptor make_sampled(GridFunction f) { return {Sampled{std::move(f)}}; }

inline FunctionDescriptor make_tilt(FunctionDescriptor inner, Vec slope, double offset = 0.0, Vec shift = {}) {
  if (shift.size() != 0 && shift.size() != slope.size())
    throw Error("AffineTilt: shift and slope lengths differ");
  return {AffineTilt{std::make_shared<const FunctionDescriptor>(std::move(inner)), std::move(slope), offset,
                     std::move(shift)}};
}

inline FunctionDescriptor make_conjugate_of(FunctionDescriptor inner) {
  return {ConjugateOf{std::make_shared<const FunctionDescriptor>(std::move(inner))}};
}

/// The gauge x ↦ s‖x‖ written as the support function of the dual ball.
inline FunctionDescriptor make_norm(NormKind k, double scale = 1.0) {
  return make_conjugate_of(make_ball(scale, dual_norm(k)));
}

// ---- introspection ----------------------------------------------------------

/// Ambient dimension if the variant fixes one; dimension-free variants yield nullopt.
inline std::optional<int> fixed_dimension(const FunctionDescriptor& f) {
  return std::visit(
      [](const auto& d) -> std::optional<int> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return static_cast<int>(d.A.rows());
        } else if constexpr (std::is_same_v<T, IndicatorInterval>) {
          return static_cast<int>(d.lo.size());
        } else if constexpr (std::is_same_v<T, Sampled>) {
          return d.f.dimension();
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          if (d.slope.size() > 0) return static_cast<int>(d.slope.size());
          return fixed_dimension(*d.inner);
        } else if constexpr (std::is_same_v<T, ConjugateOf>) {
          return fixed_dimension(*d.inner);
        } else {
          return std::nullopt;
        }
      },
      f.v);
}

inline std::string variant_name(const FunctionDescriptor& f) {
  static const char* names[] = {"quadratic", "norm_power",  "abs",          "entropy",      "minimal_surface",
                                "indicator_interval", "indicator_ball", "sampled", "affine_tilt", "conjugate_of",
                                "infinity"};
  return names[f.v.index()];
}

namespace detail {

inline Vec shifted(const Vec& x, const Vec& s) { return s.size() == 0 ? x : Vec(x - s); }

// Locate x in a grid: returns (segment index k, local weight t in [0,1]) or nullopt
// if x is outside [lo - tol, hi + tol].
inline std::optional<std::pair<int, double>> locate(const Grid1D& g, double x, double tol) {
  if (x < g.lo() - tol || x > g.hi() + tol) return std::nullopt;
  const double h = g.spacing();
  double s = (std::clamp(x, g.lo(), g.hi()) - g.lo()) / h;
  int k = static_cast<int>(std::floor(s));
  k = std::clamp(k, 0, g.size() - 2);
  double t = std::clamp(s - k, 0.0, 1.0);
  // Snap to nodes so that node evaluations never touch infinite neighbours.
  if (t < 1e-12) t = 0.0;
  if (t > 1.0 - 1e-12) t = 1.0;
  return std::make_pair(k, t);
}

inline ExtReal lerp(const ExtReal& a, const ExtReal& b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  if (a.is_infinite() || b.is_infinite()) return ExtReal::infinity();
  return (1.0 - t) * a.value() + t * b.value();
}

inline ExtReal eval_sampled(const GridFunction& f, const Vec& x, double tol) {
  if (f.dimension() == 1) {
    if (x.size() != 1) throw Error("dimension mismatch: sampled function is 1D");
    auto loc = locate(f.grid(), x[0], tol);
    if (!loc) return ExtReal::infinity();
    auto [k, t] = *loc;
    return lerp(f[k], f[k + 1], t);
  }
  if (x.size() != 2) throw Error("dimension mismatch: sampled function is 2D");
  auto lx = locate(f.grid(), x[0], tol);
  auto ly = locate(f.grid_y(), x[1], tol);
  if (!lx || !ly) return ExtReal::infinity();
  auto [i, s] = *lx;
  auto [j, t] = *ly;
  ExtReal lo = lerp(f.at(i, j), f.at(i, j + 1), t);
  ExtReal hi = lerp(f.at(i + 1, j), f.at(i + 1, j + 1), t);
  return lerp(lo, hi, s);
}

// Support function of a box: Σ max(lo_i y_i, hi_i y_i). An infinite bound
// contributes +∞ unless |y_i| ≤ tol.
inline ExtReal box_support(const Vec& lo, const Vec& hi, const Vec& y, double tol) {
  if (y.size() != lo.size()) throw Error("dimension mismatch: interval indicator");
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > tol) {
      if (hi[i] == kInf) return ExtReal::infinity();
      s += hi[i] * y[i];
    } else if (y[i] < -tol) {
      if (lo[i] == -kInf) return ExtReal::infinity();
      s += lo[i] * y[i];
    } else if (std::isfinite(lo[i]) && std::isfinite(hi[i])) {
      s += std::max(lo[i] * y[i], hi[i] * y[i]);
    }
  }
  return s;
}

// Upper convex hull of the finite nodes of a 1D grid function, interpolated
// back to the nodes. Used to evaluate (f*)* without a dual grid.
inline std::vector<ExtReal> hull_on_nodes(const GridFunction& f);

}  // namespace detail

/// f(x). `feas_tol` relaxes indicator constraints, for iterates of
/// first-order methods that are feasible only up to round-off.
inline ExtReal evaluate(const FunctionDescriptor& f, const Vec& x, double feas_tol = 0.0);

/// f*(y) in closed form. Sampled functions use the exact point-set transform
/// max_i ⟨x_i, y⟩ − f_i over their finite nodes.
inline ExtReal conjugate_value(const FunctionDescriptor& f, const Vec& y, double feas_tol = 0.0);

inline ExtReal evaluate(const FunctionDescriptor& f, double x, double feas_tol = 0.0) {
  return evaluate(f, Vec::Constant(1, x), feas_tol);
}
inline ExtReal conjugate_value(const FunctionDescriptor& f, double y, double feas_tol = 0.0) {
  return conjugate_value(f, Vec::Constant(1, y), feas_tol);
}

// ---- definitions ------------------------------------------------------------

inline ExtReal evaluate(const FunctionDescriptor& f, const Vec& x, double feas_tol) {
  return std::visit(
      [&](const auto& d) -> ExtReal {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (x.size() != d.A.rows()) throw Error("dimension mismatch: quadratic");
          return 0.5 * x.dot(d.A * x) + d.b.dot(x) + d.c;
        } else if constexpr (std::is_same_v<T, NormPower>) {
          return d.weight / d.p * std::pow(x.norm(), d.p);
        } else if constexpr (std::is_same_v<T, AbsValue>) {
          return x.norm();
        } else if constexpr (std::is_same_v<T, Entropy>) {
          double s = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (x[i] < -feas_tol) return ExtReal::infinity();
            if (x[i] > 0.0) s += x[i] * std::log(x[i]);
          }
          return s;
        } else if constexpr (std::is_same_v<T, MinimalSurface>) {
          return std::sqrt(1.0 + x.squaredNorm());
        } else if constexpr (std::is_same_v<T, IndicatorInterval>) {
          if (x.size() != d.lo.size()) throw Error("dimension mismatch: interval indicator");
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x[i] < d.lo[i] - feas_tol || x[i] > d.hi[i] + feas_tol) return ExtReal::infinity();
          return 0.0;
        } else if constexpr (std::is_same_v<T, IndicatorBall>) {
          return norm_of(x, d.norm) <= d.radius + feas_tol ? ExtReal(0.0) : ExtReal::infinity();
        } else if constexpr (std::is_same_v<T, Sampled>) {
          return detail::eval_sampled(d.f, x, feas_tol);
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          ExtReal g = evaluate(*d.inner, detail::shifted(x, d.shift), feas_tol);
          double lin = d.slope.size() == 0 ? 0.0 : d.slope.dot(x);
          return g + ExtReal(lin + d.offset);
        } else if constexpr (std::is_same_v<T, ConjugateOf>) {
          return conjugate_value(*d.inner, x, feas_tol);
        } else {
          return ExtReal::infinity();
        }
      },
      f.v);
}

inline ExtReal conjugate_value(const FunctionDescriptor& f, const Vec& y, double feas_tol) {
  return std::visit(
      [&](const auto& d) -> ExtReal {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (y.size() != d.A.rows()) throw Error("dimension mismatch: quadratic");
          Eigen::SelfAdjointEigenSolver<Mat> es(d.A);
          const Vec& ev = es.eigenvalues();
          const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
          if (ev.minCoeff() < -1e-12 * scale) return ExtReal::infinity();
          // z = Qᵀ(y − b); components on the kernel of A must vanish.
          Vec z = es.eigenvectors().transpose() * (y - d.b);
          double s = 0.0;
          for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (ev[i] <= 1e-12 * scale) {
              if (std::abs(z[i]) > std::max(feas_tol, 1e-9 * std::max(1.0, y.norm()))) return ExtReal::infinity();
            } else {
              s += z[i] * z[i] / ev[i];
            }
          }
          return 0.5 * s - d.c;
        } else if constexpr (std::is_same_v<T, NormPower>) {
          const double q = d.p / (d.p - 1.0);
          return std::pow(d.weight, 1.0 - q) / q * std::pow(y.norm(), q);
        } else if constexpr (std::is_same_v<T, AbsValue>) {
          return y.norm() <= 1.0 + feas_tol ? ExtReal(0.0) : ExtReal::infinity();
        } else if constexpr (std::is_same_v<T, Entropy>) {
          double s = 0.0;
          for (Eigen::Index i = 0; i < y.size(); ++i) s += std::exp(y[i] - 1.0);
          return s;
        } else if constexpr (std::is_same_v<T, MinimalSurface>) {
          const double r2 = y.squaredNorm();
          if (r2 > 1.0 + feas_tol) return ExtReal::infinity();
          return -std::sqrt(std::max(0.0, 1.0 - r2));
        } else if constexpr (std::is_same_v<T, IndicatorInterval>) {
          return detail::box_support(d.lo, d.hi, y, feas_tol);
        } else if constexpr (std::is_same_v<T, IndicatorBall>) {
          return d.radius * norm_of(y, dual_norm(d.norm));
        } else if constexpr (std::is_same_v<T, Sampled>) {
          const GridFunction& g = d.f;
          double best = -kInf;
          if (g.dimension() == 1) {
            if (y.size() != 1) throw Error("dimension mismatch: sampled function is 1D");
            for (int i = 0; i < g.grid().size(); ++i)
              if (g[i].is_finite()) best = std::max(best, g.grid().node(i) * y[0] - g[i].value());
          } else {
            if (y.size() != 2) throw Error("dimension mismatch: sampled function is 2D");
            const int ny = g.grid_y().size();
            for (int i = 0; i < g.grid().size(); ++i)
              for (int j = 0; j < ny; ++j)
                if (g.at(i, j).is_finite())
                  best = std::max(best, g.grid().node(i) * y[0] + g.grid_y().node(j) * y[1] - g.at(i, j).value());
          }
          return best;
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          // f*(y) = g*(y − a) + ⟨s, y − a⟩ − o
          Vec ya = d.slope.size() == 0 ? y : Vec(y - d.slope);
          double lin = d.shift.size() == 0 ? 0.0 : d.shift.dot(ya);
          return conjugate_value(*d.inner, ya, feas_tol) + ExtReal(lin - d.offset);
        } else if constexpr (std::is_same_v<T, ConjugateOf>) {
          // g** = g for the closed forms, which are all convex and lsc.
          const FunctionDescriptor& g = *d.inner;
          if (g.is<Quadratic>()) {
            Eigen::SelfAdjointEigenSolver<Mat> es(g.as<Quadratic>().A);
            if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
              throw Error("no affine minorant");
          }
          if (g.is<Infinity>()) throw Error("improper function");
          if (g.is<Sampled>() && g.as<Sampled>().f.dimension() == 1) {
            const GridFunction& sf = g.as<Sampled>().f;
            GridFunction hull(sf.grid(), detail::hull_on_nodes(sf));
            return detail::eval_sampled(hull, y, feas_tol);
          }
          if (g.is<Sampled>()) throw Error("2D sampled biconjugate requires a dual grid");
          return evaluate(g, y, feas_tol);
        } else {
          throw Error("improper function");
        }
      },
      f.v);
}

/// Sample a descriptor on the nodes of a 1D grid.
inline GridFunction sample(const FunctionDescriptor& f, const Grid1D& g) {
  std::vector<ExtReal> v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = evaluate(f, g.node(i));
  return GridFunction(g, std::move(v));
}

/// Sample a descriptor on the tensor grid gx × gy.
inline GridFunction sample(const FunctionDescriptor& f, const Grid1D& gx, const Grid1D& gy) {
  std::vector<ExtReal> v;
  v.reserve(static_cast<std::size_t>(gx.size()) * gy.size());
  for (int i = 0; i < gx.size(); ++i)
    for (int j = 0; j < gy.size(); ++j) v.push_back(evaluate(f, Vec{{gx.node(i), gy.node(j)}}));
  return GridFunction(gx, gy, std::move(v));
}

namespace detail {

// Lower hull vertex indices of the finite points (x_i, f_i), left to right.
inline std::vector<int> lower_hull(const GridFunction& f) {
  std::vector<int> h;
  const Grid1D& g = f.grid();
  auto cross = [&](int a, int b, int c) {
    const double xa = g.node(a), xb = g.node(b), xc = g.node(c);
    const double fa = f[a].value(), fb = f[b].value(), fc = f[c].value();
    return (xb - xa) * (fc - fa) - (fb - fa) * (xc - xa);
  };
  for (int i = 0; i < g.size(); ++i) {
    if (f[i].is_infinite()) continue;
    while (h.size() >= 2 && cross(h[h.size() - 2], h.back(), i) <= 0.0) h.pop_back();
    h.push_back(i);
  }
  return h;
}

inline std::vector<ExtReal> hull_on_nodes(const GridFunction& f) {
  const Grid1D& g = f.grid();
  std::vector<int> h = lower_hull(f);
  std::vector<ExtReal> out(g.size(), ExtReal::infinity());
  for (std::size_t k = 0; k < h.size(); ++k) {
    out[h[k]] = f[h[k]];
    if (k + 1 == h.size()) break;
    const int a = h[k], b = h[k + 1];
    const double xa = g.node(a), xb = g.node(b);
    const double fa = f[a].value(), fb = f[b].value();
    for (int i = a + 1; i < b; ++i) {
      const double t = (g.node(i) - xa) / (xb - xa);
      out[i] = (1.0 - t) * fa + t * fb;
    }
  }
  return out;
}

}  // namespace detail

}  // namespace fenchelkit
