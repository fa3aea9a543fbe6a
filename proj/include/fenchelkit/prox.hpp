#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "fenchelkit/descriptor.hpp"

// Proximal maps prox_{t f}(v) = argmin_x f(x) + ‖x − v‖²/(2t), used by the
// first-order Fenchel–Rockafellar solver.

namespace fenchelkit {

namespace detail {

// Root of a nondecreasing scalar function on [lo, hi], assuming a sign change.
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
  for (int k = 0; k < iters && hi - lo > 0.0; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Radial prox for f(x) = φ(‖x‖₂) with φ' given: x = r v/‖v‖ where
// φ'(r) + (r − ‖v‖)/t = 0 on [0, ‖v‖].
inline Vec radial_prox(const Vec& v, double t, const std::function<double(double)>& dphi) {
  const double nv = v.norm();
  if (nv == 0.0) return v;
  const double r = bisect([&](double r) { return dphi(r) + (r - nv) / t; }, 0.0, nv);
  return v * (r / nv);
}

inline Vec project_l1_ball(const Vec& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> a(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = std::abs(v[i]);
  std::sort(a.begin(), a.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cum += a[k];
    const double th = (cum - radius) / static_cast<double>(k + 1);
    if (k + 1 == a.size() || a[k + 1] <= th) {
      theta = th;
      break;
    }
  }
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = std::copysign(std::max(std::abs(v[i]) - theta, 0.0), v[i]);
  return out;
}

inline Vec prox_sampled_1d(const GridFunction& f, double v, double t) {
  const Grid1D& g = f.grid();
  double best_x = 0.0, best = kInf;
  auto consider = [&](double x, double fx) {
    const double val = fx + (x - v) * (x - v) / (2.0 * t);
    if (val < best) {
      best = val;
      best_x = x;
    }
  };
  for (int i = 0; i < g.size(); ++i) {
    if (f[i].is_finite()) consider(g.node(i), f[i].value());
    if (i + 1 < g.size() && f[i].is_finite() && f[i + 1].is_finite()) {
      const double x0 = g.node(i), x1 = g.node(i + 1);
      const double s = (f[i + 1].value() - f[i].value()) / (x1 - x0);
      const double x = std::clamp(v - t * s, x0, x1);
      consider(x, f[i].value() + s * (x - x0));
    }
  }
  return Vec::Constant(1, best_x);
}

inline Vec prox_sampled_2d(const GridFunction& f, const Vec& v, double t) {
  const Grid1D& gx = f.grid();
  const Grid1D& gy = f.grid_y();
  Vec best_x(2);
  double best = kInf;
  for (int i = 0; i < gx.size(); ++i)
    for (int j = 0; j < gy.size(); ++j) {
      if (f.at(i, j).is_infinite()) continue;
      const double dx = gx.node(i) - v[0], dy = gy.node(j) - v[1];
      const double val = f.at(i, j).value() + (dx * dx + dy * dy) / (2.0 * t);
      if (val < best) {
        best = val;
        best_x << gx.node(i), gy.node(j);
      }
    }
  return best_x;
}

}  // namespace detail

/// prox_{t f}(v), t > 0.
inline Vec prox(const FunctionDescriptor& f, const Vec& v, double t) {
  return std::visit(
      [&](const auto& d) -> Vec {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          Mat M = d.A + Mat::Identity(d.A.rows(), d.A.cols()) / t;
          Eigen::LDLT<Mat> ldlt(M);
          if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw Error("prox: quadratic is not convex at this step size");
          return ldlt.solve(Vec(v / t - d.b));
        } else if constexpr (std::is_same_v<T, NormPower>) {
          return detail::radial_prox(v, t, [&](double r) { return d.weight * std::pow(r, d.p - 1.0); });
        } else if constexpr (std::is_same_v<T, AbsValue>) {
          const double nv = v.norm();
          return nv <= t ? Vec(Vec::Zero(v.size())) : Vec(v * (1.0 - t / nv));
        } else if constexpr (std::is_same_v<T, Entropy>) {
          Vec out(v.size());
          for (Eigen::Index i = 0; i < v.size(); ++i) {
            // log x + 1 + (x − v)/t = 0, solved in log-space.
            const double vi = v[i];
            const double hi = std::log(std::max(1.0, vi) + 1.0);
            const double lx = detail::bisect(
                [&](double l) { return l + 1.0 + (std::exp(l) - vi) / t; }, -745.0, hi);
            out[i] = std::exp(lx);
          }
          return out;
        } else if constexpr (std::is_same_v<T, MinimalSurface>) {
          return detail::radial_prox(v, t, [](double r) { return r / std::sqrt(1.0 + r * r); });
        } else if constexpr (std::is_same_v<T, IndicatorInterval>) {
          return v.cwiseMax(d.lo).cwiseMin(d.hi);
        } else if constexpr (std::is_same_v<T, IndicatorBall>) {
          switch (d.norm) {
            case NormKind::l2: {
              const double nv = v.norm();
              return nv <= d.radius ? v : Vec(v * (d.radius / nv));
            }
            case NormKind::linf:
              return v.cwiseMax(-d.radius).cwiseMin(d.radius);
            default:
              return detail::project_l1_ball(v, d.radius);
          }
        } else if constexpr (std::is_same_v<T, Sampled>) {
          if (d.f.dimension() == 1) return detail::prox_sampled_1d(d.f, v[0], t);
          return detail::prox_sampled_2d(d.f, v, t);
        } else if constexpr (std::is_same_v<T, AffineTilt>) {
          // z = x − s minimizes g(z) + ‖z + s − v + t a‖²/(2t).
          Vec w = v;
          if (d.slope.size() != 0) w -= t * d.slope;
          if (d.shift.size() != 0) w -= d.shift;
          Vec z = prox(*d.inner, w, t);
          if (d.shift.size() != 0) z += d.shift;
          return z;
        } else if constexpr (std::is_same_v<T, ConjugateOf>) {
          // Moreau: prox_{t g*}(v) = v − t prox_{g/t}(v/t).
          return v - t * prox(*d.inner, v / t, 1.0 / t);
        } else {
          throw Error("improper function");
        }
      },
      f.v);
}

}  // namespace fenchelkit
