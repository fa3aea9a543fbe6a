#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "fenchelkit/descriptor.hpp"

namespace fenchelkit {

/// min f(x) subject to g_j(x) ≤ 0, searched over a box of dimension ≤ 2.
/// The box grids drive the Slater scan and the coarse stage of every inner
/// minimization; refinement below the grid spacing is by zooming.
struct ConvexProgram {
  FunctionDescriptor f;
  std::vector<FunctionDescriptor> g;
  std::vector<Grid1D> box;

  ConvexProgram(FunctionDescriptor f_, std::vector<FunctionDescriptor> g_, std::vector<Grid1D> box_)
      : f(std::move(f_)), g(std::move(g_)), box(std::move(box_)) {
    if (box.empty() || box.size() > 2) throw Error("ConvexProgram: dimension must be 1 or 2");
    check_convex(f, "objective");
    for (const auto& gj : g) check_convex(gj, "constraint");
  }

  int dim() const { return static_cast<int>(box.size()); }

 private:
  // Sampled descriptors must have nonnegative second differences along each axis.
  static void check_convex(const FunctionDescriptor& d, const char* what) {
    if (!d.is<Sampled>()) return;
    const GridFunction& s = d.as<Sampled>().f;
    auto second = [](const ExtReal& a, const ExtReal& b, const ExtReal& c) {
      if (a.is_infinite() || b.is_infinite() || c.is_infinite()) return 0.0;
      return a.value() - 2.0 * b.value() + c.value();
    };
    auto scale = [](const ExtReal& b) { return 1e-12 * (1.0 + std::abs(b.to_double())); };
    if (s.dimension() == 1) {
      for (std::size_t i = 1; i + 1 < s.size(); ++i)
        if (second(s[i - 1], s[i], s[i + 1]) < -scale(s[i]))
          throw Error(std::string("ConvexProgram: ") + what + " is not convex");
      return;
    }
    const int nx = s.grid().size(), ny = s.grid_y().size();
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        if (i > 0 && i + 1 < nx && second(s.at(i - 1, j), s.at(i, j), s.at(i + 1, j)) < -scale(s.at(i, j)))
          throw Error(std::string("ConvexProgram: ") + what + " is not convex");
        if (j > 0 && j + 1 < ny && second(s.at(i, j - 1), s.at(i, j), s.at(i, j + 1)) < -scale(s.at(i, j)))
          throw Error(std::string("ConvexProgram: ") + what + " is not convex");
      }
  }
};

struct KktCertificate {
  Vec x_bar;
  Vec lambda_bar;
  double stationarity_residual = kInf;
  Vec complementarity_residuals;  // |λ_j g_j(x̄)|
  double max_violation = 0.0;     // max_j g_j(x̄)⁺
  double primal_value = kInf;     // f(x̄)
  double dual_value = -kInf;      // inf_x L(x, λ̄)
  int iterations = 0;
  bool coercivity_warning = false;
};

namespace detail {

template <class F>
void for_each_node(const std::vector<Grid1D>& box, F&& fn) {
  if (box.size() == 1) {
    for (int i = 0; i < box[0].size(); ++i) fn(Vec::Constant(1, box[0].node(i)));
    return;
  }
  for (int i = 0; i < box[0].size(); ++i)
    for (int j = 0; j < box[1].size(); ++j) fn(Vec{{box[0].node(i), box[1].node(j)}});
}

inline double lagrangian(const ConvexProgram& cp, const Vec& x, const Vec& lambda) {
  const ExtReal fx = evaluate(cp.f, x);
  if (fx.is_infinite()) return kInf;
  double v = fx.value();
  for (std::size_t j = 0; j < cp.g.size(); ++j) {
    // g_j must be finite even where λ_j = 0 for x to be admissible.
    const ExtReal gj = evaluate(cp.g[j], x);
    if (gj.is_infinite()) return kInf;
    v += lambda[j] * gj.value();
  }
  return v;
}

// argmin of a convex function over the box: coarse scan, then zoom.
template <class F>
Vec box_minimize(const std::vector<Grid1D>& box, F&& obj, int coarse = 21, int half = 5, int levels = 60) {
  const int d = static_cast<int>(box.size());
  Vec lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = box[k].lo();
    hi[k] = box[k].hi();
  }
  std::vector<Grid1D> coarse_box;
  for (int k = 0; k < d; ++k) coarse_box.emplace_back(lo[k], hi[k], coarse);
  Vec best(d);
  double best_v = kInf;
  for_each_node(coarse_box, [&](const Vec& x) {
    const double v = obj(x);
    if (v < best_v) {
      best_v = v;
      best = x;
    }
  });
  if (!std::isfinite(best_v)) throw Error("convex program: objective is +infinity on the box");
  Vec radius = (hi - lo) / (coarse - 1);
  for (int level = 0; level < levels; ++level) {
    Vec center = best;
    bool moved = false;
    // Window of (2·half + 1)^d nodes around the incumbent, clamped to the box.
    std::vector<std::vector<double>> axes(d);
    for (int k = 0; k < d; ++k)
      for (int i = -half; i <= half; ++i)
        axes[k].push_back(std::clamp(center[k] + radius[k] * i / half, lo[k], hi[k]));
    auto try_point = [&](const Vec& x) {
      const double v = obj(x);
      if (v < best_v) {
        best_v = v;
        best = x;
        moved = true;
      }
    };
    if (d == 1) {
      for (double a : axes[0]) try_point(Vec::Constant(1, a));
    } else {
      for (double a : axes[0])
        for (double b : axes[1]) try_point(Vec{{a, b}});
    }
    // Keep the window while the minimizer still travels; shrink otherwise.
    if (!moved || (best - center).cwiseAbs().maxCoeff() < 0.5 * radius.maxCoeff()) radius *= 0.5;
    if (radius.maxCoeff() < 1e-13 * (1.0 + best.cwiseAbs().maxCoeff())) break;
  }
  return best;
}

// Distance from 0 to ∂φ(x), estimated by one-sided difference quotients along
// unit directions.
template <class F>
double stationarity(F&& phi, const Vec& x, double eta = 1e-7) {
  const double base = phi(x);
  double worst = 0.0;
  auto probe = [&](const Vec& dir) {
    const double v = phi(Vec(x + eta * dir));
    if (std::isfinite(v)) worst = std::max(worst, -(v - base) / eta);
  };
  if (x.size() == 1) {
    probe(Vec::Constant(1, 1.0));
    probe(Vec::Constant(1, -1.0));
    return worst;
  }
  for (int k = 0; k < 64; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 64.0;
    probe(Vec{{std::cos(t), std::sin(t)}});
  }
  return worst;
}

}  // namespace detail

/// Most interior grid node: all g_j < −1e−9 and f finite, maximizing
/// min_j −g_j (smallest index on ties).
inline std::optional<Vec> slater_check(const ConvexProgram& cp) {
  std::optional<Vec> best;
  double best_margin = -kInf;
  detail::for_each_node(cp.box, [&](const Vec& x) {
    if (evaluate(cp.f, x).is_infinite()) return;
    double margin = kInf;
    for (const auto& gj : cp.g) margin = std::min(margin, -evaluate(gj, x).to_double());
    if (margin > 1e-9 && margin > best_margin) {
      best_margin = margin;
      best = x;
    }
  });
  return best;
}

struct ConvexProgramOptions {
  int max_iterations = 10000;
  double tol = 1e-10;  // projected supergradient norm
};

/// Dual ascent on q(λ) = inf_x L(x, λ) along the projected supergradient
/// g(x(λ)), with an exact line search (bracket from 1/k, then golden section).
inline KktCertificate solve_convex_program(const ConvexProgram& cp, const ConvexProgramOptions& opt = {}) {
  auto x0 = slater_check(cp);
  if (!x0) throw Error("Slater qualification not verified");
  const std::size_t m = cp.g.size();

  struct Eval {
    Vec x;
    double q;
  };
  auto inner = [&](const Vec& lambda) {
    Vec x = detail::box_minimize(cp.box, [&](const Vec& z) { return detail::lagrangian(cp, z, lambda); });
    return Eval{x, detail::lagrangian(cp, x, lambda)};
  };
  auto constraints = [&](const Vec& x) {
    Vec gv(m);
    for (std::size_t j = 0; j < m; ++j) gv[j] = evaluate(cp.g[j], x).to_double();
    return gv;
  };

  Vec lambda = Vec::Zero(m);
  Eval cur = inner(lambda);
  int k = 1;
  for (; k <= opt.max_iterations && m > 0; ++k) {
    Vec dir = constraints(cur.x);
    for (std::size_t j = 0; j < m; ++j)
      if (lambda[j] <= 0.0 && dir[j] < 0.0) dir[j] = 0.0;
    if (dir.norm() <= opt.tol) break;

    auto at = [&](double t) { return (lambda + t * dir).cwiseMax(0.0).eval(); };
    auto q_of = [&](double t) { return inner(at(t)).q; };
    // Bracket the maximizer of the concave t ↦ q(λ + t d) starting from 1/k.
    double a = 0.0, b = 1.0 / k / std::max(1.0, dir.norm());
    double qa = cur.q, qb = q_of(b);
    while (qb > qa && b < 1e12) {
      a = b;
      qa = qb;
      b *= 2.0;
      qb = q_of(b);
    }
    // Golden section on [0, b]; the maximizer lies in [a/2, b].
    double lo = 0.5 * a, hi = b;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = hi - r * (hi - lo), c2 = lo + r * (hi - lo);
    double q1 = q_of(c1), q2 = q_of(c2);
    for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      if (q1 < q2) {
        lo = c1;
        c1 = c2;
        q1 = q2;
        c2 = lo + r * (hi - lo);
        q2 = q_of(c2);
      } else {
        hi = c2;
        c2 = c1;
        q2 = q1;
        c1 = hi - r * (hi - lo);
        q1 = q_of(c1);
      }
    }
    const double t = 0.5 * (lo + hi);
    Eval next = inner(at(t));
    if (!(next.q > cur.q)) {
      if (next.q < cur.q - 1e-14 * (1.0 + std::abs(cur.q))) break;  // no ascent: stalled
      lambda = at(t);
      cur = next;
      break;
    }
    lambda = at(t);
    cur = next;
  }

  KktCertificate cert;
  cert.x_bar = cur.x;
  cert.lambda_bar = lambda;
  cert.iterations = k;
  cert.dual_value = cur.q;
  cert.primal_value = evaluate(cp.f, cur.x).to_double();
  cert.stationarity_residual =
      detail::stationarity([&](const Vec& z) { return detail::lagrangian(cp, z, lambda); }, cur.x);
  Vec gv = constraints(cur.x);
  cert.complementarity_residuals = (lambda.array() * gv.array()).abs().matrix();
  cert.max_violation = m ? std::max(0.0, gv.maxCoeff()) : 0.0;

  // Coercivity diagnostic: f + Σ g_j should not be smaller on the box
  // boundary than at the Slater point.
  Vec ones = Vec::Ones(m);
  const double inside = detail::lagrangian(cp, *x0, ones);
  double boundary = kInf;
  detail::for_each_node(cp.box, [&](const Vec& x) {
    bool on_edge = false;
    for (int d = 0; d < cp.dim(); ++d) on_edge = on_edge || x[d] == cp.box[d].lo() || x[d] == cp.box[d].hi();
    if (on_edge) boundary = std::min(boundary, detail::lagrangian(cp, x, ones));
  });
  cert.coercivity_warning = boundary < inside;
  return cert;
}

}  // namespace fenchelkit
