#pragma once

#include <cmath>
#include <string>

#include "fenchelkit/descriptor.hpp"
#include "fenchelkit/simplex.hpp"

namespace fenchelkit {

/// min { c·x : x ≥ 0, A x ≤ b }.
struct LpProblem {
  Vec c;
  Mat A;
  Vec b;

  LpProblem(Vec c_, Mat A_, Vec b_) : c(std::move(c_)), A(std::move(A_)), b(std::move(b_)) {
    if (A.rows() < 1 || A.cols() < 1) throw Error("LpProblem: need m, n >= 1");
    if (c.size() != A.cols() || b.size() != A.rows()) throw Error("LpProblem: dimension mismatch");
    if (!c.allFinite() || !A.allFinite() || !b.allFinite()) throw Error("LpProblem: entries must be finite");
  }
  Eigen::Index n() const { return A.cols(); }
  Eigen::Index m() const { return A.rows(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    default: return "unbounded";
  }
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vec x;  // primal, n
  Vec y;  // dual multipliers of A x ≤ b, m
  double primal_value = kInf;  // −∞ when unbounded, +∞ when infeasible
  double dual_value = -kInf;   // −b·y
  std::pair<double, double> slack_residuals{0.0, 0.0};  // ((Ax − b)·y, (Aᵀy + c)·x)
  long pivots = 0;
};

/// Solve (P) through the standard form [A I][x; s] = b. The multipliers are
/// read off the optimal basis: y = −π.
inline LpSolution solve_lp(const LpProblem& p) {
  if (p.m() > 200 || p.n() > 200) throw Error("solve_lp: dimensions above 200 are not supported");
  const Eigen::Index m = p.m(), n = p.n();
  Mat E(m, n + m);
  E << p.A, Mat::Identity(m, m);
  Vec c = Vec::Zero(n + m);
  c.head(n) = p.c;
  auto r = detail::simplex(std::move(E), p.b, c);

  LpSolution s;
  s.pivots = r.pivots;
  if (r.status == detail::SimplexStatus::infeasible) {
    s.status = LpStatus::infeasible;
    return s;
  }
  if (r.status == detail::SimplexStatus::unbounded) {
    s.status = LpStatus::unbounded;
    s.primal_value = -kInf;
    s.dual_value = -kInf;
    return s;
  }
  s.status = LpStatus::optimal;
  s.x = r.x.head(n);
  s.y = (-r.pi).cwiseMax(0.0);
  s.primal_value = p.c.dot(s.x);
  s.dual_value = -p.b.dot(s.y);
  s.slack_residuals = {(p.A * s.x - p.b).dot(s.y), (p.A.transpose() * s.y + p.c).dot(s.x)};
  return s;
}

/// (P*) = max { −b·y : y ≥ 0, Aᵀy + c ≥ 0 } rewritten as the min-form
/// program min { b·y : y ≥ 0, −Aᵀy ≤ c }, whose optimum is −max(P*).
inline LpProblem dual_of(const LpProblem& p) { return LpProblem(p.b, -p.A.transpose(), p.c); }

struct ComplementarityReport {
  bool pass = false;
  double primal_residual = 0.0;       // (A x − b)·y
  double dual_residual = 0.0;         // (Aᵀy + c)·x
  double primal_infeasibility = 0.0;  // max(0, max(Ax − b), max(−x))
  double dual_infeasibility = 0.0;    // max(0, max(−(Aᵀy + c)), max(−y))
  double cx = 0.0;
  double minus_by = 0.0;  // −b·y; equals cx at optimality
};

inline ComplementarityReport verify_complementarity(const LpProblem& p, const Vec& x, const Vec& y, double tol) {
  if (x.size() != p.n() || y.size() != p.m()) throw Error("verify_complementarity: dimension mismatch");
  if (!x.allFinite() || !y.allFinite()) throw Error("verify_complementarity: non-finite input");
  ComplementarityReport r;
  const Vec slack = p.A * x - p.b;
  const Vec reduced = p.A.transpose() * y + p.c;
  r.primal_residual = slack.dot(y);
  r.dual_residual = reduced.dot(x);
  r.primal_infeasibility = std::max({0.0, slack.maxCoeff(), (-x).maxCoeff()});
  r.dual_infeasibility = std::max({0.0, (-reduced).maxCoeff(), (-y).maxCoeff()});
  r.cx = p.c.dot(x);
  r.minus_by = -p.b.dot(y);
  r.pass = std::abs(r.primal_residual) <= tol && std::abs(r.dual_residual) <= tol && r.primal_infeasibility <= tol &&
           r.dual_infeasibility <= tol;
  return r;
}

/// h(q) = inf { c·x : x ≥ 0, A x + q ≤ b }; +∞ when infeasible.
inline ExtReal value_function(const LpProblem& p, const Vec& perturbation) {
  if (perturbation.size() != p.m()) throw Error("value_function: dimension mismatch");
  LpSolution s = solve_lp(LpProblem(p.c, p.A, p.b - perturbation));
  if (s.status == LpStatus::infeasible) return ExtReal::infinity();
  if (s.status == LpStatus::unbounded) throw Error("value function is -infinity (unbounded program)");
  return s.primal_value;
}

}  // namespace fenchelkit
