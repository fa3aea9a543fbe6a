#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fenchelkit/conjugate.hpp"
#include "fenchelkit/prox.hpp"

namespace fenchelkit {

/// Dense operator A : X → Y with rows = dim Y and cols = dim X.
class LinearMap {
 public:
  explicit LinearMap(Mat m) : m_(std::move(m)) {
    if (!m_.allFinite()) throw Error("LinearMap: entries must be finite");
    if (m_.rows() == 0 || m_.cols() == 0) throw Error("LinearMap: empty matrix");
  }
  const Mat& matrix() const noexcept { return m_; }
  Eigen::Index rows() const noexcept { return m_.rows(); }
  Eigen::Index cols() const noexcept { return m_.cols(); }

 private:
  Mat m_;
};

// ---- infimal convolution -----------------------------------------------------

struct InfConvolution {
  GridFunction values;
  std::vector<int> split;  // index into the first operand attaining the inf; -1 where +∞
};

/// (f* □ g*)(y) = min over y₁ + y₂ = y of f*(y₁) + g*(y₂) on node pairs. The
/// result lives on [lo₁ + lo₂, hi₁ + hi₂] with n₁ + n₂ − 1 nodes.
inline InfConvolution inf_convolution(const GridFunction& fstar, const GridFunction& gstar) {
  if (fstar.dimension() != 1 || gstar.dimension() != 1) throw Error("inf_convolution: 1D grids only");
  const Grid1D& a = fstar.grid();
  const Grid1D& b = gstar.grid();
  const double ha = a.spacing(), hb = b.spacing();
  if (std::abs(ha - hb) > 1e-12 * std::max(ha, hb)) throw Error("grid mismatch");
  const int na = a.size(), nb = b.size(), n = na + nb - 1;
  std::vector<ExtReal> out(n, ExtReal::infinity());
  std::vector<int> split(n, -1);
  for (int i = 0; i < na; ++i) {
    if (fstar[i].is_infinite()) continue;
    for (int j = 0; j < nb; ++j) {
      if (gstar[j].is_infinite()) continue;
      const double v = fstar[i].value() + gstar[j].value();
      if (v < out[i + j].to_double()) {
        out[i + j] = v;
        split[i + j] = i;
      }
    }
  }
  return {GridFunction(Grid1D(a.lo() + b.lo(), a.hi() + b.hi(), n), std::move(out)), std::move(split)};
}

/// Grid version of the qualification "f continuous at x₀ and g(x₀) < +∞":
/// some interior node where one function is finite on the node and both
/// neighbours and the other is finite on the node.
inline std::optional<int> sum_qualification_node(const GridFunction& f, const GridFunction& g) {
  for (int k = 1; k + 1 < f.grid().size(); ++k) {
    const bool f_local = f[k - 1].is_finite() && f[k].is_finite() && f[k + 1].is_finite();
    const bool g_local = g[k - 1].is_finite() && g[k].is_finite() && g[k + 1].is_finite();
    if ((f_local && g[k].is_finite()) || (g_local && f[k].is_finite())) return k;
  }
  return std::nullopt;
}

/// (f + g)* as the infimal convolution of the sampled conjugates. Both
/// functions are sampled on `primal`, conjugated on `dual`.
inline InfConvolution conjugate_of_sum(const FunctionDescriptor& f, const FunctionDescriptor& g, const Grid1D& primal,
                                       const Grid1D& dual) {
  GridFunction fs = sample(f, primal);
  GridFunction gs = sample(g, primal);
  if (!sum_qualification_node(fs, gs)) throw Error("qualification violated");
  return inf_convolution(legendre_1d(fs, dual).values, legendre_1d(gs, dual).values);
}

// ---- Fenchel–Rockafellar ------------------------------------------------------

struct PrimalDualPair {
  ExtReal primal_value = ExtReal::infinity();
  double dual_value = -kInf;  // a sup; −∞ when the dual point is infeasible
  Vec primal_point;
  Vec dual_point;
  double gap = kInf;  // primal − dual when both are finite
  std::pair<double, double> extremality_residuals{kInf, kInf};  // (ψ side, φ side)
  bool qualified = false;
  bool certified = false;
  bool dual_infeasible = false;
  int iterations = 0;
  double feasibility_tol = 0.0;
};

struct FenchelRockafellarOptions {
  int max_iterations = 200000;
  double step_tol = 1e-13;
  double gap_tol = 1e-6;
  double feasibility_tol = 1e-9;
};

struct ExtremalityReport {
  bool pass = false;
  double psi_residual = kInf;  // ψ(Aū) + ψ*(σ̄) − ⟨Aū, σ̄⟩
  double phi_residual = kInf;  // φ(ū) + φ*(−Aᵀσ̄) + ⟨ū, Aᵀσ̄⟩
};

/// Both Fenchel gaps of a candidate pair; pass iff both are ≤ tol.
inline ExtremalityReport extremality_check(const Vec& u, const Vec& sigma, const FunctionDescriptor& phi,
                                           const FunctionDescriptor& psi, const LinearMap& A, double tol,
                                           double feas_tol = 0.0) {
  const Vec Au = A.matrix() * u;
  const Vec Ats = A.matrix().transpose() * sigma;
  ExtremalityReport r;
  const ExtReal p1 = evaluate(psi, Au, feas_tol) + conjugate_value(psi, sigma, feas_tol);
  const ExtReal p2 = evaluate(phi, u, feas_tol) + conjugate_value(phi, Vec(-Ats), feas_tol);
  r.psi_residual = p1.is_finite() ? p1.value() - Au.dot(sigma) : kInf;
  r.phi_residual = p2.is_finite() ? p2.value() + u.dot(Ats) : kInf;
  r.pass = r.psi_residual <= tol && r.phi_residual <= tol;
  return r;
}

inline ExtremalityReport extremality_check(const PrimalDualPair& pair, const FunctionDescriptor& phi,
                                           const FunctionDescriptor& psi, const LinearMap& A, double tol) {
  return extremality_check(pair.primal_point, pair.dual_point, phi, psi, A, tol, pair.feasibility_tol);
}

namespace detail {

// φ finite at u and ψ finite on a small box around Au.
inline bool fr_qualified_at(const Vec& u, const FunctionDescriptor& phi, const FunctionDescriptor& psi,
                            const LinearMap& A, double feas_tol) {
  if (evaluate(phi, u, feas_tol).is_infinite()) return false;
  const Vec Au = A.matrix() * u;
  if (evaluate(psi, Au).is_infinite()) return false;
  const double delta = 1e-6 * (1.0 + Au.lpNorm<Eigen::Infinity>());
  for (Eigen::Index i = 0; i < Au.size(); ++i)
    for (double s : {-delta, delta}) {
      Vec v = Au;
      v[i] += s;
      if (evaluate(psi, v).is_infinite()) return false;
    }
  return true;
}

}  // namespace detail

/// inf φ(u) + ψ(Au) against sup −φ*(−Aᵀσ) − ψ*(σ), solved by the
/// primal–dual hybrid gradient method with step sizes 0.99/‖A‖.
inline PrimalDualPair fenchel_rockafellar(const FunctionDescriptor& phi, const FunctionDescriptor& psi,
                                          const LinearMap& A, const FenchelRockafellarOptions& opt = {}) {
  const Eigen::Index n = A.cols(), m = A.rows();
  if (n > 50 || m > 50) throw Error("fenchel_rockafellar: dimensions above 50 are not supported");
  if (auto d = fixed_dimension(phi); d && *d != n) throw Error("dimension mismatch: phi");
  if (auto d = fixed_dimension(psi); d && *d != m) throw Error("dimension mismatch: psi");

  const Mat& K = A.matrix();
  const double L = Eigen::JacobiSVD<Mat>(K).singularValues()(0);
  const double step = L > 0.0 ? 0.99 / L : 1.0;

  Vec u = Vec::Zero(n), s = Vec::Zero(m), u_prev(n), s_prev(m);
  int it = 0;
  bool diverged = false;
  for (; it < opt.max_iterations; ++it) {
    u_prev = u;
    s_prev = s;
    u = prox(phi, Vec(u - step * (K.transpose() * s)), step);
    const Vec ubar = 2.0 * u - u_prev;
    // prox of ψ* by the Moreau identity.
    const Vec w = s + step * (K * ubar);
    s = w - step * prox(psi, Vec(w / step), 1.0 / step);
    const double du = (u - u_prev).norm(), ds = (s - s_prev).norm();
    if (!u.allFinite() || !s.allFinite() || u.norm() > 1e12) {
      diverged = true;
      break;
    }
    if (it > 10 && std::max(du, ds) <= opt.step_tol * (1.0 + u.norm() + s.norm())) break;
  }

  PrimalDualPair r;
  r.iterations = it;
  r.feasibility_tol = opt.feasibility_tol;
  r.primal_point = u;
  r.dual_point = s;
  if (diverged) {
    r.dual_infeasible = true;
    r.primal_value = ExtReal::infinity();
    return r;
  }
  r.primal_value = evaluate(phi, u, opt.feasibility_tol) + evaluate(psi, Vec(K * u), opt.feasibility_tol);
  const ExtReal dual_cost =
      conjugate_value(phi, Vec(-(K.transpose() * s)), opt.feasibility_tol) + conjugate_value(psi, s, opt.feasibility_tol);
  r.dual_value = dual_cost.is_finite() ? -dual_cost.value() : -kInf;
  r.dual_infeasible = dual_cost.is_infinite();
  if (r.primal_value.is_finite() && std::isfinite(r.dual_value)) r.gap = r.primal_value.value() - r.dual_value;

  auto ex = extremality_check(u, s, phi, psi, A, opt.gap_tol, opt.feasibility_tol);
  r.extremality_residuals = {ex.psi_residual, ex.phi_residual};

  for (const Vec& cand : {Vec(Vec::Zero(n)), u, Vec(0.5 * u)})
    if (detail::fr_qualified_at(cand, phi, psi, A, opt.feasibility_tol)) {
      r.qualified = true;
      break;
    }
  r.certified = r.qualified && std::isfinite(r.gap) && std::abs(r.gap) <= opt.gap_tol;
  return r;
}

}  // namespace fenchelkit
