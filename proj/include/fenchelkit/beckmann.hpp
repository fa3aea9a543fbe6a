#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "fenchelkit/descriptor.hpp"
#include "fenchelkit/grid_domain.hpp"

// Minimal-flow problems on a node grid. Potentials live on nodes, fluxes on
// the axis edges between two Ω nodes (staggered grid). Energies and flow
// costs are integrated with piecewise-linear elements: a path edge in 1D,
// two triangles per cell in 2D, so that |σ| is a Euclidean length and not
// the sum of its edge components. The element gradient uses one horizontal
// and one vertical edge difference, which keeps the element weak form and
// the edge divergence exactly adjoint.

namespace fenchelkit {

/// One piecewise-linear element. Its gradient is
/// ((u[hx1] − u[hx0]) / h, (u[vy1] − u[vy0]) / h); in 1D the second component
/// is absent (vy0 = −1).
struct Element {
  int hx0, hx1, vy0 = -1, vy1 = -1;
  int h_edge, v_edge = -1;
  double weight;
  std::array<int, 3> nodes;
  int node_count;
};

class P1Mesh {
 public:
  explicit P1Mesh(const GridDomain& dom) : dom_(dom) {
    dom.validate();
    const int nx = dom.nx, ny = dom.ny;
    if (ny == 1) {
      for (int i = 0; i + 1 < nx; ++i)
        if (dom.in_omega(i) && dom.in_omega(i + 1))
          elements_.push_back({i, i + 1, -1, -1, h_edge(i, 0), -1, dom.h, {i, i + 1, -1}, 2});
      return;
    }
    const double w = 0.5 * dom.h * dom.h;
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        const int a = dom.index(i, j), b = dom.index(i + 1, j), c = dom.index(i, j + 1), d = dom.index(i + 1, j + 1);
        if (dom.in_omega(a) && dom.in_omega(b) && dom.in_omega(c))
          elements_.push_back({a, b, a, c, h_edge(i, j), v_edge(i, j), w, {a, b, c}, 3});
        if (dom.in_omega(d) && dom.in_omega(c) && dom.in_omega(b))
          elements_.push_back({c, d, b, d, h_edge(i, j + 1), v_edge(i + 1, j), w, {d, c, b}, 3});
      }
  }

  const GridDomain& domain() const { return dom_; }
  const std::vector<Element>& elements() const { return elements_; }
  int horizontal_edges() const { return (dom_.nx - 1) * dom_.ny; }
  int vertical_edges() const { return dom_.nx * (dom_.ny - 1); }
  int h_edge(int i, int j) const { return j * (dom_.nx - 1) + i; }
  int v_edge(int i, int j) const { return j * dom_.nx + i; }

  Eigen::Vector2d gradient(const Element& e, const std::vector<double>& u) const {
    Eigen::Vector2d g((u[e.hx1] - u[e.hx0]) / dom_.h, 0.0);
    if (e.vy0 >= 0) g[1] = (u[e.vy1] - u[e.vy0]) / dom_.h;
    return g;
  }

 private:
  GridDomain dom_;
  std::vector<Element> elements_;
};

/// Fluxes on the staggered grid. Horizontal edge (i, j) joins nodes (i, j)
/// and (i + 1, j); vertical edge (i, j) joins (i, j) and (i, j + 1).
/// `elements` optionally holds the element vectors the edge values were
/// averaged from; flows given only on edges get them reconstructed.
struct FlowField {
  int nx = 0, ny = 1;
  std::vector<double> horizontal, vertical;
  std::vector<Eigen::Vector2d> elements;

  FlowField() = default;
  explicit FlowField(const GridDomain& dom)
      : nx(dom.nx), ny(dom.ny), horizontal((dom.nx - 1) * dom.ny, 0.0), vertical(dom.nx * (dom.ny - 1), 0.0) {}
};

using PotentialField = std::vector<double>;

namespace detail {

inline bool h_edge_active(const GridDomain& d, int i, int j) {
  return d.in_omega(d.index(i, j)) && d.in_omega(d.index(i + 1, j));
}
inline bool v_edge_active(const GridDomain& d, int i, int j) {
  return d.in_omega(d.index(i, j)) && d.in_omega(d.index(i, j + 1));
}

inline void check_flow(const FlowField& s, const GridDomain& dom) {
  if (s.nx != dom.nx || s.ny != dom.ny || static_cast<int>(s.horizontal.size()) != (dom.nx - 1) * dom.ny ||
      static_cast<int>(s.vertical.size()) != dom.nx * (dom.ny - 1))
    throw Error("flow field does not match the domain");
}

// σ_e = (1 / w_edge) Σ_{T∋e} σ_T,axis · w_T with w_edge the node measure.
inline FlowField flow_from_elements(const P1Mesh& mesh, std::vector<Eigen::Vector2d> sigma_t) {
  const GridDomain& dom = mesh.domain();
  FlowField s(dom);
  const double w = dom.cell_measure();
  const auto& els = mesh.elements();
  for (std::size_t t = 0; t < els.size(); ++t) {
    s.horizontal[els[t].h_edge] += sigma_t[t][0] * els[t].weight / w;
    if (els[t].v_edge >= 0) s.vertical[els[t].v_edge] += sigma_t[t][1] * els[t].weight / w;
  }
  s.elements = std::move(sigma_t);
  return s;
}

// Element vectors of a flow: stored ones, or the element's own two edges.
inline std::vector<Eigen::Vector2d> element_vectors(const FlowField& s, const P1Mesh& mesh) {
  if (s.elements.size() == mesh.elements().size()) return s.elements;
  std::vector<Eigen::Vector2d> out;
  for (const auto& e : mesh.elements())
    out.emplace_back(s.horizontal[e.h_edge], e.v_edge >= 0 ? s.vertical[e.v_edge] : 0.0);
  return out;
}

}  // namespace detail

/// Staggered divergence, (outflow − inflow) / h at every Ω node. With node
/// and edge measure h^dim it is the negative adjoint of the edge gradient.
inline std::vector<double> divergence(const FlowField& s, const GridDomain& dom) {
  detail::check_flow(s, dom);
  std::vector<double> div(dom.nodes(), 0.0);
  for (int j = 0; j < dom.ny; ++j)
    for (int i = 0; i + 1 < dom.nx; ++i) {
      if (!detail::h_edge_active(dom, i, j)) continue;
      const double v = s.horizontal[j * (dom.nx - 1) + i] / dom.h;
      div[dom.index(i, j)] += v;
      div[dom.index(i + 1, j)] -= v;
    }
  for (int j = 0; j + 1 < dom.ny; ++j)
    for (int i = 0; i < dom.nx; ++i) {
      if (!detail::v_edge_active(dom, i, j)) continue;
      const double v = s.vertical[j * dom.nx + i] / dom.h;
      div[dom.index(i, j)] += v;
      div[dom.index(i, j + 1)] -= v;
    }
  return div;
}

/// Edge differences (u_right − u_left) / h on active edges, zero elsewhere.
inline FlowField edge_gradient(const PotentialField& u, const GridDomain& dom) {
  FlowField g(dom);
  for (int j = 0; j < dom.ny; ++j)
    for (int i = 0; i + 1 < dom.nx; ++i)
      if (detail::h_edge_active(dom, i, j))
        g.horizontal[j * (dom.nx - 1) + i] = (u[dom.index(i + 1, j)] - u[dom.index(i, j)]) / dom.h;
  for (int j = 0; j + 1 < dom.ny; ++j)
    for (int i = 0; i < dom.nx; ++i)
      if (detail::v_edge_active(dom, i, j))
        g.vertical[j * dom.nx + i] = (u[dom.index(i, j + 1)] - u[dom.index(i, j)]) / dom.h;
  return g;
}

/// Σ_T |σ_T| w_T, the discrete total variation of the flow.
inline double beckmann_value(const FlowField& s, const GridDomain& dom) {
  detail::check_flow(s, dom);
  const P1Mesh mesh(dom);
  const auto v = detail::element_vectors(s, mesh);
  double total = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) total += v[t].norm() * mesh.elements()[t].weight;
  return total;
}

/// Σ_T ρ⁰_K(σ_T) w_T for K the unit ball of `gauge`; ρ⁰_K is the dual norm.
inline double rho_k_functional(const FlowField& s, const GridDomain& dom, NormKind gauge) {
  detail::check_flow(s, dom);
  const P1Mesh mesh(dom);
  const auto v = detail::element_vectors(s, mesh);
  const NormKind dual = dual_norm(gauge);
  double total = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const Vec x = mesh.elements()[t].vy0 >= 0 ? Vec(v[t]) : Vec::Constant(1, v[t][0]);
    total += norm_of(x, dual) * mesh.elements()[t].weight;
  }
  return total;
}

/// Σ_T |σ_T| log|σ_T| w_T with 0 log 0 = 0.
inline double entropy_functional(const FlowField& s, const GridDomain& dom) {
  detail::check_flow(s, dom);
  const P1Mesh mesh(dom);
  const auto v = detail::element_vectors(s, mesh);
  double total = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const double a = v[t].norm();
    if (a > 0.0) total += a * std::log(a) * mesh.elements()[t].weight;
  }
  return total;
}

struct PLaplaceResult {
  PotentialField u;
  FlowField sigma;
  double p = 2.0;
  double residual = 0.0;  // ‖div σ + f‖∞ over the free nodes
  int iterations = 0;
};

struct PLaplaceOptions {
  double delta = 1e-8;  // |∇u|² + δ² inside the Newton linearization
  int max_iterations = 200;
};

namespace detail {

struct FreeNodes {
  std::vector<int> index;  // node → unknown, −1 if fixed
  int count = 0;
  int pinned = -1;         // Σ-free mode
};

inline FreeNodes free_nodes(const GridDomain& dom, const P1Mesh& mesh) {
  FreeNodes fr;
  fr.index.assign(dom.nodes(), -1);
  std::vector<char> touched(dom.nodes(), 0);
  for (const auto& e : mesh.elements())
    for (int k = 0; k < e.node_count; ++k) touched[e.nodes[k]] = 1;
  const bool sigma_free = dom.sigma_empty();
  for (int k = 0; k < dom.nodes(); ++k) {
    if (!touched[k] || dom.in_sigma(k)) continue;
    if (sigma_free && fr.pinned < 0) {
      fr.pinned = k;
      continue;
    }
    fr.index[k] = fr.count++;
  }
  return fr;
}

inline double source_mass(const GridDomain& dom) {
  double m = 0.0;
  for (int k = 0; k < dom.nodes(); ++k)
    if (dom.in_omega(k)) m += dom.f[k] * dom.cell_measure();
  return m;
}

inline double potential_pairing(const std::vector<double>& u, const GridDomain& dom) {
  double s = 0.0;
  for (int k = 0; k < dom.nodes(); ++k)
    if (dom.in_omega(k)) s += u[k] * dom.f[k] * dom.cell_measure();
  return s;
}

// s·u minimizing s ↦ (s^p / p) A − s B, A = Σ|∇u_T|^p w_T, B = Σ u f w.
inline std::vector<double> ray_rescaled(const P1Mesh& mesh, const GridDomain& dom, std::vector<double> u, double p) {
  double A = 0.0;
  for (const auto& el : mesh.elements()) A += std::pow(mesh.gradient(el, u).norm(), p) * el.weight;
  const double B = potential_pairing(u, dom);
  if (A > 0.0 && B > 0.0) {
    const double s = std::pow(B / A, 1.0 / (p - 1.0));
    for (double& v : u) v *= s;
  }
  return u;
}

}  // namespace detail

/// Damped Newton on (1/p) Σ_T |∇u_T|^p w_T − Σ f u w with u = 0 on Σ, or one
/// pinned node when Σ = ∅ and f is balanced. Stops when ‖div σ + f‖∞ ≤ tol.
inline PLaplaceResult solve_p_laplace(const GridDomain& dom, double p, double tol,
                                      const PotentialField* warm = nullptr, const PLaplaceOptions& opt = {}) {
  dom.validate();
  if (dom.f.empty()) throw Error("solve_p_laplace: missing source");
  if (!(p >= 2.0) || p > 64.0) throw Error("solve_p_laplace: p must lie in [2, 64]");
  if (!(tol > 0.0)) throw Error("solve_p_laplace: tol must be positive");
  const P1Mesh mesh(dom);
  const auto fr = detail::free_nodes(dom, mesh);
  const double w = dom.cell_measure();
  if (dom.sigma_empty()) {
    double abs_mass = 0.0;
    for (int k = 0; k < dom.nodes(); ++k) abs_mass += std::abs(dom.f[k]) * w;
    if (std::abs(detail::source_mass(dom)) > 1e-12 * std::max(1.0, abs_mass))
      throw Error("solve_p_laplace: source is not balanced");
  }
  const auto& els = mesh.elements();

  PotentialField u(dom.nodes(), 0.0);
  PotentialField seed;
  if (!warm && p > 2.0) {
    // Newton is degenerate at ∇u = 0 for p > 2: start from the quadratic
    // solution rescaled along its ray.
    seed = solve_p_laplace(dom, 2.0, tol, nullptr, opt).u;
    seed = detail::ray_rescaled(mesh, dom, seed, p);
    warm = &seed;
  }
  if (warm) {
    if (static_cast<int>(warm->size()) != dom.nodes()) throw Error("solve_p_laplace: warm start size mismatch");
    for (int k = 0; k < dom.nodes(); ++k)
      if (fr.index[k] >= 0) u[k] = (*warm)[k];
  }

  auto energy = [&](const PotentialField& v) {
    double e = 0.0;
    for (const auto& el : els) e += std::pow(mesh.gradient(el, v).norm(), p) / p * el.weight;
    for (int k = 0; k < dom.nodes(); ++k)
      if (fr.index[k] >= 0) e -= dom.f[k] * v[k] * w;
    return e;
  };
  // ∂E/∂u over the unknowns; its node form is −(div σ + f)·w.
  auto gradient = [&](const PotentialField& v) {
    Vec G = Vec::Zero(fr.count);
    for (const auto& el : els) {
      const Eigen::Vector2d g = mesh.gradient(el, v);
      const double n = g.norm();
      const Eigen::Vector2d s = n > 0.0 ? Eigen::Vector2d(std::pow(n, p - 2.0) * g) : Eigen::Vector2d::Zero();
      auto add = [&](int node, double coef) {
        if (fr.index[node] >= 0) G[fr.index[node]] += coef * el.weight / dom.h;
      };
      add(el.hx1, s[0]);
      add(el.hx0, -s[0]);
      if (el.vy0 >= 0) {
        add(el.vy1, s[1]);
        add(el.vy0, -s[1]);
      }
    }
    for (int k = 0; k < dom.nodes(); ++k)
      if (fr.index[k] >= 0) G[fr.index[k]] -= dom.f[k] * w;
    return G;
  };

  PLaplaceResult res;
  res.p = p;
  int it = 0;
  Vec G = gradient(u);
  double r = fr.count ? G.lpNorm<Eigen::Infinity>() / w : 0.0;
  double E = energy(u);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  for (; it < opt.max_iterations && r > tol; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    double max_diag = 0.0;
    for (const auto& el : els) {
      const Eigen::Vector2d g = mesh.gradient(el, u);
      const double s2 = g.squaredNorm() + opt.delta * opt.delta;
      Eigen::Matrix2d Hs = std::pow(s2, 0.5 * (p - 2.0)) *
                           (Eigen::Matrix2d::Identity() + (p - 2.0) * g * g.transpose() / s2);
      // Local derivative of the gradient w.r.t. up to four node values.
      std::array<std::pair<int, Eigen::Vector2d>, 4> D{{{el.hx1, {1.0 / dom.h, 0.0}},
                                                         {el.hx0, {-1.0 / dom.h, 0.0}},
                                                         {el.vy1, {0.0, 1.0 / dom.h}},
                                                         {el.vy0, {0.0, -1.0 / dom.h}}}};
      const int nd = el.vy0 >= 0 ? 4 : 2;
      if (nd == 2) Hs(0, 1) = Hs(1, 0) = 0.0;
      for (int a = 0; a < nd; ++a) {
        const int ia = fr.index[D[a].first];
        if (ia < 0) continue;
        for (int b = 0; b < nd; ++b) {
          const int ib = fr.index[D[b].first];
          if (ib < 0) continue;
          const double v = el.weight * D[a].second.dot(Hs * D[b].second);
          trip.emplace_back(ia, ib, v);
          if (ia == ib) max_diag = std::max(max_diag, v);
        }
      }
    }
    // A relative shift keeps the factorization defined where |∇u|^{p−2}
    // underflows; the line search absorbs its effect on the step.
    const double shift = 1e-12 * std::max(max_diag, 1e-300);
    for (int k = 0; k < fr.count; ++k) trip.emplace_back(k, k, shift);
    Eigen::SparseMatrix<double> H(fr.count, fr.count);
    H.setFromTriplets(trip.begin(), trip.end());
    ldlt.compute(H);
    if (ldlt.info() != Eigen::Success) break;
    const Vec d = ldlt.solve(-G);
    if (!d.allFinite()) break;

    const double slope = G.dot(d);
    double t = 1.0;
    PotentialField trial = u;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      for (int k = 0; k < dom.nodes(); ++k)
        if (fr.index[k] >= 0) trial[k] = u[k] + t * d[fr.index[k]];
      const double Et = energy(trial);
      if (std::isfinite(Et) && Et <= E + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Energy differences below rounding: fall back to residual decrease.
      if (std::isfinite(Et) && std::abs(Et - E) <= 1e-14 * (1.0 + std::abs(E))) {
        const Vec Gt = gradient(trial);
        if (Gt.lpNorm<Eigen::Infinity>() < G.lpNorm<Eigen::Infinity>()) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    u = trial;
    E = energy(u);
    G = gradient(u);
    r = G.lpNorm<Eigen::Infinity>() / w;
  }
  if (r > tol) {
    std::ostringstream os;
    os << "p-solve failed (residual " << r << ")";
    throw Error(os.str());
  }

  std::vector<Eigen::Vector2d> st;
  st.reserve(els.size());
  for (const auto& el : els) {
    const Eigen::Vector2d g = mesh.gradient(el, u);
    const double n = g.norm();
    st.push_back(n > 0.0 ? Eigen::Vector2d(std::pow(n, p - 2.0) * g) : Eigen::Vector2d::Zero());
  }
  res.u = std::move(u);
  res.sigma = detail::flow_from_elements(mesh, std::move(st));
  res.residual = r;
  res.iterations = it;
  return res;
}

/// Largest element gradient norm and largest axis-neighbour slope.
struct LipschitzReport {
  double element = 0.0;
  double edge = 0.0;
};

inline LipschitzReport lipschitz_constant(const PotentialField& u, const GridDomain& dom) {
  const P1Mesh mesh(dom);
  LipschitzReport r;
  for (const auto& el : mesh.elements()) r.element = std::max(r.element, mesh.gradient(el, u).norm());
  const FlowField g = edge_gradient(u, dom);
  for (double v : g.horizontal) r.edge = std::max(r.edge, std::abs(v));
  for (double v : g.vertical) r.edge = std::max(r.edge, std::abs(v));
  return r;
}

/// Moves u into {|∇u_T| ≤ 1 on every element, u = 0 on Σ}: `sweeps` passes of
/// element clipping (minimal-norm correction of the free element nodes onto
/// the unit gradient), then a global rescale that makes the bound exact.
inline PotentialField lipschitz_projection(PotentialField u, const GridDomain& dom, int sweeps = 50) {
  const P1Mesh mesh(dom);
  for (int k = 0; k < dom.nodes(); ++k)
    if (dom.in_sigma(k)) u[k] = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    bool changed = false;
    for (const auto& el : mesh.elements()) {
      const Eigen::Vector2d g = mesh.gradient(el, u);
      const double n = g.norm();
      if (n <= 1.0) continue;
      const int cols = el.vy0 >= 0 ? 3 : 2;
      // Gradient as a linear map of the element's node values.
      Eigen::Matrix<double, 2, 3> D = Eigen::Matrix<double, 2, 3>::Zero();
      auto col = [&](int node) {
        for (int c = 0; c < el.node_count; ++c)
          if (el.nodes[c] == node) return c;
        return -1;
      };
      D(0, col(el.hx1)) += 1.0 / dom.h;
      D(0, col(el.hx0)) -= 1.0 / dom.h;
      if (cols == 3) {
        D(1, col(el.vy1)) += 1.0 / dom.h;
        D(1, col(el.vy0)) -= 1.0 / dom.h;
      }
      for (int c = 0; c < el.node_count; ++c)
        if (dom.in_sigma(el.nodes[c])) D.col(c).setZero();
      const int rows = cols == 3 ? 2 : 1;
      const Eigen::MatrixXd Dr = D.topLeftCorner(rows, el.node_count);
      const Eigen::MatrixXd M = Dr * Dr.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd excess = (g * (1.0 - 1.0 / n)).head(rows);
      const Eigen::VectorXd dx = Dr.transpose() * lu.solve(excess);
      for (int c = 0; c < el.node_count; ++c) u[el.nodes[c]] -= dx[c];
      changed = true;
    }
    if (!changed) break;
  }
  const double L = lipschitz_constant(u, dom).element;
  if (L > 1.0) {
    // Divide so that the rounded result cannot exceed 1.
    const double scale = L * (1.0 + 4e-16);
    for (double& v : u) v /= scale;
  }
  return u;
}

struct StageReport {
  double p = 0.0;
  double value = 0.0;   // Σ|σ_T| w_T
  double primal = 0.0;  // Σ u f w for the projected u
  double gap = 0.0;     // value − primal
  double residual = 0.0;
  int iterations = 0;
  bool weak_duality = true;
};

struct ContinuationResult {
  PotentialField u;  // projected, 1-Lipschitz
  PotentialField u_raw;
  FlowField sigma;
  double value = 0.0;
  double primal = 0.0;
  double gap = 0.0;
  std::vector<StageReport> stages;
};

inline double potential_pairing(const PotentialField& u, const GridDomain& dom) {
  return detail::potential_pairing(u, dom);
}

/// Warm-started p-solves along an increasing schedule. Each start is the
/// previous potential rescaled to minimize the next energy along its ray.
inline ContinuationResult continuation_to_w1(const GridDomain& dom, const std::vector<double>& schedule, double tol,
                                             const PLaplaceOptions& opt = {}) {
  if (schedule.empty()) throw Error("continuation: empty schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] > schedule[k - 1])) throw Error("continuation: schedule must be increasing");
  const P1Mesh mesh(dom);
  ContinuationResult out;
  PotentialField u;
  bool have = false;
  for (double p : schedule) {
    PotentialField start;
    if (have) start = detail::ray_rescaled(mesh, dom, u, p);
    auto r = solve_p_laplace(dom, p, tol, have ? &start : nullptr, opt);
    u = r.u;
    have = true;
    StageReport st;
    st.p = p;
    st.value = beckmann_value(r.sigma, dom);
    const PotentialField proj = lipschitz_projection(u, dom);
    st.primal = potential_pairing(proj, dom);
    st.gap = st.value - st.primal;
    st.residual = r.residual;
    st.iterations = r.iterations;
    // Weak duality holds up to the flux equation residual paired with u.
    double slack = 0.0;
    for (double v : proj) slack += std::abs(v) * r.residual * dom.cell_measure();
    st.weak_duality = st.primal <= st.value + slack + 1e-12;
    out.stages.push_back(st);
    out.sigma = std::move(r.sigma);
    out.u_raw = u;
    out.u = proj;
    out.value = st.value;
    out.primal = st.primal;
    out.gap = st.gap;
  }
  return out;
}

struct OptimalityReport {
  double divergence_residual = 0.0;  // ‖div σ + f‖∞ off Σ
  double eikonal_residual = 0.0;     // max ||∇u|_e − 1| over edges with |σ_e| > eps
  double dirichlet_residual = 0.0;   // max |u| on Σ
  double neumann_residual = 0.0;     // ‖div σ + f‖∞ on boundary nodes off Σ
  int active_edges = 0;
  std::vector<double> diffusion;     // a_e = |σ_e| / max(|∇u|_e, eps), horizontal then vertical
};

/// Residuals of the optimality system −div(a∇u) = f, |∇u| = 1 where a > 0.
/// |∇u|_e is the mean element gradient norm over the elements holding e.
inline OptimalityReport optimality_residuals(const PotentialField& u, const FlowField& sigma, const GridDomain& dom,
                                             double eps) {
  detail::check_flow(sigma, dom);
  if (static_cast<int>(u.size()) != dom.nodes()) throw Error("optimality_residuals: size mismatch");
  const P1Mesh mesh(dom);
  OptimalityReport r;
  const auto div = divergence(sigma, dom);
  for (int k = 0; k < dom.nodes(); ++k) {
    if (!dom.in_omega(k)) continue;
    if (dom.in_sigma(k)) {
      r.dirichlet_residual = std::max(r.dirichlet_residual, std::abs(u[k]));
      continue;
    }
    const double res = std::abs(div[k] + (dom.f.empty() ? 0.0 : dom.f[k]));
    r.divergence_residual = std::max(r.divergence_residual, res);
    const int i = k % dom.nx, j = k / dom.nx;
    bool boundary = i == 0 || i == dom.nx - 1 || (dom.ny > 1 && (j == 0 || j == dom.ny - 1));
    if (!boundary)
      for (int dj = -1; dj <= 1 && !boundary; ++dj)
        for (int di = -1; di <= 1; ++di)
          if ((dom.ny > 1 || dj == 0) && !dom.in_omega(dom.index(i + di, j + dj))) boundary = true;
    if (boundary) r.neumann_residual = std::max(r.neumann_residual, res);
  }

  const int nh = mesh.horizontal_edges(), nv = mesh.vertical_edges();
  std::vector<double> gsum(nh + nv, 0.0);
  std::vector<int> gcount(nh + nv, 0);
  for (const auto& el : mesh.elements()) {
    const double n = mesh.gradient(el, u).norm();
    gsum[el.h_edge] += n;
    ++gcount[el.h_edge];
    if (el.v_edge >= 0) {
      gsum[nh + el.v_edge] += n;
      ++gcount[nh + el.v_edge];
    }
  }
  r.diffusion.assign(nh + nv, 0.0);
  for (int e = 0; e < nh + nv; ++e) {
    if (gcount[e] == 0) continue;
    const double s = std::abs(e < nh ? sigma.horizontal[e] : sigma.vertical[e - nh]);
    const double g = gsum[e] / gcount[e];
    r.diffusion[e] = s / std::max(g, eps);
    if (s > eps) {
      ++r.active_edges;
      r.eikonal_residual = std::max(r.eikonal_residual, std::abs(g - 1.0));
    }
  }
  return r;
}

}  // namespace fenchelkit
