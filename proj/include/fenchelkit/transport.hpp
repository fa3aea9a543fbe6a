#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fenchelkit/descriptor.hpp"
#include "fenchelkit/geodesic.hpp"
#include "fenchelkit/simplex.hpp"

namespace fenchelkit {

/// Finitely supported probability measure. Rows of `points` are atoms in
/// dimension 1 or 2; zero-weight atoms are dropped on construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure(const Mat& points, const Vec& weights) {
    if (points.rows() != weights.size() || points.rows() == 0) throw Error("DiscreteMeasure: size mismatch");
    if (points.cols() < 1 || points.cols() > 2) throw Error("DiscreteMeasure: dimension must be 1 or 2");
    if (!points.allFinite() || !weights.allFinite()) throw Error("DiscreteMeasure: entries must be finite");
    if ((weights.array() < 0.0).any()) throw Error("DiscreteMeasure: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw Error("DiscreteMeasure: weights must sum to 1");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
      if (weights[i] > 0.0) keep.push_back(i);
    points_.resize(static_cast<Eigen::Index>(keep.size()), points.cols());
    weights_.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      points_.row(k) = points.row(keep[k]);
      weights_[k] = weights[keep[k]];
    }
  }

  static DiscreteMeasure line(const std::vector<double>& x, const std::vector<double>& w) {
    return DiscreteMeasure(Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())),
                           Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size())));
  }

  const Mat& points() const { return points_; }
  const Vec& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(points_.cols()); }

 private:
  Mat points_;
  Vec weights_;
};

enum class CostKind { euclidean, sq_euclidean, geodesic };

inline const char* to_string(CostKind k) {
  switch (k) {
    case CostKind::euclidean: return "euclidean";
    case CostKind::sq_euclidean: return "sq_euclidean";
    default: return "geodesic";
  }
}

struct CostMatrix {
  Mat c;
  CostKind kind = CostKind::euclidean;
};

/// Cost between the rows of X and Y. sq_euclidean is ½|x − y|². The geodesic
/// kind needs a grid domain; with Σ ≠ ∅ the entries are
/// min{δ(x, y), δ(x, Σ) + δ(y, Σ)}.
inline CostMatrix build_cost(const Mat& X, const Mat& Y, CostKind kind, const GridDomain* spec = nullptr) {
  if (X.cols() != Y.cols()) throw Error("build_cost: dimension mismatch");
  CostMatrix out;
  out.kind = kind;
  out.c.resize(X.rows(), Y.rows());
  if (kind != CostKind::geodesic) {
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < Y.rows(); ++j) {
        const double d2 = (X.row(i) - Y.row(j)).squaredNorm();
        out.c(i, j) = kind == CostKind::euclidean ? std::sqrt(d2) : 0.5 * d2;
      }
    return out;
  }
  if (!spec) throw Error("build_cost: geodesic cost needs a grid domain");
  GridGraph graph(*spec);
  if (!graph.omega_connected()) throw Error("build_cost: domain is not connected");
  auto snap = [&](const Mat& P) {
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      const int k = spec->locate(P(i, 0), P.cols() > 1 ? P(i, 1) : spec->y0);
      if (k < 0 || !spec->in_omega(k)) throw Error("point not in domain");
      idx.push_back(k);
    }
    return idx;
  };
  const auto xi = snap(X), yi = snap(Y);
  std::vector<int> sigma;
  for (int k = 0; k < spec->nodes(); ++k)
    if (spec->in_sigma(k)) sigma.push_back(k);
  std::vector<StepCount> to_sigma;
  if (!sigma.empty()) to_sigma = graph.steps_from(sigma);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto d = graph.steps_from({xi[i]});
    for (Eigen::Index j = 0; j < Y.rows(); ++j) {
      StepCount c = d[yi[j]];
      if (!sigma.empty()) c = std::min(c, to_sigma[xi[i]] + to_sigma[yi[j]]);
      out.c(i, j) = c.length(spec->h);
    }
  }
  return out;
}

struct TransportPlan {
  Mat gamma;
  double row_residual = 0.0;  // ‖γ1 − μ‖∞
  double col_residual = 0.0;  // ‖γᵀ1 − ν‖∞
  // Multipliers of the optimal basis, φ₀ = 0.
  Vec lp_phi, lp_psi;
  long pivots = 0;
};

struct KantorovichResult {
  TransportPlan plan;
  double value = 0.0;
};

namespace detail {

inline void check_cost(const Mat& C, Eigen::Index n, Eigen::Index m) {
  if (C.rows() != n || C.cols() != m) throw Error("cost matrix size mismatch");
  if (!C.allFinite() || (C.array() < 0.0).any()) throw Error("cost must be finite and nonnegative");
}

// North-west corner basis of the transportation LP with the last column
// constraint dropped: n + m − 1 cells forming a staircase spanning tree.
inline std::vector<int> northwest_basis(const Vec& a, const Vec& b) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  std::vector<int> basis;
  Vec ra = a, rb = b;
  int i = 0, j = 0;
  while (true) {
    basis.push_back(i * m + j);
    const double t = std::min(ra[i], rb[j]);
    ra[i] -= t;
    rb[j] -= t;
    if (i == n - 1 && j == m - 1) break;
    if (i == n - 1) {
      ++j;
    } else if (j == m - 1) {
      ++i;
    } else if (ra[i] <= rb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return basis;
}

}  // namespace detail

/// Optimal coupling by the simplex method on the transportation polytope,
/// warm-started from the north-west corner basis.
inline KantorovichResult solve_kantorovich(const Vec& mu, const Vec& nu, const Mat& C) {
  const Eigen::Index n = mu.size(), m = nu.size();
  if (n < 1 || m < 1) throw Error("solve_kantorovich: empty measure");
  if (n > 100 || m > 100) throw Error("solve_kantorovich: sizes above 100 are not supported");
  detail::check_cost(C, n, m);
  if ((mu.array() < 0.0).any() || (nu.array() < 0.0).any()) throw Error("solve_kantorovich: negative weight");
  if (std::abs(mu.sum() - nu.sum()) > 1e-9 * std::max(1.0, mu.sum())) throw Error("marginal mismatch");

  // Rows: n row sums, then the first m − 1 column sums.
  const Eigen::Index rows = n + m - 1;
  Mat E = Mat::Zero(rows, n * m);
  Vec d(rows), c(n * m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index v = i * m + j;
      E(i, v) = 1.0;
      if (j < m - 1) E(n + j, v) = 1.0;
      c[v] = C(i, j);
    }
  d << mu, nu.head(m - 1);
  const auto warm = detail::northwest_basis(mu, nu);
  auto r = detail::simplex(std::move(E), d, c, &warm);
  if (r.status != detail::SimplexStatus::optimal) throw Error("solve_kantorovich: transport LP not solved");

  KantorovichResult out;
  TransportPlan& p = out.plan;
  p.gamma.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) p.gamma(i, j) = r.x[i * m + j];
  p.row_residual = (p.gamma.rowwise().sum() - mu).lpNorm<Eigen::Infinity>();
  p.col_residual = (p.gamma.colwise().sum().transpose() - nu).lpNorm<Eigen::Infinity>();
  p.lp_phi = r.pi.head(n);
  p.lp_psi = Vec::Zero(m);
  p.lp_psi.head(m - 1) = r.pi.tail(m - 1);
  const double shift = p.lp_phi[0];
  p.lp_phi.array() -= shift;
  p.lp_psi.array() += shift;
  p.pivots = r.pivots;
  out.value = (p.gamma.array() * C.array()).sum();
  return out;
}

inline KantorovichResult solve_kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& C) {
  return solve_kantorovich(mu.weights(), nu.weights(), C.c);
}

enum class Direction {
  to_target,  // φ on X ↦ inf_i c(x_i, ·) − φ_i on Y
  to_source   // ψ on Y ↦ inf_j c(·, y_j) − ψ_j on X
};

struct CTransform {
  Vec values;
  std::vector<int> argmin;  // smallest index on ties
};

inline CTransform c_transform(const Vec& phi, const Mat& C, Direction dir) {
  const bool fwd = dir == Direction::to_target;
  const Eigen::Index len = fwd ? C.cols() : C.rows(), over = fwd ? C.rows() : C.cols();
  if (phi.size() != over) throw Error("c_transform: size mismatch");
  CTransform t;
  t.values.resize(len);
  t.argmin.assign(static_cast<std::size_t>(len), 0);
  for (Eigen::Index a = 0; a < len; ++a) {
    double best = kInf;
    for (Eigen::Index b = 0; b < over; ++b) {
      const double v = (fwd ? C(b, a) : C(a, b)) - phi[b];
      if (v < best) {
        best = v;
        t.argmin[a] = static_cast<int>(b);
      }
    }
    t.values[a] = best;
  }
  return t;
}

struct DualPotentials {
  Vec phi, psi;
  double feasibility_slack = 0.0;  // min_ij c_ij − φ_i − ψ_j
  double support_residual = 0.0;   // max |φ_i + ψ_j − c_ij| over γ_ij > 1e−12
  bool support_ok = true;
  int sweeps = 0;
  double dual_value = 0.0;  // ⟨φ, μ⟩ + ⟨ψ, ν⟩
  std::string violation;    // first offending plan entry, if any
};

/// A conjugate c-concave pair built from optimal multipliers. The plan is
/// checked against the support condition; a non-optimal plan is flagged, not
/// rejected.
inline DualPotentials dual_potentials(const Vec& mu, const Vec& nu, const Mat& C, const TransportPlan& plan,
                                      double support_tol = 1e-9) {
  const Eigen::Index n = mu.size(), m = nu.size();
  detail::check_cost(C, n, m);
  if (plan.gamma.rows() != n || plan.gamma.cols() != m) throw Error("dual_potentials: plan size mismatch");
  Vec phi = plan.lp_phi;
  if (phi.size() != n) phi = solve_kantorovich(mu, nu, C).plan.lp_phi;

  // Normalize before the sweeps so the returned pair is conjugate bit for
  // bit; φ₀ then equals 0 up to rounding.
  phi.array() -= phi[0];
  DualPotentials d;
  Vec psi = c_transform(phi, C, Direction::to_target).values;
  for (d.sweeps = 1; d.sweeps <= 5; ++d.sweeps) {
    phi = c_transform(psi, C, Direction::to_source).values;
    Vec next = c_transform(phi, C, Direction::to_target).values;
    const bool fixed = next == psi;
    psi = std::move(next);
    if (fixed) break;
  }
  d.sweeps = std::min(d.sweeps, 5);
  d.phi = phi;
  d.psi = psi;
  d.feasibility_slack = kInf;
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double gap = C(i, j) - phi[i] - psi[j];
      d.feasibility_slack = std::min(d.feasibility_slack, gap);
      if (plan.gamma(i, j) > 1e-12) {
        if (std::abs(gap) > d.support_residual) d.support_residual = std::abs(gap);
        if (std::abs(gap) > support_tol * scale && d.violation.empty()) {
          std::ostringstream os;
          os << "support condition violated at (" << i << ", " << j << ")";
          d.violation = os.str();
        }
      }
    }
  d.support_ok = d.violation.empty();
  d.dual_value = phi.dot(mu) + psi.dot(nu);
  return d;
}

inline DualPotentials dual_potentials(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostMatrix& C,
                                      const TransportPlan& plan) {
  return dual_potentials(mu.weights(), nu.weights(), C.c, plan);
}

/// Throws "not a semi-distance" unless D is square, nonnegative, symmetric,
/// zero on the diagonal and satisfies the triangle inequality. The triple scan
/// is exhaustive up to 60 points and skipped beyond.
inline void check_semi_distance(const Mat& D, double tol = 1e-12) {
  if (D.rows() != D.cols()) throw Error("not a semi-distance");
  const Eigen::Index n = D.rows();
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  if (!D.allFinite() || (D.array() < 0.0).any()) throw Error("not a semi-distance");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(D(i, i)) > tol * scale) throw Error("not a semi-distance");
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(D(i, j) - D(j, i)) > tol * scale) throw Error("not a semi-distance");
  }
  if (n > 60) return;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        if (D(i, k) > D(i, j) + D(j, k) + tol * scale) throw Error("not a semi-distance");
}

struct KantorovichRubinsteinResult {
  double value = 0.0;          // max ∫u d(μ − ν)
  double primal_value = 0.0;   // min transport cost
  Vec u;                       // 1-Lipschitz for D, one entry per support point
  double lipschitz_violation = 0.0;  // max_kl u_k − u_l − D_kl
  TransportPlan plan;
};

/// Distance case on a common support of N points: μ and ν are weight vectors
/// over the same points (zeros allowed) and D is the semi-distance between
/// them.
inline KantorovichRubinsteinResult kantorovich_rubinstein(const Vec& mu, const Vec& nu, const Mat& D) {
  check_semi_distance(D);
  const Eigen::Index N = D.rows();
  if (mu.size() != N || nu.size() != N) throw Error("kantorovich_rubinstein: size mismatch");
  std::vector<Eigen::Index> si, sj;
  for (Eigen::Index k = 0; k < N; ++k) {
    if (mu[k] > 0.0) si.push_back(k);
    if (nu[k] > 0.0) sj.push_back(k);
  }
  Vec a(static_cast<Eigen::Index>(si.size())), b(static_cast<Eigen::Index>(sj.size()));
  Mat C(a.size(), b.size());
  for (std::size_t i = 0; i < si.size(); ++i) {
    a[i] = mu[si[i]];
    for (std::size_t j = 0; j < sj.size(); ++j) C(i, j) = D(si[i], sj[j]);
  }
  for (std::size_t j = 0; j < sj.size(); ++j) b[j] = nu[sj[j]];

  KantorovichRubinsteinResult r;
  auto kr = solve_kantorovich(a, b, C);
  const auto pot = dual_potentials(a, b, C, kr.plan);
  r.primal_value = kr.value;
  // u = −φ^c over every point: 1-Lipschitz as a max of 1-Lipschitz
  // functions, equal to φ on supp μ because φ = ψ^c is 1-Lipschitz there.
  r.u.resize(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    double best = -kInf;
    for (std::size_t i = 0; i < si.size(); ++i) best = std::max(best, pot.phi[i] - D(si[i], k));
    r.u[k] = best;
  }
  r.value = r.u.dot(mu) - r.u.dot(nu);
  for (Eigen::Index k = 0; k < N; ++k)
    for (Eigen::Index l = 0; l < N; ++l) r.lipschitz_violation = std::max(r.lipschitz_violation, r.u[k] - r.u[l] - D(k, l));
  r.plan.gamma = Mat::Zero(N, N);
  for (std::size_t i = 0; i < si.size(); ++i)
    for (std::size_t j = 0; j < sj.size(); ++j) r.plan.gamma(si[i], sj[j]) = kr.plan.gamma(i, j);
  r.plan.row_residual = kr.plan.row_residual;
  r.plan.col_residual = kr.plan.col_residual;
  r.plan.pivots = kr.plan.pivots;
  return r;
}

/// N(f) = T_c(f⁺, f⁻) for nonnegative parts of equal mass on a common support.
inline double kantorovich_norm(const Vec& f_plus, const Vec& f_minus, const Mat& D) {
  if (f_plus.size() != D.rows() || f_minus.size() != D.rows()) throw Error("kantorovich_norm: size mismatch");
  if ((f_plus.array() < 0.0).any() || (f_minus.array() < 0.0).any())
    throw Error("kantorovich_norm: parts must be nonnegative");
  const double mass = f_plus.sum();
  if (std::abs(mass - f_minus.sum()) > 1e-9 * std::max(1.0, mass)) throw Error("marginal mismatch");
  check_semi_distance(D);
  if (mass == 0.0) return 0.0;
  std::vector<Eigen::Index> si, sj;
  for (Eigen::Index k = 0; k < D.rows(); ++k) {
    if (f_plus[k] > 0.0) si.push_back(k);
    if (f_minus[k] > 0.0) sj.push_back(k);
  }
  Vec a(static_cast<Eigen::Index>(si.size())), b(static_cast<Eigen::Index>(sj.size()));
  Mat C(a.size(), b.size());
  for (std::size_t i = 0; i < si.size(); ++i) {
    a[i] = f_plus[si[i]] / mass;
    for (std::size_t j = 0; j < sj.size(); ++j) C(i, j) = D(si[i], sj[j]);
  }
  for (std::size_t j = 0; j < sj.size(); ++j) b[j] = f_minus[sj[j]] / mass;
  return mass * solve_kantorovich(a, b, C).value;
}

/// Signed measure f with Σf = 0, split into its positive and negative parts.
inline double kantorovich_norm(const Vec& f, const Mat& D) {
  return kantorovich_norm(f.cwiseMax(0.0), (-f).cwiseMax(0.0), D);
}

struct BrenierReport {
  bool pass = false;
  bool convex = false;
  bool fenchel_equality = false;
  bool monotone = false;
  double convexity_violation = 0.0;
  double fenchel_residual = 0.0;
  std::string message;  // names the first failure
};

/// Checks, for the cost ½|x − y|² in 1D, that φ₀ = x²/2 − φ is convex on the
/// support of μ, that φ₀(x) + φ₀*(y) = xy on the plan support, and that no
/// two plan entries cross.
inline BrenierReport brenier_check(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Vec& phi, double tol = 1e-9) {
  if (mu.dim() != 1 || nu.dim() != 1) throw Error("brenier_check: one-dimensional measures only");
  const Eigen::Index n = mu.size(), m = nu.size();
  if (plan.gamma.rows() != n || plan.gamma.cols() != m || phi.size() != n)
    throw Error("brenier_check: size mismatch");
  const Vec x = mu.points().col(0), y = nu.points().col(0);
  Vec phi0 = (0.5 * x.array().square()).matrix() - phi;
  BrenierReport r;
  std::ostringstream msg;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  double prev_slope = -kInf;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto a = order[k], b = order[k + 1];
    if (x[b] == x[a]) continue;
    const double s = (phi0[b] - phi0[a]) / (x[b] - x[a]);
    if (s < prev_slope) r.convexity_violation = std::max(r.convexity_violation, prev_slope - s);
    prev_slope = s;
  }
  r.convex = r.convexity_violation <= tol;
  if (!r.convex && msg.str().empty()) msg << "phi0 is not convex on the support";

  for (Eigen::Index j = 0; j < m; ++j) {
    double conj = -kInf;
    for (Eigen::Index i = 0; i < n; ++i) conj = std::max(conj, x[i] * y[j] - phi0[i]);
    for (Eigen::Index i = 0; i < n; ++i)
      if (plan.gamma(i, j) > 1e-12)
        r.fenchel_residual = std::max(r.fenchel_residual, std::abs(phi0[i] + conj - x[i] * y[j]));
  }
  const double scale = std::max({1.0, x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
  r.fenchel_equality = r.fenchel_residual <= tol * scale * scale;
  if (!r.fenchel_equality && msg.str().empty()) msg << "Fenchel equality fails on the plan support";

  r.monotone = true;
  for (Eigen::Index i = 0; i < n && r.monotone; ++i)
    for (Eigen::Index j = 0; j < m && r.monotone; ++j) {
      if (plan.gamma(i, j) <= 1e-12) continue;
      for (Eigen::Index k = 0; k < n && r.monotone; ++k)
        for (Eigen::Index l = 0; l < m; ++l)
          if (plan.gamma(k, l) > 1e-12 && x[i] < x[k] && y[j] > y[l]) {
            r.monotone = false;
            if (msg.str().empty())
              msg << "crossing pair (" << i << ", " << j << ") and (" << k << ", " << l << ")";
            break;
          }
    }
  r.pass = r.convex && r.fenchel_equality && r.monotone;
  r.message = msg.str();
  return r;
}

}  // namespace fenchelkit
