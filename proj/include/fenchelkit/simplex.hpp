#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fenchelkit/error.hpp"

// Dense two-phase tableau simplex with Bland's rule for
//   min cᵀx  s.t.  E x = d,  x ≥ 0.
// The final primal point and multipliers are recomputed from the optimal
// basis with an LU solve, so tableau round-off does not leak into results.

namespace fenchelkit::detail {

enum class SimplexStatus { optimal, infeasible, unbounded };

struct SimplexResult {
  SimplexStatus status = SimplexStatus::infeasible;
  Eigen::VectorXd x;   // n
  Eigen::VectorXd pi;  // m, multipliers: c − Eᵀπ ≥ 0 at optimality
  std::vector<int> basis;
  long pivots = 0;
};

struct SimplexOptions {
  long pivot_limit = 100000;
  double cost_tol = 1e-9;    // entering threshold on reduced costs
  double pivot_tol = 1e-11;  // minimum admissible pivot magnitude
  double phase1_tol = 1e-9;  // relative to max(1, ‖d‖∞)
};

class Tableau {
 public:
  // Rows of T hold B⁻¹[E | d]; columns ≥ n_real are artificial.
  Tableau(Eigen::MatrixXd T, std::vector<int> basis, int n_real)
      : T_(std::move(T)), basis_(std::move(basis)), n_real_(n_real) {}

  int rows() const { return static_cast<int>(T_.rows()); }
  int cols() const { return static_cast<int>(T_.cols()) - 1; }
  double rhs(int i) const { return T_(i, cols()); }
  const std::vector<int>& basis() const { return basis_; }

  void pivot(int r, int j) {
    T_.row(r) /= T_(r, j);
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const double a = T_(i, j);
      if (a != 0.0) T_.row(i) -= a * T_.row(r);
    }
    basis_[r] = j;
  }

  // Minimize cost·x over the tableau with Bland's rule. `allowed` limits the
  // entering columns. Returns false on unboundedness.
  bool optimize(const Eigen::VectorXd& cost, int allowed, const SimplexOptions& opt, long& pivots) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (is_basic(j)) continue;
        double rc = cost[j];
        for (int i = 0; i < rows(); ++i) rc -= cost[basis_[i]] * T_(i, j);
        if (rc < -opt.cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < rows(); ++i) {
        const double a = T_(i, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = std::max(rhs(i), 0.0) / a;
        if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      if (++pivots > opt.pivot_limit) throw Error("pivot limit");
      pivot(leave, enter);
    }
  }

  double value(const Eigen::VectorXd& cost) const {
    double v = 0.0;
    for (int i = 0; i < rows(); ++i) v += cost[basis_[i]] * rhs(i);
    return v;
  }

  bool is_basic(int j) const { return std::find(basis_.begin(), basis_.end(), j) != basis_.end(); }

  // Pivot artificial columns out of the basis; rows where that is impossible
  // are linearly dependent and are dropped.
  std::vector<int> drive_out_artificials(const SimplexOptions& opt) {
    std::vector<int> dropped;
    for (int i = 0; i < rows(); ++i) {
      if (basis_[i] < n_real_) continue;
      int col = -1;
      for (int j = 0; j < n_real_; ++j)
        if (!is_basic(j) && std::abs(T_(i, j)) > 1e3 * opt.pivot_tol) {
          col = j;
          break;
        }
      if (col >= 0) {
        pivot(i, col);
      } else {
        dropped.push_back(i);
      }
    }
    return dropped;
  }

 private:
  Eigen::MatrixXd T_;
  std::vector<int> basis_;
  int n_real_;
};

// Tableau of B⁻¹[E | d] for a given basis, or nullopt if B is singular or
// the basic solution is infeasible.
inline std::optional<Tableau> tableau_from_basis(const Eigen::MatrixXd& E, const Eigen::VectorXd& d,
                                                 const std::vector<int>& basis) {
  const int m = static_cast<int>(E.rows()), n = static_cast<int>(E.cols());
  if (static_cast<int>(basis.size()) != m) return std::nullopt;
  Eigen::MatrixXd B(m, m);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < 0 || basis[i] >= n) return std::nullopt;
    B.col(i) = E.col(basis[i]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::MatrixXd T(m, n + 1);
  T.leftCols(n) = lu.solve(E);
  T.col(n) = lu.solve(d);
  if (T.col(n).minCoeff() < -1e-9 * std::max(1.0, d.lpNorm<Eigen::Infinity>())) return std::nullopt;
  return Tableau(std::move(T), basis, n);
}

inline SimplexResult finish(const Eigen::MatrixXd& E, const Eigen::VectorXd& d, const Eigen::VectorXd& c,
                            const std::vector<int>& rows, const std::vector<int>& basis, long pivots) {
  const int k = static_cast<int>(rows.size()), n = static_cast<int>(E.cols());
  SimplexResult r;
  r.status = SimplexStatus::optimal;
  r.basis = basis;
  r.pivots = pivots;
  r.x = Eigen::VectorXd::Zero(n);
  r.pi = Eigen::VectorXd::Zero(E.rows());
  if (k == 0) return r;
  Eigen::MatrixXd B(k, k);
  Eigen::VectorXd dB(k), cB(k);
  for (int i = 0; i < k; ++i) {
    for (int l = 0; l < k; ++l) B(l, i) = E(rows[l], basis[i]);
    dB[i] = d[rows[i]];
    cB[i] = c[basis[i]];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  Eigen::VectorXd xB = lu.solve(dB);
  Eigen::VectorXd piB = lu.transpose().solve(cB);
  for (int i = 0; i < k; ++i) {
    r.x[basis[i]] = std::max(xB[i], 0.0);
    r.pi[rows[i]] = piB[i];
  }
  return r;
}

/// Two-phase simplex. A warm basis (m column indices) is tried first; if it
/// is singular or infeasible, phase 1 with artificials starts from scratch.
inline SimplexResult simplex(Eigen::MatrixXd E, Eigen::VectorXd d, const Eigen::VectorXd& c,
                             const std::vector<int>* warm = nullptr, const SimplexOptions& opt = {}) {
  const int m = static_cast<int>(E.rows()), n = static_cast<int>(E.cols());
  if (d.size() != m || c.size() != n) throw Error("simplex: dimension mismatch");
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i)
    if (d[i] < 0.0) {
      sign[i] = -1.0;
      E.row(i) *= -1.0;
      d[i] = -d[i];
    }
  auto unsign = [&](SimplexResult r) {
    if (r.pi.size() == m) r.pi = r.pi.cwiseProduct(sign);
    return r;
  };

  long pivots = 0;
  std::vector<int> all_rows(m);
  for (int i = 0; i < m; ++i) all_rows[i] = i;

  if (warm) {
    if (auto t = tableau_from_basis(E, d, *warm)) {
      if (!t->optimize(c, n, opt, pivots)) {
        SimplexResult r;
        r.status = SimplexStatus::unbounded;
        r.pivots = pivots;
        return r;
      }
      return unsign(finish(E, d, c, all_rows, t->basis(), pivots));
    }
  }

  // Phase 1: reuse unit columns as the starting basis, artificials elsewhere.
  std::vector<int> basis(m, -1);
  std::vector<bool> used(n, false);
  for (int j = 0; j < n; ++j) {
    int row = -1;
    bool unit = true;
    for (int i = 0; i < m && unit; ++i) {
      if (E(i, j) == 0.0) continue;
      if (E(i, j) == 1.0 && row < 0) {
        row = i;
      } else {
        unit = false;
      }
    }
    if (unit && row >= 0 && basis[row] < 0) {
      basis[row] = j;
      used[j] = true;
    }
  }
  int n_art = 0;
  for (int i = 0; i < m; ++i)
    if (basis[i] < 0) basis[i] = n + n_art++;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, n + n_art + 1);
  T.leftCols(n) = E;
  for (int i = 0, a = 0; i < m; ++i)
    if (basis[i] >= n) T(i, n + a++) = 1.0;
  T.col(n + n_art) = d;
  Tableau tab(std::move(T), basis, n);

  if (n_art > 0) {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + n_art);
    c1.tail(n_art).setOnes();
    tab.optimize(c1, n + n_art, opt, pivots);  // bounded below by 0
    if (tab.value(c1) > opt.phase1_tol * std::max(1.0, d.lpNorm<Eigen::Infinity>())) {
      SimplexResult r;
      r.status = SimplexStatus::infeasible;
      r.pivots = pivots;
      return r;
    }
  }
  std::vector<int> dropped = tab.drive_out_artificials(opt);
  std::vector<int> rows, basis2;
  for (int i = 0; i < m; ++i)
    if (std::find(dropped.begin(), dropped.end(), i) == dropped.end()) {
      rows.push_back(i);
      basis2.push_back(tab.basis()[i]);
    }

  // Phase 2 on a fresh tableau over the kept rows.
  Eigen::MatrixXd E2(rows.size(), n);
  Eigen::VectorXd d2(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    E2.row(i) = E.row(rows[i]);
    d2[i] = d[rows[i]];
  }
  auto t2 = tableau_from_basis(E2, d2, basis2);
  if (!t2) throw Error("simplex: lost basis after phase 1");
  // Re-optimize until the refreshed tableau certifies optimality.
  for (int round = 0; round < 3; ++round) {
    if (!t2->optimize(c, n, opt, pivots)) {
      SimplexResult r;
      r.status = SimplexStatus::unbounded;
      r.pivots = pivots;
      return r;
    }
    auto fresh = tableau_from_basis(E2, d2, t2->basis());
    if (!fresh) break;
    long before = pivots;
    if (!fresh->optimize(c, n, opt, pivots)) {
      SimplexResult r;
      r.status = SimplexStatus::unbounded;
      r.pivots = pivots;
      return r;
    }
    t2 = std::move(fresh);
    if (pivots == before) break;
  }
  return unsign(finish(E, d, c, rows, t2->basis(), pivots));
}

}  // namespace fenchelkit::detail
