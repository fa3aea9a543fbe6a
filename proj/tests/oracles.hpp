#pragma once

// Independent reference computations. Deliberately naive: they share no code
// with the library beyond the value types.

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// max_i x_i y − f_i by direct enumeration.
inline double brute_conjugate(const std::vector<double>& x, const std::vector<double>& f, double y) {
  double best = -inf;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(f[i])) best = std::max(best, x[i] * y - f[i]);
  return best;
}

/// Lower convex envelope at each node: min over chords (a ≤ i ≤ b) of finite
/// points. O(n³); +∞ outside the finite extent.
inline std::vector<double> brute_envelope(const std::vector<double>& x, const std::vector<double>& f) {
  const std::size_t n = x.size();
  std::vector<double> out(n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a <= i; ++a) {
      if (!std::isfinite(f[a])) continue;
      for (std::size_t b = i; b < n; ++b) {
        if (!std::isfinite(f[b])) continue;
        double v;
        if (a == b) {
          v = f[a];
        } else {
          const double t = (x[i] - x[a]) / (x[b] - x[a]);
          v = (1.0 - t) * f[a] + t * f[b];
        }
        out[i] = std::min(out[i], v);
      }
    }
  }
  return out;
}

/// W1 in 1D: ∫|F_μ − F_ν| over the merged support.
inline double quantile_w1(const std::vector<double>& xa, const std::vector<double>& wa, const std::vector<double>& xb,
                          const std::vector<double>& wb) {
  std::vector<std::pair<double, double>> ev;
  for (std::size_t i = 0; i < xa.size(); ++i) ev.emplace_back(xa[i], wa[i]);
  for (std::size_t j = 0; j < xb.size(); ++j) ev.emplace_back(xb[j], -wb[j]);
  std::sort(ev.begin(), ev.end());
  double F = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
    F += ev[k].second;
    total += std::abs(F) * (ev[k + 1].first - ev[k].first);
  }
  return total;
}

/// Monotone (north-west on sorted supports) coupling; returns plan entries
/// (i, j, mass) in the original indexing.
struct Coupling {
  std::vector<std::size_t> i, j;
  std::vector<double> mass;
};

inline Coupling quantile_coupling(const std::vector<double>& xa, const std::vector<double>& wa,
                                  const std::vector<double>& xb, const std::vector<double>& wb) {
  std::vector<std::size_t> pa(xa.size()), pb(xb.size());
  std::iota(pa.begin(), pa.end(), 0);
  std::iota(pb.begin(), pb.end(), 0);
  std::sort(pa.begin(), pa.end(), [&](auto a, auto b) { return xa[a] < xa[b]; });
  std::sort(pb.begin(), pb.end(), [&](auto a, auto b) { return xb[a] < xb[b]; });
  Coupling c;
  std::size_t s = 0, t = 0;
  double ra = wa[pa[0]], rb = wb[pb[0]];
  while (s < pa.size() && t < pb.size()) {
    const double m = std::min(ra, rb);
    if (m > 0.0) {
      c.i.push_back(pa[s]);
      c.j.push_back(pb[t]);
      c.mass.push_back(m);
    }
    ra -= m;
    rb -= m;
    if (ra <= 1e-15 && s < pa.size()) {
      if (++s < pa.size()) ra += wa[pa[s]];
    }
    if (rb <= 1e-15 && t < pb.size()) {
      if (++t < pb.size()) rb += wb[pb[t]];
    }
  }
  return c;
}

/// All-pairs shortest paths on a weighted graph given as an adjacency matrix
/// (inf = no edge).
inline std::vector<std::vector<double>> floyd_warshall(std::vector<std::vector<double>> d) {
  const std::size_t n = d.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

/// Random probability vector with strictly positive entries.
inline std::vector<double> random_weights(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) s += (x = u(rng));
  for (auto& x : w) x /= s;
  // Put the rounding residue on the largest entry so the sum is 1 to 1e-16.
  double r = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
  *std::max_element(w.begin(), w.end()) += r;
  return w;
}


/// min c·x over {x ≥ 0, Ax ≤ b} by enumerating every choice of n active
/// constraints among the m + n inequalities. Returns +inf if no vertex is
/// feasible. Only sensible for n ≤ 5.
inline double vertex_enumeration(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  Eigen::MatrixXd G(m + n, n);
  Eigen::VectorXd h(m + n);
  G << A, -Eigen::MatrixXd::Identity(n, n);
  h << b, Eigen::VectorXd::Zero(n);
  double best = inf;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd r(n);
      for (int k = 0; k < n; ++k) {
        M.row(k) = G.row(pick[k]);
        r[k] = h[pick[k]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd x = lu.solve(r);
      if (((G * x - h).array() <= 1e-9 * (1 + h.cwiseAbs().maxCoeff())).all()) best = std::min(best, c.dot(x));
      return;
    }
    for (int i = start; i < m + n; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// An LP with a planted optimal pair (x0, y0): complementary supports, so
/// both are optimal and the common value is c·x0.
struct PlantedLp {
  Eigen::VectorXd c, b, x0, y0;
  Eigen::MatrixXd A;
  double value;
};

inline PlantedLp planted_lp(int m, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 2.0);
  std::bernoulli_distribution coin(0.5);
  PlantedLp p;
  p.A = Eigen::MatrixXd(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p.A(i, j) = u(rng);
  p.x0 = Eigen::VectorXd::Zero(n);
  p.y0 = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < n; ++j)
    if (coin(rng)) p.x0[j] = pos(rng);
  for (int i = 0; i < m; ++i)
    if (coin(rng)) p.y0[i] = pos(rng);
  Eigen::VectorXd s(m), r(n);
  for (int i = 0; i < m; ++i) s[i] = p.y0[i] > 0 ? 0.0 : pos(rng);
  for (int j = 0; j < n; ++j) r[j] = p.x0[j] > 0 ? 0.0 : pos(rng);
  p.b = p.A * p.x0 + s;
  p.c = r - p.A.transpose() * p.y0;
  p.value = p.c.dot(p.x0);
  return p;
}

// Independent geodesic oracle: Floyd–Warshall on an adjacency matrix built
// directly from the masks. Lengths are kept as exact (axis, diagonal) step
// counts and compared through a + b√2.
using Steps = std::pair<long, long>;
inline constexpr Steps kNone{-1, -1};

inline double units(Steps s) { return s.first + s.second * std::sqrt(2.0); }

/// Templated on the domain type so this header stays independent of the library.
template <class Domain>
std::vector<std::vector<Steps>> grid_apsp(const Domain& d) {
  const int N = d.nodes();
  std::vector<std::vector<Steps>> a(N, std::vector<Steps>(N, kNone));
  for (int k = 0; k < N; ++k) a[k][k] = {0, 0};
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int i2 = i + di, j2 = j + dj;
          if ((di == 0 && dj == 0) || i2 < 0 || j2 < 0 || i2 >= d.nx || j2 >= d.ny) continue;
          const int p = j * d.nx + i, q = j2 * d.nx + i2;
          if (!d.omega[p] || !d.omega[q]) continue;
          if (di != 0 && dj != 0) {
            // the two other corners of the cell
            if (!d.omega[j * d.nx + i2] || !d.omega[j2 * d.nx + i]) continue;
            a[p][q] = {0, 1};
          } else {
            a[p][q] = {1, 0};
          }
        }
    }
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (a[i][k] == kNone || a[k][j] == kNone) continue;
        const Steps via{a[i][k].first + a[k][j].first, a[i][k].second + a[k][j].second};
        if (a[i][j] == kNone || units(via) < units(a[i][j])) a[i][j] = via;
      }
  return a;
}

}  // namespace oracle
