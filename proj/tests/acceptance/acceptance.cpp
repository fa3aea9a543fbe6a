// One pass/fail line per acceptance criterion. Usage:
//   acceptance [acN ...] [--cli PATH] [--samples DIR]
// With no criterion names every criterion runs. Exit status is nonzero when
// any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "fenchelkit/fenchelkit.hpp"
#include "oracles.hpp"

using namespace fenchelkit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Paths {
  fs::path cli, samples;
};

using Seconds = std::chrono::duration<double>;

double elapsed(std::chrono::steady_clock::time_point t0) {
  return Seconds(std::chrono::steady_clock::now() - t0).count();
}

GridFunction sample_fn(const Grid1D& g, const std::function<double(double)>& fn) {
  std::vector<ExtReal> v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = fn(g.node(i));
  return GridFunction(g, std::move(v));
}

// ---- 1 ----------------------------------------------------------------------

// Sampled conjugate against the closed form on the slope range of the
// sampled function, where the true maximizer lies inside the primal grid.
double table_error(const GridFunction& f, double ylo, double yhi, const std::function<double(double)>& exact) {
  const Grid1D dual(ylo, yhi, f.grid().size());
  const auto fs = legendre_1d(f, dual).values;
  double err = 0.0;
  for (int k = 0; k < dual.size(); ++k) err = std::max(err, std::abs(fs[k].value() - exact(dual.node(k))));
  return err;
}

Verdict ac1(const Paths&) {
  Verdict v;
  const Grid1D g(-5, 5, 1001);
  const double h = g.spacing();
  for (double p : {1.5, 2.0, 3.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double q = p / (p - 1.0), s = std::pow(5.0, p - 1.0);
    const auto f = sample_fn(g, [&](double x) { return std::pow(std::abs(x), p) / p; });
    const double err = table_error(f, -s, s, [&](double y) { return std::pow(std::abs(y), q) / q; });
    const double t = elapsed(t0);
    v.require(err <= 10 * h && t < 1.0, "p=" + sci(p) + " error " + sci(err));
    v.note("p=" + sci(p) + ": " + sci(err));
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid1D ge(0, 5, 1001);
    const auto f = sample(make_entropy(), ge);
    const double err = table_error(f, -3.0, 1.0 + std::log(5.0), [](double y) { return std::exp(y - 1.0); });
    v.require(err <= 10 * ge.spacing() && elapsed(t0) < 1.0, "entropy error " + sci(err));
    v.note("entropy: " + sci(err));
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = sample(make_minimal_surface(), g);
    const double s = 5.0 / std::sqrt(26.0);
    const double err = table_error(f, -s, s, [](double y) { return -std::sqrt(1.0 - y * y); });
    v.require(err <= 10 * h && elapsed(t0) < 1.0, "minimal surface error " + sci(err));
    v.note("minimal surface: " + sci(err));
  }
  v.note("bound 10h = " + sci(10 * h));
  return v;
}

// ---- 2 ----------------------------------------------------------------------

Verdict ac2(const Paths&) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> nodes(2, 101);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::bernoulli_distribution hole(0.1);
  double env_err = 0.0, triple_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nodes(rng);
    std::vector<ExtReal> vals(n);
    for (auto& x : vals) x = hole(rng) ? ExtReal::infinity() : ExtReal(u(rng));
    vals[n / 2] = u(rng);
    const GridFunction f(Grid1D(-2.0, 2.0, n), vals);
    const GridFunction fb = biconjugate(make_sampled(f)).as<Sampled>().f;
    std::vector<double> fv;
    for (const auto& x : vals) fv.push_back(x.to_double());
    const auto env = oracle::brute_envelope(f.grid().nodes(), fv);
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(env[i]) != fb[i].is_finite()) {
        env_err = oracle::inf;
      } else if (std::isfinite(env[i])) {
        env_err = std::max(env_err, std::abs(fb[i].value() - env[i]) / (1.0 + std::abs(env[i])));
      }
    }
    const Grid1D dual = default_dual_grid(f);
    const auto fs = legendre_1d(f, dual).values, fbs = legendre_1d(fb, dual).values;
    for (int k = 0; k < dual.size(); ++k)
      triple_err = std::max(triple_err, std::abs(fbs[k].value() - fs[k].value()) / (1.0 + std::abs(fs[k].value())));
  }
  const double t = elapsed(t0);
  v.require(env_err <= 1e-12, "envelope mismatch " + sci(env_err));
  v.require(triple_err <= 1e-12, "f*** != f* by " + sci(triple_err));
  v.require(t < 5.0, "runtime " + sci(t) + " s");
  v.note("envelope " + sci(env_err) + ", f***-f* " + sci(triple_err) + ", " + sci(t) + " s");
  return v;
}

// ---- 3 ----------------------------------------------------------------------

Verdict ac3(const Paths&) {
  Verdict v;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Mat B(2, 2);
    B << g(rng), g(rng), g(rng), g(rng);
    const Mat A = B * B.transpose() + 0.1 * Mat::Identity(2, 2);
    const auto fs = conjugate(make_quadratic(A, Vec::Zero(2)));
    for (int k = 0; k < 5; ++k) {
      const Vec y = Vec::NullaryExpr(2, [&] { return g(rng); });
      const double exact = 0.5 * y.dot(A.inverse() * y);
      worst = std::max(worst, std::abs(evaluate(fs, y).value() - exact) / (1.0 + std::abs(exact)));
    }
  }
  v.require(worst <= 1e-10, "closed form error " + sci(worst));
  Mat I(2, 2);
  I << 1, 0, 0, -1;
  v.require(conjugate(make_quadratic(I, Vec::Zero(2))).is<Infinity>(), "indefinite quadratic not +inf");
  v.note("max relative error " + sci(worst) + ", indefinite -> +inf");
  return v;
}

// ---- 4 ----------------------------------------------------------------------

Verdict ac4(const Paths&) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(1, 20), small(1, 5);
  double gap = 0.0, comp = 0.0, enum_err = 0.0;
  int enumerated = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool tiny = trial % 4 == 0;
    const int m = tiny ? small(rng) : dim(rng), n = tiny ? small(rng) : dim(rng);
    const auto p = oracle::planted_lp(m, n, rng);
    const LpProblem lp(p.c, p.A, p.b);
    const auto s = solve_lp(lp);
    if (s.status != LpStatus::optimal) {
      v.require(false, "instance " + std::to_string(trial) + " not optimal");
      continue;
    }
    const double scale = std::max(1.0, std::abs(p.value));
    gap = std::max(gap, std::abs(p.c.dot(s.x) + p.b.dot(s.y)) / scale);
    const Vec slack = p.A * s.x - p.b, reduced = p.A.transpose() * s.y + p.c;
    comp = std::max({comp, std::abs(slack.dot(s.y)) / scale, std::abs(reduced.dot(s.x)) / scale});
    if (n <= 5) {
      enum_err = std::max(enum_err, std::abs(oracle::vertex_enumeration(p.c, p.A, p.b) - s.primal_value) / scale);
      ++enumerated;
    }
  }
  const double t = elapsed(t0);
  v.require(gap <= 1e-8, "duality gap " + sci(gap));
  v.require(comp <= 1e-8, "complementarity " + sci(comp));
  v.require(enum_err <= 1e-8, "vertex enumeration differs by " + sci(enum_err));
  v.require(t < 10.0, "runtime " + sci(t) + " s");
  v.note("gap " + sci(gap) + ", complementarity " + sci(comp) + ", " + std::to_string(enumerated) +
         " enumerated (err " + sci(enum_err) + "), " + sci(t) + " s");
  return v;
}

// ---- 5 ----------------------------------------------------------------------

// Minimum of f over the box nodes where every constraint holds.
double grid_brute_force(const ConvexProgram& cp) {
  double best = oracle::inf;
  const auto& b = cp.box;
  const int ny = b.size() > 1 ? b[1].size() : 1;
  for (int i = 0; i < b[0].size(); ++i)
    for (int j = 0; j < ny; ++j) {
      Vec x(static_cast<Eigen::Index>(b.size()));
      x[0] = b[0].node(i);
      if (b.size() > 1) x[1] = b[1].node(j);
      bool ok = true;
      for (const auto& g : cp.g) ok = ok && evaluate(g, x).to_double() <= 0.0;
      if (ok) best = std::min(best, evaluate(cp.f, x).to_double());
    }
  return best;
}

Verdict ac5(const Paths&) {
  Verdict v;
  auto one = [](double a) { return Vec::Constant(1, a); };
  const Vec two = Vec::Constant(2, 2.0);
  const std::vector<std::pair<std::string, ConvexProgram>> programs{
      {"x^2 s.t. 1-x<=0",
       ConvexProgram(make_quadratic(2.0), {make_tilt(make_quadratic(0.0), one(-1), 1.0)}, {Grid1D(-3, 3, 121)})},
      {"x^2 s.t. x-1<=0",
       ConvexProgram(make_quadratic(2.0), {make_tilt(make_quadratic(0.0), one(1), -1.0)}, {Grid1D(-3, 3, 121)})},
      {"|x-(2,2)|^2 s.t. |x|inf<=1",
       ConvexProgram(make_tilt(make_quadratic(Mat::Identity(2, 2) * 2.0, Vec::Zero(2)), Vec::Zero(2), 0.0, two),
                     {make_tilt(make_norm(NormKind::linf), Vec::Zero(2), -1.0)},
                     {Grid1D(-3, 3, 61), Grid1D(-3, 3, 61)})}};
  for (const auto& [name, cp] : programs) {
    const auto c = solve_convex_program(cp);
    const double comp = c.complementarity_residuals.size() ? c.complementarity_residuals.maxCoeff() : 0.0;
    const double brute = grid_brute_force(cp);
    v.require(c.stationarity_residual <= 1e-4, name + " stationarity " + sci(c.stationarity_residual));
    v.require(comp <= 1e-4, name + " complementarity " + sci(comp));
    v.require(std::abs(c.primal_value - brute) <= 1e-3, name + " objective off by " + sci(c.primal_value - brute));
    v.note(name + ": x0=" + sci(c.x_bar[0]) + " lambda=" + sci(c.lambda_bar[0]));
  }
  return v;
}

// ---- 6 ----------------------------------------------------------------------

Verdict ac6(const Paths&) {
  Verdict v;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double gap = 0.0, support = 0.0, infeasible = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(rng), m = size(rng);
    const auto wa = oracle::random_weights(static_cast<std::size_t>(n), rng);
    const auto wb = oracle::random_weights(static_cast<std::size_t>(m), rng);
    const Vec mu = Eigen::Map<const Vec>(wa.data(), n), nu = Eigen::Map<const Vec>(wb.data(), m);
    Mat C(n, m);
    if (trial % 3 == 2) {
      C = Mat::NullaryExpr(n, m, [&] { return 5.0 * u(rng); });
    } else {
      const Mat X = Mat::NullaryExpr(n, 2, [&] { return u(rng); }), Y = Mat::NullaryExpr(m, 2, [&] { return u(rng); });
      C = build_cost(X, Y, trial % 3 ? CostKind::sq_euclidean : CostKind::euclidean).c;
    }
    const auto kr = solve_kantorovich(mu, nu, C);
    const auto d = dual_potentials(mu, nu, C, kr.plan);
    const double dual = d.phi.dot(mu) + d.psi.dot(nu);
    gap = std::max(gap, std::abs(kr.value - dual));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        const double r = d.phi[i] + d.psi[j] - C(i, j);
        infeasible = std::max(infeasible, r);
        if (kr.plan.gamma(i, j) > 1e-12) support = std::max(support, std::abs(r));
      }
  }
  v.require(gap <= 1e-8, "primal-dual gap " + sci(gap));
  v.require(support <= 1e-8, "support condition residual " + sci(support));
  v.require(infeasible <= 1e-8, "potentials exceed the cost by " + sci(infeasible));
  v.note("gap " + sci(gap) + ", support " + sci(support) + ", feasibility " + sci(infeasible));
  return v;
}

// ---- 7 ----------------------------------------------------------------------

Verdict ac7(const Paths&) {
  Verdict v;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double lip = 0.0, pairing = 0.0, w1 = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int N = 5 + trial;
    const Mat P = Mat::NullaryExpr(N, 2, [&] { return u(rng); });
    const Mat D = build_cost(P, P, CostKind::euclidean).c;
    Vec mu = Vec::Zero(N), nu = Vec::Zero(N);
    for (int k = 0; k < N; ++k) (k % 2 ? mu[k] : nu[k]) = u(rng) + 0.1;
    mu /= mu.sum();
    nu /= nu.sum();
    const auto r = kantorovich_rubinstein(mu, nu, D);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) lip = std::max(lip, r.u[a] - r.u[b] - D(a, b));
    pairing = std::max(pairing, std::abs(r.u.dot(mu - nu) - r.primal_value));
  }
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 17, m = 1 + (3 * trial) % 23;
    std::vector<double> xa(n), xb(m);
    for (auto& x : xa) x = 10.0 * u(rng);
    for (auto& x : xb) x = 10.0 * u(rng);
    const auto wa = oracle::random_weights(static_cast<std::size_t>(n), rng);
    const auto wb = oracle::random_weights(static_cast<std::size_t>(m), rng);
    const auto mu = DiscreteMeasure::line(xa, wa), nu = DiscreteMeasure::line(xb, wb);
    const double value = solve_kantorovich(mu, nu, build_cost(mu.points(), nu.points(), CostKind::euclidean)).value;
    w1 = std::max(w1, std::abs(value - oracle::quantile_w1(xa, wa, xb, wb)));
  }
  v.require(lip <= 1e-9, "Lipschitz violation " + sci(lip));
  v.require(pairing <= 1e-8, "pairing differs from primal by " + sci(pairing));
  v.require(w1 <= 1e-8, "1D W1 differs from quantile oracle by " + sci(w1));
  v.note("Lipschitz " + sci(lip) + ", pairing " + sci(pairing) + ", quantile " + sci(w1));
  return v;
}

// ---- 8 ----------------------------------------------------------------------

Verdict ac8(const Paths&) {
  Verdict v;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> size(2, 30);
  double plan_err = 0.0;
  int brenier_fail = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = size(rng), m = size(rng);
    std::vector<double> xa(n), xb(m);
    for (auto& x : xa) x = u(rng);
    for (auto& x : xb) x = u(rng);
    const auto wa = oracle::random_weights(static_cast<std::size_t>(n), rng);
    const auto wb = oracle::random_weights(static_cast<std::size_t>(m), rng);
    const auto mu = DiscreteMeasure::line(xa, wa), nu = DiscreteMeasure::line(xb, wb);
    const auto C = build_cost(mu.points(), nu.points(), CostKind::sq_euclidean);
    const auto r = solve_kantorovich(mu, nu, C);
    const auto q = oracle::quantile_coupling(xa, wa, xb, wb);
    Mat expected = Mat::Zero(n, m);
    for (std::size_t k = 0; k < q.mass.size(); ++k) expected(q.i[k], q.j[k]) += q.mass[k];
    plan_err = std::max(plan_err, (r.plan.gamma - expected).cwiseAbs().maxCoeff());
    const auto d = dual_potentials(mu, nu, C, r.plan);
    const auto b = brenier_check(r.plan, mu, nu, d.phi);
    if (!b.pass || !b.convex || !b.fenchel_equality) {
      ++brenier_fail;
      v.require(false, "trial " + std::to_string(trial) + ": " + b.message);
    }
  }
  v.require(plan_err <= 1e-9, "plan differs from quantile coupling by " + sci(plan_err));
  v.note("plan error " + sci(plan_err) + ", Brenier checks failed: " + std::to_string(brenier_fail));
  return v;
}

// ---- 9 ----------------------------------------------------------------------

Verdict ac9(const Paths&) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> schedule{2, 4, 8, 16, 32, 64};

  // 1D: flux on edge k is the source mass to its right (Σ at the left end),
  // or the cumulative source mass from the left (no Σ, balanced source).
  double flux_err = 0.0, spread = 0.0;
  auto one_d = [&](GridDomain d) {
    const int n = d.nx;
    std::vector<double> cum(static_cast<std::size_t>(n - 1), 0.0);
    for (int k = 0; k + 1 < n; ++k) {
      if (d.sigma_empty()) {
        for (int i = 0; i <= k; ++i) cum[static_cast<std::size_t>(k)] += d.f[i] * d.h;
      } else {
        for (int i = k + 1; i < n; ++i) cum[static_cast<std::size_t>(k)] -= d.f[i] * d.h;
      }
    }
    // σ points from sources to sinks: the oracle above has the sign of −div σ = f.
    std::vector<double> first;
    for (double p : schedule) {
      const auto r = solve_p_laplace(d, p, 1e-11);
      for (int k = 0; k + 1 < n; ++k) {
        flux_err = std::max(flux_err, std::abs(std::abs(r.sigma.horizontal[k]) - std::abs(cum[k])));
        if (!first.empty()) spread = std::max(spread, std::abs(r.sigma.horizontal[k] - first[k]));
      }
      if (first.empty()) first = r.sigma.horizontal;
    }
    const auto c = continuation_to_w1(d, schedule, 1e-11);
    for (int k = 0; k + 1 < n; ++k) flux_err = std::max(flux_err, std::abs(std::abs(c.sigma.horizontal[k]) - std::abs(cum[k])));
  };
  {
    GridDomain d(11, 1, 0.1);
    d.sigma[0] = 1;
    d.f[10] = 1.0 / d.h;
    d.f[6] = 0.5 / d.h;
    d.f[3] = -0.25 / d.h;
    one_d(d);
  }
  {
    GridDomain d(21, 1, 0.1);
    d.f[0] = 0.7 / d.h;
    d.f[5] = 0.3 / d.h;
    d.f[14] = -0.6 / d.h;
    d.f[20] = -0.4 / d.h;
    one_d(d);
  }
  v.require(flux_err <= 1e-8, "1D flux vs cumulative sum " + sci(flux_err));
  v.require(spread <= 1e-10, "1D flux depends on p by " + sci(spread));

  // 2D corner to corner.
  GridDomain d(21, 21, 0.05);
  d.f[d.index(0, 0)] = 1.0 / d.cell_measure();
  d.f[d.index(20, 20)] = -1.0 / d.cell_measure();
  const auto r = continuation_to_w1(d, schedule, 1e-8);
  Mat X(1, 2), Y(1, 2);
  X << 0.0, 0.0;
  Y << 1.0, 1.0;
  const double lp = solve_kantorovich(Vec::Ones(1), Vec::Ones(1), build_cost(X, Y, CostKind::geodesic, &d).c).value;
  const double rel = std::abs(r.value - lp) / lp, gap = r.stages.back().gap / r.value;
  const auto opt = optimality_residuals(r.u, r.sigma, d, 1e-3);
  const double t = elapsed(t0);
  v.require(rel <= 0.05, "Beckmann value off the transport LP by " + sci(rel));
  v.require(gap >= 0.0 && gap < 0.02, "relative gap at p=64 " + sci(gap));
  v.require(opt.eikonal_residual <= 0.05, "eikonal residual " + sci(opt.eikonal_residual) + " > 0.05");
  v.require(t < 60.0, "runtime " + sci(t) + " s");
  v.note("1D flux " + sci(flux_err) + ", p-spread " + sci(spread) + "; 2D value " + sci(r.value) + " vs LP " + sci(lp) +
         ", gap " + sci(gap) + ", eikonal " + sci(opt.eikonal_residual) + " on " + std::to_string(opt.active_edges) +
         " edges, " + sci(t) + " s");
  return v;
}

// ---- 10 ---------------------------------------------------------------------

Verdict ac10(const Paths&) {
  Verdict v;
  using oracle::kNone;
  using oracle::Steps;
  using oracle::units;
  // A corridor with an internal wall open at the top and Σ on the far wall.
  GridDomain d(12, 5, 0.5);
  for (int j = 0; j < 4; ++j) d.omega[d.index(5, j)] = 0;
  for (int j = 0; j < 5; ++j) d.sigma[d.index(11, j)] = 1;
  const auto apsp = oracle::grid_apsp(d);
  std::vector<int> nodes;
  for (int k = 0; k < d.nodes(); ++k)
    if (d.omega[k]) nodes.push_back(k);
  Mat P(static_cast<Eigen::Index>(nodes.size()), 2);
  for (std::size_t r = 0; r < nodes.size(); ++r) P.row(static_cast<Eigen::Index>(r)) << d.x(nodes[r]), d.y(nodes[r]);
  const Mat C = build_cost(P, P, CostKind::geodesic, &d).c;
  auto to_sigma = [&](int p) {
    Steps best = kNone;
    for (int s = 0; s < d.nodes(); ++s)
      if (d.sigma[s] && apsp[p][s] != kNone && (best == kNone || units(apsp[p][s]) < units(best))) best = apsp[p][s];
    return best;
  };
  long mismatches = 0, via_sigma = 0;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      const Steps direct = apsp[nodes[a]][nodes[b]], sa = to_sigma(nodes[a]), sb = to_sigma(nodes[b]);
      const Steps via{sa.first + sb.first, sa.second + sb.second};
      const bool use_via = units(via) < units(direct);
      via_sigma += use_via;
      if (C(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) != d.h * units(use_via ? via : direct)) ++mismatches;
    }
  v.require(mismatches == 0, std::to_string(mismatches) + " entries differ");
  v.require(via_sigma > 0, "fixture never routes through the free set");
  v.note(std::to_string(nodes.size() * nodes.size()) + " pairs exact, " + std::to_string(via_sigma) + " through the free set");
  return v;
}

// ---- 11 ---------------------------------------------------------------------

std::string strip_wall_time(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"wall_time_s\"") == std::string::npos) out += line + '\n';
  return out;
}

Verdict ac11(const Paths& paths) {
  Verdict v;
  if (paths.cli.empty() || paths.samples.empty()) {
    v.require(false, "needs --cli and --samples");
    return v;
  }
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(paths.samples))
    if (e.path().extension() == ".json") inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());
  const fs::path root = fs::temp_directory_path() / ("fenchelkit_ac11_" + std::to_string(std::random_device{}()));
  auto run = [&](const std::string& tag, int jobs) {
    std::string cmd = "\"" + paths.cli.string() + "\" run";
    for (const auto& in : inputs) cmd += " \"" + in.string() + "\"";
    cmd += " --seed 42 --jobs " + std::to_string(jobs) + " --out \"" + (root / tag).string() + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  fs::create_directories(root);
  const int a = run("a", 1), b = run("b", 4);
  v.require(a == b, "exit statuses differ between runs");
  std::size_t same = 0, total = 0;
  for (const auto& in : inputs) {
    fs::path name = in.filename();
    name.replace_extension();
    name += ".result.json";
    ++total;
    const auto fa = root / "a" / name, fb = root / "b" / name;
    if (!fs::exists(fa) || !fs::exists(fb)) {
      v.require(false, name.string() + " missing");
      continue;
    }
    if (strip_wall_time(fa) == strip_wall_time(fb)) {
      ++same;
    } else {
      v.require(false, name.string() + " differs");
    }
  }
  fs::remove_all(root);
  v.require(total > 0, "no fixtures found");
  v.note(std::to_string(same) + "/" + std::to_string(total) + " result files identical (jobs 1 vs 4, seed 42)");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::pair<const char*, Verdict (*)(const Paths&)>>> criteria{
      {"ac1", {"conjugate table", ac1}},          {"ac2", {"biconjugate equals convex envelope", ac2}},
      {"ac3", {"quadratic conjugation", ac3}},    {"ac4", {"LP strong duality and complementarity", ac4}},
      {"ac5", {"convex-program KKT", ac5}},       {"ac6", {"Kantorovich duality", ac6}},
      {"ac7", {"distance case", ac7}},            {"ac8", {"Brenier structure", ac8}},
      {"ac9", {"Beckmann consistency", ac9}},     {"ac10", {"geodesic cost with free set", ac10}},
      {"ac11", {"CLI determinism", ac11}}};
  Paths paths;
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      paths.cli = argv[++i];
    } else if (a == "--samples" && i + 1 < argc) {
      paths.samples = argv[++i];
    } else {
      selected.push_back(a);
    }
  }
  int failed = 0;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    Verdict v;
    try {
      v = entry.second(paths);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s %s: %s\n", v.pass ? "PASS" : "FAIL", id.c_str(), entry.first, v.detail.c_str());
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
