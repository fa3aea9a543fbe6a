#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "cli/schema.hpp"

namespace fenchelkit::cli {

/// Central tolerance defaults; a problem file may override any of them
/// under "tolerances".
struct Tolerances {
  double lp = 1e-8;
  double certificate = 1e-6;
  double grid_factor = 2.0;  // grid-derived tolerance is grid_factor · h
};

/// Result of one problem: the envelope fields and the exit code.
struct Outcome {
  int code = 0;
  std::string status = "certified";
  std::string message;
  Json values = Json::object();
  Json certificates = Json::object();
  Json diagnostics = Json::object();
  Json series = Json::object();
};

struct Context {
  Tolerances tol;
  std::uint64_t seed = 0;
};

namespace detail {

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json series(std::vector<std::string> columns, Json rows) {
  Json s = Json::object();
  s["columns"] = columns;
  s["rows"] = std::move(rows);
  return s;
}

inline void certify(Outcome& o, bool ok, const std::string& why) {
  if (ok) return;
  o.code = 1;
  o.status = "uncertified";
  if (o.message.empty()) o.message = why;
}

inline Json ext(const ExtReal& v) { return v.is_finite() ? num(v.value()) : Json("inf"); }

}  // namespace detail

// ---- conjugate_core ---------------------------------------------------------

inline Outcome run_conjugate(const Node& in, const Context& ctx) {
  const FunctionDescriptor f = read_function(in["function"]);
  Outcome o;
  if (auto at = in.get("at")) {
    Json points = Json::array();
    for (std::size_t k = 0; k < at->size(); ++k) {
      const Vec y = at->at(k).vec();
      points.push_back({{"y", detail::vec_json(y)}, {"value", detail::ext(conjugate_value(f, y))}});
    }
    o.values["at"] = std::move(points);
  }
  if (!f.is<Sampled>() && !in.has("grid")) {
    if (!in.has("at")) in.fail("needs 'grid' or 'at' for a closed-form function");
    return o;
  }
  const GridFunction fs = f.is<Sampled>() ? f.as<Sampled>().f : validated(in, [&] { return sample(f, read_grid(in["grid"])); });
  if (fs.dimension() != 1) in["function"].fail("tables are one-dimensional");
  const Grid1D dual = in.has("dual_grid") ? read_grid(in["dual_grid"]) : default_dual_grid(fs);
  const LegendreResult lr = legendre_1d(fs, dual);

  Json rows = Json::array();
  for (int k = 0; k < dual.size(); ++k) rows.push_back({num(dual.node(k)), detail::ext(lr.values[k])});
  o.series["dual_curve"] = detail::series({"y", "f*(y)"}, std::move(rows));

  // Convexity of the table.
  double worst = 0.0;
  for (int k = 1; k + 1 < dual.size(); ++k)
    if (lr.values[k - 1].is_finite() && lr.values[k].is_finite() && lr.values[k + 1].is_finite())
      worst = std::min(worst, lr.values[k - 1].value() - 2.0 * lr.values[k].value() + lr.values[k + 1].value());
  o.certificates["min_second_difference"] = num(worst);
  detail::certify(o, worst >= -ctx.tol.certificate, "conjugate table is not convex");

  // Against the closed form wherever the discrete maximizer is interior.
  if (!f.is<Sampled>()) {
    const int last = fs.grid().size() - 1;
    double err = 0.0;
    int compared = 0;
    for (int k = 0; k < dual.size(); ++k) {
      if (lr.argsup[k] <= 0 || lr.argsup[k] >= last || lr.values[k].is_infinite()) continue;
      const ExtReal exact = conjugate_value(f, dual.node(k));
      if (exact.is_infinite()) continue;
      err = std::max(err, std::abs(exact.value() - lr.values[k].value()));
      ++compared;
    }
    const double bound = ctx.tol.grid_factor * fs.grid().spacing();
    o.certificates["closed_form_error"] = num(err);
    o.certificates["closed_form_bound"] = num(bound);
    o.diagnostics["compared_nodes"] = compared;
    detail::certify(o, err <= bound, "sampled conjugate departs from the closed form");
  }
  return o;
}

inline Outcome run_envelope(const Node& in, const Context& ctx) {
  const FunctionDescriptor f = read_function(in["function"]);
  const GridFunction fs = f.is<Sampled>() ? f.as<Sampled>().f : validated(in, [&] { return sample(f, read_grid(in["grid"])); });
  if (fs.dimension() != 1) in["function"].fail("envelopes are one-dimensional");
  const GridFunction env = convex_envelope(fs);
  Outcome o;
  Json rows = Json::array();
  double above = 0.0;
  for (int k = 0; k < fs.grid().size(); ++k) {
    rows.push_back({num(fs.grid().node(k)), detail::ext(fs[k]), detail::ext(env[k])});
    if (fs[k].is_finite() && env[k].is_finite()) above = std::max(above, env[k].value() - fs[k].value());
  }
  o.series["envelope"] = detail::series({"x", "f(x)", "f**(x)"}, std::move(rows));
  o.certificates["max_excess_over_f"] = num(above);
  detail::certify(o, above <= ctx.tol.certificate, "envelope exceeds the function");
  return o;
}

inline Outcome run_subdiff(const Node& in, const Context& ctx) {
  const FunctionDescriptor f = read_function(in["function"]);
  const Vec x = in["x"].vec();
  const double tol = in.has("tol") ? in["tol"].number() : ctx.tol.certificate;
  if (!(tol > 0.0)) in["tol"].fail("must be positive");
  DualGrid dual;
  if (in.has("dual_grid")) dual.x = read_grid(in["dual_grid"]);
  if (in.has("dual_grid_y")) dual.y = read_grid(in["dual_grid_y"]);
  const SubdiffSet s = subdifferential(f, x, tol, dual);
  Outcome o;
  o.values["empty"] = s.empty();
  o.values["out_of_domain"] = s.out_of_domain;
  if (s.dim == 1) {
    if (!s.empty()) o.values["interval"] = {num(s.lo), num(s.hi)};
  } else {
    Json v = Json::array();
    for (const auto& p : s.vertices) v.push_back({num(p[0]), num(p[1])});
    o.values["vertices"] = std::move(v);
  }
  return o;
}

// ---- duality_calculus -------------------------------------------------------

inline Outcome run_sum(const Node& in, const Context&) {
  const FunctionDescriptor f = read_function(in["f"]), g = read_function(in["g"]);
  const Grid1D grid = read_grid(in["grid"]);
  const Grid1D dual = in.has("dual_grid") ? read_grid(in["dual_grid"])
                                          : default_dual_grid(validated(in, [&] { return sample(f, grid); }));
  Outcome o;
  const InfConvolution ic = conjugate_of_sum(f, g, grid, dual);
  Json rows = Json::array();
  for (int k = 0; k < ic.values.grid().size(); ++k)
    rows.push_back({num(ic.values.grid().node(k)), detail::ext(ic.values[k])});
  o.series["dual_curve"] = detail::series({"y", "(f+g)*(y)"}, std::move(rows));
  return o;
}

inline Outcome run_fr(const Node& in, const Context& ctx) {
  const FunctionDescriptor phi = read_function(in["phi"]), psi = read_function(in["psi"]);
  const Mat A = in["A"].mat();
  const LinearMap map = validated(in["A"], [&] { return LinearMap(A); });
  FenchelRockafellarOptions opt;
  opt.gap_tol = ctx.tol.certificate;
  const PrimalDualPair r = fenchel_rockafellar(phi, psi, map, opt);
  Outcome o;
  o.values["primal"] = detail::ext(r.primal_value);
  o.values["dual"] = num(r.dual_value);
  o.values["gap"] = num(r.gap);
  o.values["u"] = detail::vec_json(r.primal_point);
  o.values["sigma"] = detail::vec_json(r.dual_point);
  o.certificates["extremality_residuals"] = {num(r.extremality_residuals.first), num(r.extremality_residuals.second)};
  o.diagnostics["qualified"] = r.qualified;
  o.diagnostics["iterations"] = r.iterations;
  detail::certify(o, r.certified, r.qualified ? "duality gap not closed" : "qualification not verified");
  return o;
}

// ---- programs ---------------------------------------------------------------

namespace detail {

// A feasible, bounded instance with planted complementary optima.
inline LpProblem random_lp(int m, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 1.0);
  std::bernoulli_distribution coin(0.5);
  const Mat A = Mat::NullaryExpr(m, n, [&] { return u(rng); });
  Vec x = Vec::Zero(n), y = Vec::Zero(m), slack = Vec::Zero(m), reduced = Vec::Zero(n);
  for (int j = 0; j < n; ++j) (coin(rng) ? x[j] : reduced[j]) = pos(rng);
  for (int i = 0; i < m; ++i) (coin(rng) ? y[i] : slack[i]) = pos(rng);
  return LpProblem(reduced - A.transpose() * y, A, A * x + slack);
}

}  // namespace detail

inline Outcome run_lp(const Node& in, const Context& ctx) {
  std::mt19937_64 rng(ctx.seed);
  const LpProblem p = in.has("random")
                          ? detail::random_lp(in["random"]["m"].integer(1, 200), in["random"]["n"].integer(1, 200), rng)
                          : validated(in, [&] { return LpProblem(in["c"].vec(), in["A"].mat(), in["b"].vec()); });
  const LpSolution s = solve_lp(p);
  Outcome o;
  o.values["status"] = to_string(s.status);
  o.diagnostics["pivots"] = s.pivots;
  if (s.status != LpStatus::optimal) {
    o.code = 1;
    o.status = to_string(s.status);
    o.message = std::string("program is ") + to_string(s.status);
    return o;
  }
  o.values["primal"] = num(s.primal_value);
  o.values["dual"] = num(s.dual_value);
  o.values["gap"] = num(s.primal_value - s.dual_value);
  o.values["x"] = detail::vec_json(s.x);
  o.values["y"] = detail::vec_json(s.y);
  const ComplementarityReport r = verify_complementarity(p, s.x, s.y, ctx.tol.lp);
  o.certificates["primal_residual"] = num(r.primal_residual);
  o.certificates["dual_residual"] = num(r.dual_residual);
  o.certificates["primal_infeasibility"] = num(r.primal_infeasibility);
  o.certificates["dual_infeasibility"] = num(r.dual_infeasibility);
  detail::certify(o, r.pass, "complementarity not verified");
  return o;
}

inline Outcome run_cp(const Node& in, const Context& ctx) {
  const FunctionDescriptor f = read_function(in["objective"]);
  std::vector<FunctionDescriptor> g;
  if (auto cs = in.get("constraints"))
    for (std::size_t k = 0; k < cs->size(); ++k) g.push_back(read_function(cs->at(k)));
  const Node boxn = in["box"];
  std::vector<Grid1D> box;
  for (std::size_t k = 0; k < boxn.size(); ++k) box.push_back(read_grid(boxn.at(k)));
  const ConvexProgram cp = validated(in, [&] { return ConvexProgram(f, g, box); });
  Outcome o;
  KktCertificate c;
  try {
    c = solve_convex_program(cp);
  } catch (const Error& e) {
    o.code = 1;
    o.status = "uncertified";
    o.message = e.what();
    return o;
  }
  o.values["primal"] = num(c.primal_value);
  o.values["dual"] = num(c.dual_value);
  o.values["gap"] = num(c.primal_value - c.dual_value);
  o.values["x"] = detail::vec_json(c.x_bar);
  o.values["lambda"] = detail::vec_json(c.lambda_bar);
  const double comp = c.complementarity_residuals.size() ? c.complementarity_residuals.maxCoeff() : 0.0;
  o.certificates["stationarity"] = num(c.stationarity_residual);
  o.certificates["complementarity"] = num(comp);
  o.certificates["max_violation"] = num(c.max_violation);
  o.diagnostics["iterations"] = c.iterations;
  o.diagnostics["coercivity_warning"] = c.coercivity_warning;
  const double t = ctx.tol.certificate;
  detail::certify(o, c.stationarity_residual <= t && comp <= t && c.max_violation <= t, "KKT residuals above tolerance");
  return o;
}

// ---- transport --------------------------------------------------------------

namespace detail {

inline CostKind read_cost(const Node& n) {
  const auto s = n.str();
  if (s == "euclidean") return CostKind::euclidean;
  if (s == "sq_euclidean") return CostKind::sq_euclidean;
  if (s == "geodesic") return CostKind::geodesic;
  n.fail("expected euclidean, sq_euclidean or geodesic");
}

inline Vec read_weights(const Node& n, Eigen::Index count) {
  const Vec w = n.vec();
  if (w.size() != count) n.fail("expected one weight per point");
  if (!w.allFinite() || (w.array() < 0.0).any()) n.fail("weights must be finite and nonnegative");
  return w;
}

inline Mat random_points(int count, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Mat::NullaryExpr(count, dim, [&] { return u(rng); });
}

inline Vec random_weights(int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Vec w = Vec::NullaryExpr(count, [&] { return u(rng); });
  return w / w.sum();
}

}  // namespace detail

inline Outcome run_ot(const Node& in, const Context& ctx) {
  Mat X, Y;
  Vec mu, nu;
  CostKind kind = CostKind::euclidean;
  std::optional<GridDomain> dom;
  if (auto r = in.get("random")) {
    std::mt19937_64 rng(ctx.seed);
    const int n = (*r)["n"].integer(1, 100), m = (*r)["m"].integer(1, 100);
    const int dim = r->has("dim") ? (*r)["dim"].integer(1, 2) : 1;
    if (r->has("cost")) kind = detail::read_cost((*r)["cost"]);
    if (kind == CostKind::geodesic) (*r)["cost"].fail("random instances use point costs");
    X = detail::random_points(n, dim, rng);
    Y = detail::random_points(m, dim, rng);
    mu = detail::random_weights(n, rng);
    nu = detail::random_weights(m, rng);
  } else {
    X = read_points(in["source"]["points"]);
    Y = read_points(in["target"]["points"]);
    if (X.cols() != Y.cols()) in["target"]["points"].fail("dimension differs from the source");
    mu = detail::read_weights(in["source"]["weights"], X.rows());
    nu = detail::read_weights(in["target"]["weights"], Y.rows());
    if (in.has("cost")) kind = detail::read_cost(in["cost"]);
    if (kind == CostKind::geodesic) dom = read_domain(in["domain"]);
  }
  if (X.rows() > 100 || Y.rows() > 100) in.fail("at most 100 points per side");
  const CostMatrix C = validated(in, [&] { return build_cost(X, Y, kind, dom ? &*dom : nullptr); });

  Outcome o;
  o.diagnostics["cost"] = to_string(kind);
  if (std::abs(mu.sum() - nu.sum()) > 1e-9 * std::max(1.0, mu.sum())) {
    o.code = 1;
    o.status = "infeasible";
    o.message = "marginal mismatch";
    return o;
  }
  const KantorovichResult kr = solve_kantorovich(mu, nu, C.c);
  const DualPotentials dp = dual_potentials(mu, nu, C.c, kr.plan);
  const double gap = kr.value - dp.dual_value;
  o.values["primal"] = num(kr.value);
  o.values["dual"] = num(dp.dual_value);
  o.values["gap"] = num(gap);
  o.certificates["support_residual"] = num(dp.support_residual);
  o.certificates["feasibility_slack"] = num(dp.feasibility_slack);
  o.certificates["marginal_residuals"] = {num(kr.plan.row_residual), num(kr.plan.col_residual)};
  o.diagnostics["pivots"] = kr.plan.pivots;
  o.diagnostics["sweeps"] = dp.sweeps;

  Json plan = Json::array();
  for (Eigen::Index i = 0; i < kr.plan.gamma.rows(); ++i)
    for (Eigen::Index j = 0; j < kr.plan.gamma.cols(); ++j)
      if (kr.plan.gamma(i, j) > 0.0) plan.push_back({i, j, num(kr.plan.gamma(i, j)), num(C.c(i, j))});
  o.series["plan"] = detail::series({"i", "j", "mass", "cost"}, std::move(plan));
  Json pot = Json::array();
  for (Eigen::Index k = 0; k < std::max(dp.phi.size(), dp.psi.size()); ++k)
    pot.push_back({k, k < dp.phi.size() ? num(dp.phi[k]) : Json(), k < dp.psi.size() ? num(dp.psi[k]) : Json()});
  o.series["potentials"] = detail::series({"index", "phi", "psi"}, std::move(pot));

  const double scale = std::max(1.0, std::abs(kr.value));
  detail::certify(o, dp.support_ok, dp.violation);
  detail::certify(o, std::abs(gap) <= ctx.tol.lp * scale, "duality gap above tolerance");
  detail::certify(o, dp.feasibility_slack >= -ctx.tol.lp * scale, "potentials are not feasible");
  return o;
}

inline Outcome run_krnorm(const Node& in, const Context& ctx) {
  const Mat P = read_points(in["points"]);
  const Vec plus = detail::read_weights(in["plus"], P.rows());
  const Vec minus = detail::read_weights(in["minus"], P.rows());
  if (P.rows() > 100) in["points"].fail("at most 100 points");
  Mat D;
  if (auto d = in.get("distance")) {
    D = d->mat();
    if (D.rows() != P.rows() || D.cols() != P.rows()) d->fail("expected an N×N matrix");
    validated(*d, [&] {
      check_semi_distance(D);
      return 0;
    });
  } else {
    D = build_cost(P, P, CostKind::euclidean).c;
  }
  Outcome o;
  if (std::abs(plus.sum() - minus.sum()) > 1e-9 * std::max(1.0, plus.sum())) {
    o.code = 1;
    o.status = "infeasible";
    o.message = "marginal mismatch";
    return o;
  }
  const KantorovichRubinsteinResult r = kantorovich_rubinstein(plus, minus, D);
  o.values["primal"] = num(r.primal_value);
  o.values["dual"] = num(r.value);
  o.values["gap"] = num(r.primal_value - r.value);
  o.certificates["lipschitz_violation"] = num(r.lipschitz_violation);
  Json rows = Json::array();
  for (Eigen::Index k = 0; k < r.u.size(); ++k) rows.push_back({k, num(r.u[k])});
  o.series["potential"] = detail::series({"index", "u"}, std::move(rows));
  detail::certify(o, r.lipschitz_violation <= ctx.tol.certificate, "potential is not 1-Lipschitz");
  detail::certify(o, std::abs(r.primal_value - r.value) <= ctx.tol.lp * std::max(1.0, r.primal_value),
                  "duality gap above tolerance");
  return o;
}

// ---- beckmann ---------------------------------------------------------------

inline Outcome run_flow(const Node& in, const Context& ctx) {
  const GridDomain dom = read_domain(in["domain"]);
  std::vector<double> schedule{2, 4, 8, 16, 32, 64};
  if (auto s = in.get("schedule")) {
    const Vec v = s->vec();
    schedule.assign(v.begin(), v.end());
  }
  const double tol = in.has("tol") ? in["tol"].number() : 1e-8;
  const double eps = in.has("eps") ? in["eps"].number() : 1e-3;
  const ContinuationResult r = continuation_to_w1(dom, schedule, tol);
  const OptimalityReport opt = optimality_residuals(r.u_raw, r.sigma, dom, eps);
  const LipschitzReport lip = lipschitz_constant(r.u, dom);

  Outcome o;
  o.values["primal"] = num(r.value);
  o.values["dual"] = num(r.primal);
  o.values["gap"] = num(r.gap);
  o.certificates["divergence_residual"] = num(opt.divergence_residual);
  o.certificates["eikonal_residual"] = num(opt.eikonal_residual);
  o.certificates["dirichlet_residual"] = num(opt.dirichlet_residual);
  o.certificates["lipschitz_element"] = num(lip.element);
  o.certificates["lipschitz_edge"] = num(lip.edge);
  o.diagnostics["active_edges"] = opt.active_edges;

  Json stages = Json::array();
  bool weak = true;
  for (const auto& s : r.stages) {
    stages.push_back({num(s.p), num(s.value), num(s.primal), num(s.gap), num(s.residual), s.iterations});
    weak = weak && s.weak_duality;
  }
  o.series["gap_vs_p"] = detail::series({"p", "value", "primal", "gap", "residual", "iterations"}, std::move(stages));
  Json pot = Json::array();
  for (int k = 0; k < dom.nodes(); ++k)
    if (dom.in_omega(k)) pot.push_back({num(dom.x(k)), num(dom.y(k)), num(r.u[k]), num(r.u_raw[k])});
  o.series["potential"] = detail::series({"x", "y", "u", "u_raw"}, std::move(pot));
  Json flux = Json::array();
  for (int j = 0; j < dom.ny; ++j)
    for (int i = 0; i + 1 < dom.nx; ++i)
      flux.push_back({"h", i, j, num(r.sigma.horizontal[static_cast<std::size_t>(j * (dom.nx - 1) + i)])});
  for (int j = 0; j + 1 < dom.ny; ++j)
    for (int i = 0; i < dom.nx; ++i)
      flux.push_back({"v", i, j, num(r.sigma.vertical[static_cast<std::size_t>(j * dom.nx + i)])});
  o.series["flux"] = detail::series({"axis", "i", "j", "sigma"}, std::move(flux));

  const double bound = ctx.tol.grid_factor * dom.h * std::max(1.0, r.value);
  o.certificates["gap_bound"] = num(bound);
  detail::certify(o, weak, "weak duality failed at some stage");
  detail::certify(o, r.gap <= bound, "primal-dual gap above the grid tolerance");
  detail::certify(o, lip.element <= 1.0 + ctx.tol.certificate, "projected potential is not 1-Lipschitz");
  return o;
}

using Handler = std::function<Outcome(const Node&, const Context&)>;

inline const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"conjugate", run_conjugate}, {"envelope", run_envelope}, {"subdiff", run_subdiff}, {"sum", run_sum},
      {"fr", run_fr},               {"lp", run_lp},             {"cp", run_cp},           {"ot", run_ot},
      {"krnorm", run_krnorm},       {"flow", run_flow}};
  return table;
}

}  // namespace fenchelkit::cli
