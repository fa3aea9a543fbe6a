#include <gtest/gtest.h>

#include <random>

#include "fenchelkit/beckmann.hpp"
#include "fenchelkit/transport.hpp"

using namespace fenchelkit;

namespace {

const std::vector<double> kSchedule{2, 4, 8, 16, 32, 64};

// Path of n nodes on [0, L].
GridDomain path(int n, double L) { return GridDomain(n, 1, L / (n - 1)); }

GridDomain corner_fixture() {
  GridDomain d(21, 21, 1.0 / 20);
  d.f[d.index(0, 0)] = 1.0 / (d.h * d.h);
  d.f[d.index(20, 20)] = -1.0 / (d.h * d.h);
  return d;
}

FlowField random_flow(const GridDomain& d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FlowField s(d);
  for (auto& v : s.horizontal) v = g(rng);
  for (auto& v : s.vertical) v = g(rng);
  return s;
}

}  // namespace

TEST(Divergence, Examples) {
  GridDomain d(5, 4, 0.5);
  FlowField s(d);
  for (auto& v : s.horizontal) v = 1.0;
  const auto div = divergence(s, d);
  for (int j = 0; j < 4; ++j)
    for (int i = 1; i < 4; ++i) EXPECT_EQ(div[d.index(i, j)], 0.0);

  FlowField one(d);
  one.horizontal[one.horizontal.size() - 1] = 1.0;  // edge (3, 3) → (4, 3)
  const auto d1 = divergence(one, d);
  EXPECT_EQ(d1[d.index(3, 3)], 2.0);
  EXPECT_EQ(d1[d.index(4, 3)], -2.0);
  double rest = 0.0;
  for (double v : d1) rest += std::abs(v);
  EXPECT_EQ(rest, 4.0);
}

TEST(Divergence, AdjointToEdgeGradient) {
  std::mt19937_64 rng(81);
  std::normal_distribution<double> g;
  GridDomain d(9, 7, 0.1);
  d.omega[d.index(4, 3)] = 0;
  d.omega[d.index(0, 6)] = 0;
  d.sigma[d.index(8, 0)] = 1;
  for (int trial = 0; trial < 20; ++trial) {
    const FlowField s = random_flow(d, rng);
    PotentialField phi(d.nodes());
    for (auto& v : phi) v = g(rng);
    for (int k = 0; k < d.nodes(); ++k)
      if (d.in_sigma(k)) phi[k] = 0.0;
    const auto div = divergence(s, d);
    const FlowField gr = edge_gradient(phi, d);
    // Direct double sums with node and edge measure h².
    double lhs = 0.0, rhs = 0.0, mag = 0.0;
    for (int k = 0; k < d.nodes(); ++k) {
      lhs += div[k] * phi[k] * d.cell_measure();
      mag += std::abs(div[k] * phi[k]) * d.cell_measure();
    }
    for (std::size_t e = 0; e < s.horizontal.size(); ++e) rhs -= s.horizontal[e] * gr.horizontal[e] * d.cell_measure();
    for (std::size_t e = 0; e < s.vertical.size(); ++e) rhs -= s.vertical[e] * gr.vertical[e] * d.cell_measure();
    EXPECT_NEAR(lhs, rhs, 1e-13 * std::max(1.0, mag));
  }
}

TEST(Divergence, MassConservation) {
  std::mt19937_64 rng(83);
  GridDomain d(6, 5, 0.2);
  d.omega[d.index(2, 2)] = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto div = divergence(random_flow(d, rng), d);
    double total = 0.0, mag = 0.0;
    for (double v : div) {
      total += v * d.cell_measure();
      mag += std::abs(v) * d.cell_measure();
    }
    EXPECT_LE(std::abs(total), 1e-14 * mag);
  }
}

TEST(PLaplace, PathFluxIsCumulativeSumForEveryP) {
  GridDomain d = path(11, 1.0);
  d.sigma[0] = 1;
  d.f[10] = 1.0 / d.h;
  d.f[6] = 0.5 / d.h;
  d.f[3] = -0.25 / d.h;
  // σ on edge k is the source mass to its right.
  std::vector<double> oracle(10, 0.0);
  for (int k = 0; k < 10; ++k)
    for (int i = k + 1; i < 11; ++i) oracle[k] += d.f[i] * d.h;
  std::vector<double> first;
  for (double p : kSchedule) {
    auto r = solve_p_laplace(d, p, 1e-11);
    for (int k = 0; k < 10; ++k) EXPECT_NEAR(r.sigma.horizontal[k], oracle[k], 1e-8) << p;
    if (first.empty()) {
      first = r.sigma.horizontal;
    } else {
      for (int k = 0; k < 10; ++k) EXPECT_NEAR(r.sigma.horizontal[k], first[k], 1e-10) << p;
    }
  }
}

TEST(PLaplace, ZeroSource) {
  GridDomain d(6, 6, 0.2);
  d.sigma[0] = 1;
  auto r = solve_p_laplace(d, 4.0, 1e-12);
  for (double v : r.u) EXPECT_EQ(v, 0.0);
  for (double v : r.sigma.horizontal) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.iterations, 0);
}

TEST(PLaplace, QuadraticCaseIsFivePointLaplacian) {
  // Σ = whole boundary; f smooth.
  const int n = 13;
  GridDomain d(n, n, 1.0 / (n - 1));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int k = d.index(i, j);
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1) d.sigma[k] = 1;
      d.f[k] = std::sin(3.0 * d.x(k)) * std::cos(2.0 * d.y(k)) + 1.0;
    }
  auto r = solve_p_laplace(d, 2.0, 1e-12);
  // Textbook (4u − Σ neighbours) / h² = f on interior nodes, dense solve.
  const int m = n - 2;
  Mat A = Mat::Zero(m * m, m * m);
  Vec b(m * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const int row = j * m + i;
      A(row, row) = 4.0 / (d.h * d.h);
      if (i > 0) A(row, row - 1) = -1.0 / (d.h * d.h);
      if (i < m - 1) A(row, row + 1) = -1.0 / (d.h * d.h);
      if (j > 0) A(row, row - m) = -1.0 / (d.h * d.h);
      if (j < m - 1) A(row, row + m) = -1.0 / (d.h * d.h);
      b[row] = d.f[d.index(i + 1, j + 1)];
    }
  const Vec u = A.fullPivLu().solve(b);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) EXPECT_NEAR(r.u[d.index(i + 1, j + 1)], u[j * m + i], 1e-10);
}

TEST(PLaplace, Errors) {
  GridDomain d = path(5, 1.0);
  d.f[0] = 1.0;
  EXPECT_THROW(solve_p_laplace(d, 2.0, 1e-10), Error);  // Σ = ∅ and unbalanced
  d.sigma[4] = 1;
  EXPECT_THROW(solve_p_laplace(d, 65.0, 1e-10), Error);
  EXPECT_THROW(solve_p_laplace(d, 1.5, 1e-10), Error);
  PLaplaceOptions none;
  none.max_iterations = 0;
  try {
    solve_p_laplace(d, 4.0, 1e-10, nullptr, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("p-solve failed", 0), 0u);
  }
}

TEST(Continuation, TwoAtomsOnASegment) {
  const double L = 2.0;
  GridDomain d = path(21, L);
  d.f[0] = 1.0 / d.h;
  d.f[20] = -1.0 / d.h;
  auto r = continuation_to_w1(d, kSchedule, 1e-10);
  EXPECT_NEAR(r.value, L, 1e-8);
  for (double v : r.sigma.horizontal) EXPECT_NEAR(std::abs(v), 1.0, 1e-8);
  EXPECT_NEAR(r.primal, L, 1e-8);
  ASSERT_EQ(r.stages.size(), kSchedule.size());
  for (const auto& s : r.stages) {
    EXPECT_TRUE(s.weak_duality);
    EXPECT_NEAR(s.value, L, 1e-8);
  }
}

TEST(Continuation, SourceInsideSigmaCostsNothing) {
  GridDomain d(7, 7, 0.1);
  for (int j = 2; j <= 4; ++j)
    for (int i = 2; i <= 4; ++i) d.sigma[d.index(i, j)] = 1;
  d.f[d.index(3, 3)] = 5.0;
  d.f[d.index(2, 4)] = -3.0;
  auto r = continuation_to_w1(d, kSchedule, 1e-9);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.primal, 0.0);
}

TEST(Continuation, CornerToCornerAgainstGeodesicTransport) {
  GridDomain d = corner_fixture();
  auto r = continuation_to_w1(d, kSchedule, 1e-8);
  Mat X(1, 2), Y(1, 2);
  X << 0.0, 0.0;
  Y << 1.0, 1.0;
  const Mat C = build_cost(X, Y, CostKind::geodesic, &d).c;
  const double lp = solve_kantorovich(Vec::Ones(1), Vec::Ones(1), C).value;
  EXPECT_NEAR(lp, std::sqrt(2.0), 1e-15);
  EXPECT_LE(std::abs(r.value - lp), 0.05 * lp);
  EXPECT_LE(r.gap, 0.02 * r.value);
  EXPECT_GE(r.gap, -1e-9);
  // Gap decreases along the schedule.
  for (std::size_t k = 1; k < r.stages.size(); ++k) {
    EXPECT_LE(r.stages[k].gap, r.stages[k - 1].gap + 1e-9);
    EXPECT_TRUE(r.stages[k].weak_duality);
  }
  // The projected potential is a Lipschitz certificate vanishing nowhere it shouldn't.
  const auto lip = lipschitz_constant(r.u, d);
  EXPECT_LE(lip.element, 1.0);
  EXPECT_LE(lip.edge, 1.0 + 1e-6);
  // At p = 64 the raw potential obeys |∇u_T| = |σ_T|^{1/63} exactly.
  const P1Mesh mesh(d);
  for (std::size_t t = 0; t < mesh.elements().size(); ++t)
    EXPECT_NEAR(mesh.gradient(mesh.elements()[t], r.u_raw).norm(), std::pow(r.sigma.elements[t].norm(), 1.0 / 63),
                1e-12);
}

TEST(Optimality, ExactAndZeroPotentials) {
  GridDomain d = path(11, 1.0);
  d.f[0] = 1.0 / d.h;
  d.f[10] = -1.0 / d.h;
  FlowField s(d);
  PotentialField u(11);
  for (int k = 0; k < 11; ++k) u[k] = -k * d.h;
  for (auto& v : s.horizontal) v = -1.0;
  auto r = optimality_residuals(u, s, d, 1e-3);
  EXPECT_LE(r.divergence_residual, 1e-10);
  EXPECT_LE(r.eikonal_residual, 1e-10);
  EXPECT_LE(r.neumann_residual, 1e-10);
  EXPECT_EQ(r.active_edges, 10);
  auto z = optimality_residuals(PotentialField(11, 0.0), s, d, 1e-3);
  EXPECT_NEAR(z.eikonal_residual, 1.0, 1e-15);
}

TEST(Optimality, DirichletResidual) {
  GridDomain d = path(5, 1.0);
  d.sigma[0] = 1;
  auto r = optimality_residuals(PotentialField{0.5, 0, 0, 0, 0}, FlowField(d), d, 1e-3);
  EXPECT_EQ(r.dirichlet_residual, 0.5);
}

TEST(Functionals, Entropy) {
  GridDomain d = path(11, 1.0);
  FlowField s(d);
  EXPECT_EQ(entropy_functional(s, d), 0.0);
  for (auto& v : s.horizontal) v = 1.0;
  EXPECT_EQ(entropy_functional(s, d), 0.0);
  for (auto& v : s.horizontal) v = 2.0;
  EXPECT_NEAR(entropy_functional(s, d), 2.0 * std::log(2.0), 1e-14);
}

TEST(Functionals, RhoK) {
  GridDomain d(11, 11, 0.1);
  const P1Mesh mesh(d);
  FlowField s(d);
  s.elements.assign(mesh.elements().size(), Eigen::Vector2d(1.0, 0.0));
  EXPECT_NEAR(rho_k_functional(s, d, NormKind::linf), 1.0, 1e-14);
  EXPECT_NEAR(rho_k_functional(s, d, NormKind::l2), beckmann_value(s, d), 0.0);

  std::mt19937_64 rng(89);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    FlowField r(d);
    for (std::size_t t = 0; t < mesh.elements().size(); ++t) r.elements.emplace_back(g(rng), g(rng));
    EXPECT_EQ(rho_k_functional(r, d, NormKind::l2), beckmann_value(r, d));
    // Edgewise: ‖·‖∞ ≤ ‖·‖₂ ≤ ‖·‖₁ for every element vector.
    for (std::size_t t = 0; t < mesh.elements().size(); ++t) {
      FlowField one(d);
      one.elements.assign(mesh.elements().size(), Eigen::Vector2d::Zero());
      one.elements[t] = r.elements[t];
      const double a = rho_k_functional(one, d, NormKind::l1), b = rho_k_functional(one, d, NormKind::l2),
                   c = rho_k_functional(one, d, NormKind::linf);
      EXPECT_LE(a, b * (1 + 1e-15));
      EXPECT_LE(b, c * (1 + 1e-15));
    }
  }
}

TEST(WeakDuality, LipschitzPotentialsVersusBalancedFlows) {
  std::mt19937_64 rng(97);
  std::normal_distribution<double> g;
  GridDomain d(9, 9, 0.125);
  d.sigma[d.index(0, 8)] = 1;
  d.f[d.index(6, 2)] = 40.0;
  d.f[d.index(2, 5)] = -25.0;
  const auto p = solve_p_laplace(d, 4.0, 1e-10);
  const double value = beckmann_value(p.sigma, d);
  for (int trial = 0; trial < 30; ++trial) {
    PotentialField u(d.nodes());
    for (auto& v : u) v = 3.0 * g(rng);
    u = lipschitz_projection(u, d);
    EXPECT_LE(lipschitz_constant(u, d).element, 1.0);
    for (int k = 0; k < d.nodes(); ++k)
      if (d.in_sigma(k)) {
        EXPECT_EQ(u[k], 0.0);
      }
    EXPECT_LE(potential_pairing(u, d), value + 1e-8);
  }
}
