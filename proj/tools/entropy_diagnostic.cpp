// Compares the flow entropy Σ|σ_T| log|σ_T| w_T across the near-optimal flows
// produced along the p-continuation and across their convex combinations.
// Whether the p → ∞ limit selects the entropy minimizer is an open question,
// so this prints a table and never fails.

#include <cstdio>
#include <vector>

#include "fenchelkit/fenchelkit.hpp"

using namespace fenchelkit;

namespace {

GridDomain corner(int n) {
  GridDomain d(n, n, 1.0 / (n - 1));
  d.f[d.index(0, 0)] = 1.0 / d.cell_measure();
  d.f[d.index(n - 1, n - 1)] = -1.0 / d.cell_measure();
  return d;
}

GridDomain two_pairs(int n) {
  GridDomain d(n, n, 1.0 / (n - 1));
  const double m = 0.5 / d.cell_measure();
  d.f[d.index(0, n / 4)] = m;
  d.f[d.index(0, 3 * n / 4)] = m;
  d.f[d.index(n - 1, n / 4)] = -m;
  d.f[d.index(n - 1, 3 * n / 4)] = -m;
  return d;
}

FlowField mix(const FlowField& a, const FlowField& b, double t) {
  FlowField s = a;
  for (std::size_t k = 0; k < s.horizontal.size(); ++k) s.horizontal[k] = (1 - t) * a.horizontal[k] + t * b.horizontal[k];
  for (std::size_t k = 0; k < s.vertical.size(); ++k) s.vertical[k] = (1 - t) * a.vertical[k] + t * b.vertical[k];
  for (std::size_t k = 0; k < s.elements.size(); ++k) s.elements[k] = (1 - t) * a.elements[k] + t * b.elements[k];
  return s;
}

void report(const char* name, const GridDomain& d) {
  std::printf("%s (%dx%d, h = %.4g)\n", name, d.nx, d.ny, d.h);
  std::printf("%8s %14s %14s\n", "p", "value", "entropy");
  std::vector<FlowField> flows;
  PotentialField u;
  for (double p : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    auto r = solve_p_laplace(d, p, 1e-9, u.empty() ? nullptr : &u);
    u = r.u;
    std::printf("%8g %14.8f %14.8f\n", p, beckmann_value(r.sigma, d), entropy_functional(r.sigma, d));
    flows.push_back(std::move(r.sigma));
  }
  // Mixtures of the last two flows stay balanced; their values bracket.
  std::printf("%8s %14s %14s\n", "t", "value", "entropy");
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const FlowField s = mix(flows[flows.size() - 2], flows.back(), t);
    std::printf("%8g %14.8f %14.8f\n", t, beckmann_value(s, d), entropy_functional(s, d));
  }
  std::printf("\n");
}

}  // namespace

int main() {
  report("corner to corner", corner(21));
  report("two parallel pairs", two_pairs(21));
}
