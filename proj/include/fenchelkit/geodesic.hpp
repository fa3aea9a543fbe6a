#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

#include "fenchelkit/grid_domain.hpp"

namespace fenchelkit {

/// A grid path length counted in axis steps and diagonal steps. Its value
/// h·(axis + diag·√2) is formed once, so equal paths give bit-identical
/// lengths whatever the order in which they were discovered.
struct StepCount {
  long axis = 0, diag = 0;
  bool reachable = true;

  static StepCount unreachable() { return {0, 0, false}; }
  double units() const { return reachable ? axis + diag * std::numbers::sqrt2 : std::numeric_limits<double>::infinity(); }
  double length(double h) const { return reachable ? h * units() : std::numeric_limits<double>::infinity(); }
  StepCount operator+(const StepCount& o) const {
    if (!reachable || !o.reachable) return unreachable();
    return {axis + o.axis, diag + o.diag, true};
  }
  // √2 is irrational, so distinct step counts never tie.
  bool operator<(const StepCount& o) const { return units() < o.units(); }
};

/// 8-neighbour graph on the Ω nodes of a grid. Axis edges join two Ω nodes
/// (length h); a diagonal is admitted only when its whole cell lies in Ω
/// (length h√2), so no path cuts a corner of the complement.
class GridGraph {
 public:
  struct Arc {
    int to;
    bool diagonal;
  };

  explicit GridGraph(const GridDomain& dom) : dom_(dom), adj_(dom.nodes()) {
    dom.validate();
    auto link = [&](int a, int b, bool diag) {
      adj_[a].push_back({b, diag});
      adj_[b].push_back({a, diag});
    };
    for (int j = 0; j < dom.ny; ++j)
      for (int i = 0; i < dom.nx; ++i) {
        const int k = dom.index(i, j);
        if (!dom.in_omega(k)) continue;
        if (i + 1 < dom.nx && dom.in_omega(k + 1)) link(k, k + 1, false);
        if (j + 1 < dom.ny && dom.in_omega(k + dom.nx)) link(k, k + dom.nx, false);
        if (dom.cell_in_omega(i, j)) {
          link(k, dom.index(i + 1, j + 1), true);
          link(dom.index(i + 1, j), dom.index(i, j + 1), true);
        }
      }
  }

  const GridDomain& domain() const { return dom_; }
  const std::vector<Arc>& arcs(int k) const { return adj_[k]; }

  /// Dijkstra from a set of sources.
  std::vector<StepCount> steps_from(const std::vector<int>& sources) const {
    std::vector<StepCount> d(adj_.size(), StepCount::unreachable());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int s : sources) {
      d[s] = StepCount{};
      heap.push({0.0, s});
    }
    while (!heap.empty()) {
      auto [dk, k] = heap.top();
      heap.pop();
      if (dk > d[k].units()) continue;
      for (const Arc& a : adj_[k]) {
        const StepCount nd = d[k] + (a.diagonal ? StepCount{0, 1} : StepCount{1, 0});
        if (nd < d[a.to]) {
          d[a.to] = nd;
          heap.push({nd.units(), a.to});
        }
      }
    }
    return d;
  }

  /// Shortest-path lengths (+∞ where unreachable).
  std::vector<double> distances_from(const std::vector<int>& sources) const {
    const auto steps = steps_from(sources);
    std::vector<double> d(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) d[k] = steps[k].length(dom_.h);
    return d;
  }

  bool omega_connected() const {
    int first = -1, count = 0;
    for (int k = 0; k < dom_.nodes(); ++k)
      if (dom_.in_omega(k)) {
        if (first < 0) first = k;
        ++count;
      }
    if (first < 0) return false;
    const auto d = steps_from({first});
    int reached = 0;
    for (const auto& v : d)
      if (v.reachable) ++reached;
    return reached == count;
  }

 private:
  GridDomain dom_;
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace fenchelkit
