#pragma once

// Brute-force reference implementations used to cross-check the library.
// They are deliberately slow and written from the definitions, not from the
// library code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "proid/node_graph.hpp"
#include "proid/pathfind.hpp"

namespace oracle {

/// Every strict interior local maximum, plateaus reported at their center.
inline std::vector<int> peaks(std::span<const double> v) {
  std::vector<int> out;
  const int n = static_cast<int>(v.size());
  for (int i = 1; i + 1 < n; ++i) {
    int j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    const bool left_lower = v[i - 1] < v[i];
    const bool right_lower = j + 1 < n && v[j + 1] < v[i];
    if (left_lower && right_lower) out.push_back(i + (j - i) / 2);
    if (j > i && left_lower) i = j;
  }
  return out;
}

/// Prominence from the window definition: enumerate every window [i, j]
/// around the peak that holds no sample higher than the peak, take the
/// minimum on each side over all such windows, and subtract the larger.
inline double prominence(std::span<const double> v, int p) {
  const int n = static_cast<int>(v.size());
  const double h = v[p];
  double left = h;
  double right = h;
  for (int i = 0; i <= p; ++i) {
    for (int j = p; j < n; ++j) {
      bool bounded = true;
      for (int k = i; k <= j; ++k) bounded = bounded && v[k] <= h;
      if (!bounded) continue;
      for (int k = i; k < p; ++k) left = std::min(left, v[k]);
      for (int k = p + 1; k <= j; ++k) right = std::min(right, v[k]);
    }
  }
  return h - std::max(left, right);
}

inline std::vector<double> random_profile(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(3, 64);
  std::uniform_int_distribution<int> val(0, 20);
  std::vector<double> v(static_cast<std::size_t>(len(rng)));
  for (double& x : v) x = val(rng);
  return v;
}

/// Step cost written from the formulas: chord by the law of cosines, angle
/// cost from the bin displacements, then the weighted tentative-distance sum.
inline double step(const proid::NodeGraph& g, int from, int to, const proid::Sweep& sweep,
                   const proid::CostParams& c, double td) {
  const auto& a = g.node(from);
  const auto& b = g.node(to);
  const int d_bins = sweep.offset(b.theta_bin) - sweep.offset(a.theta_bin);
  const double d_theta = d_bins * g.theta_resolution() * (std::numbers::pi / 180.0);
  const double chord = std::sqrt(std::max(
      0.0, b.r * b.r + a.r * a.r - 2.0 * b.r * a.r * std::cos(d_theta)));
  const double d_r = (b.r - a.r) / g.r_resolution;
  double angle = 0.0;
  if (d_bins != 0 || d_r != 0.0) {
    angle = c.angle_factor *
            std::abs(90.0 - std::atan2(static_cast<double>(d_bins), d_r) * (180.0 / std::numbers::pi));
  }
  return td + c.alpha * b.cost + c.gamma * angle + std::pow(chord, c.beta);
}

/// Neighbor set by scanning every node: strictly ahead within dl, else all
/// nodes at the nearest occupied offset beyond the window.
inline std::vector<int> forward(const proid::NodeGraph& g, int u, double dl_deg,
                                const proid::Sweep& sweep) {
  const int from = sweep.offset(g.node(u).theta_bin);
  const int dl_bins = std::max(1, static_cast<int>(std::floor(dl_deg / g.theta_resolution() + 1e-9)));
  const int end = std::min(from + dl_bins, sweep.length);
  std::vector<int> in_window;
  int nearest = std::numeric_limits<int>::max();
  for (const auto& n : g.nodes()) {
    const int o = sweep.offset(n.theta_bin);
    if (o > sweep.length || o <= from) continue;
    if (o <= end) in_window.push_back(n.id);
    else nearest = std::min(nearest, o);
  }
  if (!in_window.empty() || nearest == std::numeric_limits<int>::max()) return in_window;
  std::vector<int> out;
  for (const auto& n : g.nodes()) {
    if (sweep.offset(n.theta_bin) == nearest) out.push_back(n.id);
  }
  return out;
}

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> nodes;
};

/// Exhaustive enumeration of every monotone path from start to end.
inline Best enumerate_paths(const proid::NodeGraph& g, int start, int end, double dl_deg,
                            const proid::Sweep& sweep, const proid::CostParams& c) {
  Best best;
  std::vector<int> path{start};
  auto dfs = [&](auto&& self, int u, double td) -> void {
    if (u == end) {
      if (td < best.cost) best = {td, path};
      return;
    }
    for (int v : forward(g, u, dl_deg, sweep)) {
      path.push_back(v);
      self(self, v, step(g, u, v, sweep, c, td));
      path.pop_back();
    }
  };
  dfs(dfs, start, 0.0);
  return best;
}

/// Random graph with at most 12 nodes on a sweep of `length` bins. Node 0
/// sits at offset 0 and node 1 at the sweep end.
struct RandomGraph {
  proid::NodeGraph graph;
  proid::Sweep sweep;
  double dl = 2.0;
};

inline RandomGraph random_graph(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 12);
  std::uniform_int_distribution<int> length(4, 24);
  std::uniform_real_distribution<double> radius(20.0, 80.0);
  std::uniform_real_distribution<double> cost(0.2, 2.0);
  std::uniform_int_distribution<int> origin(0, 359);
  std::uniform_int_distribution<int> pick_dl(0, 6);
  RandomGraph rg;
  rg.sweep.origin_bin = origin(rng);
  rg.sweep.direction = (rng() & 1) ? 1 : -1;
  rg.sweep.length = length(rng);
  rg.sweep.theta_bins = 360;
  rg.dl = 2.0 * (pick_dl(rng) + 1);
  const int n = count(rng);
  std::uniform_int_distribution<int> off(1, rg.sweep.length - 1);
  std::vector<proid::Node> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int o = i == 0 ? 0 : i == 1 ? rg.sweep.length : off(rng);
    auto& node = nodes[static_cast<std::size_t>(i)];
    node.theta_bin = rg.sweep.bin_at(o);
    node.theta_deg = node.theta_bin;
    node.r = std::round(radius(rng) * 4.0) / 4.0;
    node.cost = cost(rng);
  }
  rg.graph = proid::NodeGraph(std::move(nodes), 360, 1.0);
  return rg;
}

}  // namespace oracle
