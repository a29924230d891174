#include "proid/pathfind.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "proid/error.hpp"

namespace proid {

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;

}  // namespace

void CostParams::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (!(beta >= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must be at least 1");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be non-negative");
  if (dl_set.empty()) throw Error(ErrorCode::InvalidArgument, "DL set is empty");
  if (!std::is_sorted(dl_set.begin(), dl_set.end()) || !(dl_set.front() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "DL set must be positive and ascending");
  }
  if (!(anchor_tolerance_px >= 0.0) || anchor_search_bins < 0) {
    throw Error(ErrorCode::InvalidArgument, "anchor search settings are invalid");
  }
}

double cost_dist(double r_from, double theta_from_deg, double r_to, double theta_to_deg) {
  const double d_theta = (theta_to_deg - theta_from_deg) * kRadPerDeg;
  const double sq = r_to * r_to + r_from * r_from - 2.0 * r_to * r_from * std::cos(d_theta);
  return std::sqrt(std::max(0.0, sq));
}

double cost_angle(double d_theta_bins, double d_r_bins, double angle_factor) {
  if (d_theta_bins == 0.0 && d_r_bins == 0.0) return 0.0;
  const double deg = std::atan2(d_theta_bins, d_r_bins) / kRadPerDeg;
  return angle_factor * std::abs(90.0 - deg);
}

double td_update(double td, double node_cost, double c_angle, double c_dist,
                 const CostParams& params) {
  return td + params.alpha * node_cost + params.gamma * c_angle + std::pow(c_dist, params.beta);
}

double step_cost(const NodeGraph& graph, int from, int to, const Sweep& sweep,
                 const CostParams& params, double td) {
  const Node& a = graph.node(from);
  const Node& b = graph.node(to);
  const int d_bins = sweep.offset(b.theta_bin) - sweep.offset(a.theta_bin);
  const double d_theta_deg = d_bins * graph.theta_resolution();
  const double c_dist = cost_dist(a.r, 0.0, b.r, d_theta_deg);
  const double c_angle =
      cost_angle(static_cast<double>(d_bins), (b.r - a.r) / graph.r_resolution, params.angle_factor);
  return td_update(td, b.cost, c_angle, c_dist, params);
}

double path_cost(const NodeGraph& graph, std::span<const int> nodes, const Sweep& sweep,
                 const CostParams& params) {
  double td = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    td = step_cost(graph, nodes[i - 1], nodes[i], sweep, params, td);
  }
  return td;
}

namespace {

double mean_norm_prominence(const NodeGraph& graph, std::span<const int> nodes) {
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (int id : nodes) sum += graph.node(id).norm_prominence;
  return sum / static_cast<double>(nodes.size());
}

}  // namespace

PathResult shortest_path(const NodeGraph& graph, std::span<const int> sources,
                         std::span<const int> sinks, double dl_deg, const Sweep& sweep,
                         const CostParams& params) {
  const std::size_t n = graph.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> td(n, kInf);
  std::vector<int> prev(n, -1);
  std::vector<char> settled(n, 0);
  std::vector<char> is_sink(n, 0);
  for (int id : sinks) is_sink[static_cast<std::size_t>(id)] = 1;

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int id : sources) {
    td[static_cast<std::size_t>(id)] = 0.0;
    queue.emplace(0.0, id);
  }

  while (!queue.empty()) {
    const auto [dist, u] = queue.top();
    queue.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (settled[ui]) continue;
    settled[ui] = 1;
    if (is_sink[ui]) {
      PathResult result;
      for (int v = u; v != -1; v = prev[static_cast<std::size_t>(v)]) result.nodes.push_back(v);
      std::reverse(result.nodes.begin(), result.nodes.end());
      result.total_cost = dist;
      result.mean_prominence = mean_norm_prominence(graph, result.nodes);
      result.dl = dl_deg;
      return result;
    }
    for (int v : neighbors(graph, u, dl_deg, sweep)) {
      const auto vi = static_cast<std::size_t>(v);
      if (settled[vi]) continue;
      const double candidate = step_cost(graph, u, v, sweep, params, dist);
      if (candidate < td[vi]) {
        td[vi] = candidate;
        prev[vi] = u;
        queue.emplace(candidate, v);
      }
    }
  }
  throw Error(ErrorCode::NoPath, "end node is unreachable");
}

PathResult shortest_path(const NodeGraph& graph, int start, int end, double dl_deg,
                         const Sweep& sweep, const CostParams& params) {
  const int sources[] = {start};
  const int sinks[] = {end};
  return shortest_path(graph, sources, sinks, dl_deg, sweep, params);
}

std::vector<int> anchor_candidates(const NodeGraph& graph, const Sweep& sweep, int offset,
                                   double r_px, int inward, const CostParams& params) {
  for (int k = 0; k <= params.anchor_search_bins; ++k) {
    const int s = offset + inward * k;
    if (s < 0 || s > sweep.length) break;
    std::vector<int> found;
    for (int id : graph.at_bin(sweep.bin_at(s))) {
      if (std::abs(graph.node(id).r - r_px) <= params.anchor_tolerance_px) found.push_back(id);
    }
    if (!found.empty()) return found;
  }
  return {};
}

PathResult segment_half(const NodeGraph& graph, std::span<const int> apex_nodes,
                        std::span<const int> mv_nodes, double dl_deg, const Sweep& sweep,
                        const CostParams& params) {
  if (apex_nodes.empty() || mv_nodes.empty()) {
    throw Error(ErrorCode::AnchorNode, "no node near the apex or annulus anchor");
  }
  return shortest_path(graph, apex_nodes, mv_nodes, dl_deg, sweep, params);
}

PathResult segment_half(const NodeGraph& graph, const HalfSpec& half, double dl_deg,
                        const CostParams& params) {
  const auto sources = anchor_candidates(graph, half.sweep, 0, half.apex_r, +1, params);
  const auto sinks =
      anchor_candidates(graph, half.sweep, half.sweep.length, half.mv_r, -1, params);
  return segment_half(graph, sources, sinks, dl_deg, half.sweep, params);
}

std::vector<PathResult> dl_sweep(const NodeGraph& graph, const HalfSpec& half,
                                 const CostParams& params) {
  const auto sources = anchor_candidates(graph, half.sweep, 0, half.apex_r, +1, params);
  const auto sinks =
      anchor_candidates(graph, half.sweep, half.sweep.length, half.mv_r, -1, params);
  std::vector<PathResult> results;
  for (double dl : params.dl_set) {
    try {
      results.push_back(segment_half(graph, sources, sinks, dl, half.sweep, params));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoPath) throw;
    }
  }
  if (results.empty()) throw Error(ErrorCode::HalfFailure, "no DL produced a path for this half");
  return results;
}

}  // namespace proid
