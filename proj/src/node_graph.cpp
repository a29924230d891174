#include "proid/node_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "proid/error.hpp"

namespace proid {

namespace {

int wrap(int bin, int bins) {
  const int m = bin % bins;
  return m < 0 ? m + bins : m;
}

}  // namespace

std::vector<Peak> detect_peaks(std::span<const double> column) {
  std::vector<Peak> peaks;
  const std::size_t n = column.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(column[i] > column[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && column[j + 1] == column[i]) ++j;
    if (j + 1 < n && column[j + 1] < column[i]) {
      const std::size_t center = i + (j - i) / 2;
      peaks.push_back({static_cast<int>(center), column[center]});
    }
    i = j + 1;
  }
  return peaks;
}

double prominence(std::span<const double> column, int peak_index) {
  const auto peaks = detect_peaks(column);
  const bool is_peak = std::any_of(peaks.begin(), peaks.end(),
                                   [&](const Peak& p) { return p.index == peak_index; });
  if (!is_peak) {
    throw Error(ErrorCode::ContractViolation,
                "index " + std::to_string(peak_index) + " is not a detected peak");
  }
  const auto p = static_cast<std::size_t>(peak_index);
  const double height = column[p];

  double left_min = height;
  for (std::size_t k = p; k-- > 0;) {
    if (column[k] > height) break;
    left_min = std::min(left_min, column[k]);
  }
  double right_min = height;
  for (std::size_t k = p + 1; k < column.size(); ++k) {
    if (column[k] > height) break;
    right_min = std::min(right_min, column[k]);
  }
  return height - std::max(left_min, right_min);
}

int Sweep::offset(int theta_bin) const { return wrap(direction * (theta_bin - origin_bin), theta_bins); }

int Sweep::bin_at(int off) const { return wrap(origin_bin + direction * off, theta_bins); }

NodeGraph::NodeGraph(std::vector<Node> nodes, int theta_bins, double theta_resolution)
    : nodes_(std::move(nodes)),
      by_bin_(static_cast<std::size_t>(theta_bins)),
      theta_bins_(theta_bins),
      theta_resolution_(theta_resolution) {
  if (theta_bins <= 0) throw Error(ErrorCode::InvalidArgument, "theta bin count must be positive");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    n.id = static_cast<int>(i);
    n.theta_bin = wrap(n.theta_bin, theta_bins);
    by_bin_[static_cast<std::size_t>(n.theta_bin)].push_back(n.id);
  }
  for (auto& bucket : by_bin_) {
    std::stable_sort(bucket.begin(), bucket.end(),
                     [&](int a, int b) { return node(a).r < node(b).r; });
  }
}

std::span<const int> NodeGraph::at_bin(int theta_bin) const {
  return by_bin_[static_cast<std::size_t>(wrap(theta_bin, theta_bins_))];
}

double mean_node_cost(std::span<const Node> nodes) {
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (const Node& n : nodes) sum += n.cost;
  return sum / static_cast<double>(nodes.size());
}

std::vector<Node> prune_by_cost(std::span<const Node> nodes, double prune_factor) {
  const double threshold = prune_factor * mean_node_cost(nodes);
  std::vector<Node> kept;
  kept.reserve(nodes.size());
  for (const Node& n : nodes) {
    if (n.cost <= threshold) kept.push_back(n);
  }
  return kept;
}

NodeGraph build_nodes(const PolarImage& polar, const UipFrame& uips,
                      const NodeGraphOptions& options) {
  const double cap = options.radial_cap_factor * uips.circumradius();
  std::vector<Node> raw;
  for (int k = 0; k < polar.theta_bins(); ++k) {
    const auto column = polar.column(k);
    for (const Peak& peak : detect_peaks(column)) {
      const double r = peak.index * polar.r_resolution();
      if (r > cap) continue;
      Node node;
      node.r = r;
      node.theta_bin = k;
      node.theta_deg = polar.theta_of_bin(k);
      node.intensity = peak.value;
      node.prominence = prominence(column, peak.index);
      raw.push_back(node);
    }
  }
  if (raw.empty()) throw Error(ErrorCode::EmptyGraph, "no intensity peaks inside the radial cap");

  double sum_p = 0.0;
  double sum_i = 0.0;
  for (const Node& n : raw) {
    sum_p += n.prominence;
    sum_i += n.intensity;
  }
  const double mean_p = sum_p / static_cast<double>(raw.size());
  const double mean_i = sum_i / static_cast<double>(raw.size());
  for (Node& n : raw) {
    n.norm_prominence = mean_p > 0.0 ? n.prominence / mean_p : 0.0;
    n.norm_intensity = mean_i > 0.0 ? n.intensity / mean_i : 0.0;
    const double denom = n.norm_prominence + n.norm_intensity;
    n.cost = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
  }
  const double mean_cost = mean_node_cost(raw);
  std::vector<Node> kept = prune_by_cost(raw, options.prune_factor);
  NodeGraph graph(std::move(kept), polar.theta_bins(), polar.theta_resolution());
  graph.peak_count = raw.size();
  graph.pre_prune_mean_cost = mean_cost;
  graph.radial_cap = cap;
  graph.r_resolution = polar.r_resolution();
  return graph;
}

std::vector<int> neighbors(const NodeGraph& graph, int node_id, double dl_deg,
                           const Sweep& sweep) {
  std::vector<int> out;
  const int from = sweep.offset(graph.node(node_id).theta_bin);
  if (from > sweep.length) return out;
  const int dl_bins =
      std::max(1, static_cast<int>(std::floor(dl_deg / graph.theta_resolution() + 1e-9)));
  const int window_end = std::min(from + dl_bins, sweep.length);
  for (int s = from + 1; s <= window_end; ++s) {
    const auto bucket = graph.at_bin(sweep.bin_at(s));
    out.insert(out.end(), bucket.begin(), bucket.end());
  }
  if (!out.empty()) return out;
  for (int s = window_end + 1; s <= sweep.length; ++s) {
    const auto bucket = graph.at_bin(sweep.bin_at(s));
    if (!bucket.empty()) return {bucket.begin(), bucket.end()};
  }
  return out;
}

NodeGraph restrict_to_window(const NodeGraph& graph, const Boundary& expected, double tolerance) {
  if (tolerance < 0.0) throw Error(ErrorCode::InvalidArgument, "window tolerance is negative");
  std::vector<Node> kept;
  std::size_t first_half = 0;
  std::size_t second_half = 0;
  const auto apex = static_cast<std::size_t>(expected.apex_index);
  for (const Node& n : graph.nodes()) {
    const auto idx = expected.index_of_bin(n.theta_bin);
    if (idx) {
      const double r_exp = expected.r[*idx];
      if (std::abs(n.r - r_exp) > tolerance * r_exp) continue;
      if (*idx <= apex) ++first_half;
      if (*idx >= apex) ++second_half;
    }
    kept.push_back(n);
  }
  if (first_half == 0 || second_half == 0) {
    throw Error(ErrorCode::WindowTooTight, "initialization window removed every node of a half");
  }
  NodeGraph out(std::move(kept), graph.theta_bins(), graph.theta_resolution());
  out.peak_count = graph.peak_count;
  out.pre_prune_mean_cost = graph.pre_prune_mean_cost;
  out.radial_cap = graph.radial_cap;
  out.r_resolution = graph.r_resolution;
  return out;
}

}  // namespace proid
