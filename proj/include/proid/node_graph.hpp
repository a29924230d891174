#pragma once

#include <span>
#include <vector>

#include "proid/boundary.hpp"
#include "proid/preprocess.hpp"

namespace proid {

struct Peak {
  int index = 0;
  double value = 0.0;
};

/// Strict interior local maxima; a flat-topped maximum reports its center sample.
std::vector<Peak> detect_peaks(std::span<const double> column);

/// Peak height minus the higher of the two flanking minima, where each flank
/// extends until a strictly higher sample or the profile end.
double prominence(std::span<const double> column, int peak_index);

struct Node {
  int id = 0;
  double r = 0.0;       ///< px
  int theta_bin = 0;
  double theta_deg = 0.0;
  double intensity = 0.0;
  double prominence = 0.0;
  double norm_prominence = 0.0;  ///< prominence / mean prominence
  double norm_intensity = 0.0;   ///< intensity / mean intensity
  double cost = 0.0;             ///< 1 / (norm_prominence + norm_intensity)
};

/// Monotone theta sweep: bin offsets 0..length measured from origin_bin in
/// `direction`.
struct Sweep {
  int origin_bin = 0;
  int direction = 1;
  int length = 0;
  int theta_bins = 360;

  int offset(int theta_bin) const;
  bool contains(int theta_bin) const { return offset(theta_bin) <= length; }
  int bin_at(int offset) const;
};

struct NodeGraphOptions {
  double radial_cap_factor = 1.5;
  double prune_factor = 1.25;
};

/// Sparse peak-derived node network for one polar frame. Immutable after
/// construction.
class NodeGraph {
 public:
  NodeGraph() = default;
  /// Assigns ids by position and groups nodes per theta bin (sorted by r).
  NodeGraph(std::vector<Node> nodes, int theta_bins, double theta_resolution);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  int theta_bins() const noexcept { return theta_bins_; }
  double theta_resolution() const noexcept { return theta_resolution_; }
  std::span<const int> at_bin(int theta_bin) const;

  /// Bookkeeping from build_nodes.
  std::size_t peak_count = 0;        ///< peaks inside the radial cap, before pruning
  double pre_prune_mean_cost = 0.0;
  double radial_cap = 0.0;           ///< px
  double r_resolution = 1.0;         ///< px per radial bin of the source grid

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<int>> by_bin_;
  int theta_bins_ = 0;
  double theta_resolution_ = 1.0;
};

double mean_node_cost(std::span<const Node> nodes);
/// Nodes whose cost does not exceed prune_factor times the mean cost.
std::vector<Node> prune_by_cost(std::span<const Node> nodes, double prune_factor);

NodeGraph build_nodes(const PolarImage& polar, const UipFrame& uips,
                      const NodeGraphOptions& options = {});

/// Nodes strictly ahead of `node_id` by at most `dl_deg`, or, when that
/// window is empty, every node at the nearest occupied bin ahead.
std::vector<int> neighbors(const NodeGraph& graph, int node_id, double dl_deg,
                           const Sweep& sweep);

/// Keeps nodes within `tolerance * r_expected` of the expected contour.
/// Nodes at bins outside the expected span are kept. Throws
/// Error(WindowTooTight) when either contour half loses all its nodes.
NodeGraph restrict_to_window(const NodeGraph& graph, const Boundary& expected,
                             double tolerance);

}  // namespace proid
