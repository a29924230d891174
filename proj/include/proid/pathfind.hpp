#pragma once

#include <span>
#include <vector>

#include "proid/node_graph.hpp"

namespace proid {

struct CostParams {
  double alpha = 15.0;        ///< node-cost weight
  double beta = 1.75;         ///< path-distance exponent
  double gamma = 0.2;         ///< angle-cost weight
  double angle_factor = 0.1;  ///< scale applied inside the angle cost
  std::vector<double> dl_set{2, 4, 6, 8, 10, 12, 14};  ///< degrees
  double anchor_tolerance_px = 10.0;
  int anchor_search_bins = 3;

  void validate() const;
};

/// Law-of-cosines chord between two polar points (px, degrees).
double cost_dist(double r_from, double theta_from_deg, double r_to, double theta_to_deg);

/// angle_factor * |90 - atan2(d_theta, d_r)| with displacements in grid bins.
double cost_angle(double d_theta_bins, double d_r_bins, double angle_factor = 0.1);

/// td + alpha * nc + gamma * c_angle + c_dist^beta
double td_update(double td, double node_cost, double c_angle, double c_dist,
                 const CostParams& params);

/// Tentative distance after stepping from `from` to `to` along `sweep`.
double step_cost(const NodeGraph& graph, int from, int to, const Sweep& sweep,
                 const CostParams& params, double td = 0.0);

struct PathResult {
  std::vector<int> nodes;  ///< node ids, source to sink
  double total_cost = 0.0;
  double mean_prominence = 0.0;  ///< mean normalized prominence over the path
  double dl = 0.0;
};

/// Re-accumulates the tentative distance along `nodes` from zero at the first.
double path_cost(const NodeGraph& graph, std::span<const int> nodes, const Sweep& sweep,
                 const CostParams& params);

/// Dijkstra from every source (tentative distance zero) to the cheapest sink.
/// Extraction ties resolve by lower node id. Throws Error(NoPath).
PathResult shortest_path(const NodeGraph& graph, std::span<const int> sources,
                         std::span<const int> sinks, double dl_deg, const Sweep& sweep,
                         const CostParams& params);

PathResult shortest_path(const NodeGraph& graph, int start, int end, double dl_deg,
                         const Sweep& sweep, const CostParams& params);

/// One contour half: sweep from the apex angle to an annulus angle.
struct HalfSpec {
  Sweep sweep;
  double apex_r = 0.0;  ///< UIP radius at the sweep origin, px
  double mv_r = 0.0;    ///< UIP radius at the sweep end, px
};

/// Nodes within the anchor radial tolerance at the occupied bin nearest to
/// `offset`, searching up to anchor_search_bins inward (towards the other end).
std::vector<int> anchor_candidates(const NodeGraph& graph, const Sweep& sweep, int offset,
                                   double r_px, int inward, const CostParams& params);

/// Runs the half between virtual anchors. Throws Error(AnchorNode) when either
/// anchor set is empty.
PathResult segment_half(const NodeGraph& graph, const HalfSpec& half, double dl_deg,
                        const CostParams& params);
PathResult segment_half(const NodeGraph& graph, std::span<const int> apex_nodes,
                        std::span<const int> mv_nodes, double dl_deg, const Sweep& sweep,
                        const CostParams& params);

/// One result per DL that produced a path. Throws Error(HalfFailure) when none did.
std::vector<PathResult> dl_sweep(const NodeGraph& graph, const HalfSpec& half,
                                 const CostParams& params);

}  // namespace proid
