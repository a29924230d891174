#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proid/boundary.hpp"
#include "proid/fuse_smooth.hpp"
#include "proid/node_graph.hpp"
#include "proid/pathfind.hpp"
#include "proid/preprocess.hpp"
#include "proid/volume_correct.hpp"

namespace proid {

struct TrackingOptions {
  int window = 256;          ///< template side, px
  int search_radius = 12;    ///< max per-frame displacement, px
  double min_correlation = 0.2;
  int sample_stride = 2;     ///< pixel stride inside the correlation sums
};

struct PipelineParams {
  int median_kernel = 11;
  PolarOptions polar;
  NodeGraphOptions nodes;
  CostParams cost;
  FusionOptions fusion;
  SmoothOptions smoothing;
  BandOptions band;
  ScheduleAnchors anchors;
  Power6Options power6;
  TrackingOptions tracking;
  double window_tolerance = 0.25;
  double rerun_threshold = 0.10;
  int start_candidates = 5;
  int temporal_window = 5;
  int beat_smoothing = 5;
  /// Samples per contour half on the normalized grid used for temporal smoothing.
  int canonical_half_samples = 90;
  bool volume_correction = true;

  void validate() const;
};

/// Everything derived from one raw frame before path search.
struct PreparedFrame {
  UipFrame uips;
  Image filtered;  ///< contrast-enhanced and median filtered
  PolarImage polar;
  NodeGraph graph;
};

PreparedFrame prepare_frame(const Image& raw, const UipFrame& uips, const PipelineParams& params);

/// Contour halves and bin span implied by the UIPs on a polar grid.
struct ContourLayout {
  int start_bin = 0;   ///< mv_left bin
  int direction = 1;
  int apex_index = 0;
  int length = 0;      ///< index of the mv_right sample
  HalfSpec left;       ///< apex -> mv_left
  HalfSpec right;      ///< apex -> mv_right
};

ContourLayout contour_layout(const PolarImage& polar, const UipFrame& uips);

struct FrameSegmentation {
  Boundary fused;     ///< after MQ-RBF fusion
  Boundary smoothed;  ///< after gradient smoothing
  std::vector<PathResult> left_paths;
  std::vector<PathResult> right_paths;
  bool fusion_fallback = false;
};

/// One frame through path search, fusion and gradient smoothing, using
/// `graph` (possibly window-restricted).
FrameSegmentation segment_frame(const PreparedFrame& frame, const NodeGraph& graph,
                                const PipelineParams& params, int frame_index = 0);

/// Tracks each UIP by normalized cross-correlation, frame to frame.
struct TrackingReport {
  UipSet uips;
  std::vector<int> lost_points;  ///< frame * 3 + point index, below min correlation
};
TrackingReport track_uips(const ScanSequence& sequence, const UipFrame& initial,
                          const TrackingOptions& options = {});

/// Previous contour re-expressed about the current center and shifted by the
/// mean UIP radial displacement.
Boundary expected_boundary(const Boundary& previous, const UipFrame& uips_prev,
                           const UipFrame& uips_curr);

std::vector<Beat> detect_beats(std::span<const double> volumes, int smoothing = 5);

Image temporal_median_image(const ScanSequence& sequence);

struct StartSelection {
  int frame = 0;
  std::vector<int> candidates;
  std::vector<double> deviation;  ///< mean |r - r_median| per candidate, px (NaN = failed)
};

StartSelection select_start_frame(const ScanSequence& sequence, const UipSet& uips,
                                  const PipelineParams& params);
/// Variant for callers that already prepared the frames.
StartSelection select_start_frame(std::span<const PreparedFrame> frames,
                                  const PreparedFrame& median_frame,
                                  const PipelineParams& params);

/// Outcome of segmenting a frame initialized from its predecessor.
struct InitializedRun {
  FrameSegmentation segmentation;
  bool rerun = false;        ///< fell back to the uninitialized network
  double relative_change = 0.0;
};

InitializedRun segment_initialized(const PreparedFrame& frame, const Boundary& previous,
                                   const UipFrame& uips_prev, const PipelineParams& params,
                                   int frame_index);

struct FrameRecord {
  bool rerun = false;
  bool missing = false;
  bool fusion_fallback = false;
};

struct SegmentationResult {
  std::vector<Boundary> boundaries;     ///< final, volume corrected
  std::vector<Boundary> uncorrected;    ///< after temporal smoothing, before correction
  std::vector<BoundaryBand> bands;
  std::vector<double> volume_curve;     ///< mL
  std::vector<double> raw_volume_curve; ///< mL, before correction
  std::optional<MRBPSchedule> schedule;
  std::vector<double> targets;          ///< MRBP target applied per frame (empty when uncorrected)
  std::vector<Beat> beats;
  std::vector<double> edv;
  std::vector<double> esv;
  std::vector<double> ef;
  UipSet uips;
  std::vector<int> lost_points;
  int start_frame = 0;
  std::vector<FrameRecord> frames;
  PipelineParams params;
};

SegmentationResult segment_sequence(const ScanSequence& sequence, const UipFrame& initial,
                                    const PipelineParams& params = {});

}  // namespace proid
