#include "proid/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "proid/error.hpp"
#include "proid/metrics.hpp"

namespace proid {

namespace {

int wrap(int bin, int bins) {
  const int m = bin % bins;
  return m < 0 ? m + bins : m;
}

double median_in_place(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool recoverable(ErrorCode code) {
  switch (code) {
    case ErrorCode::WindowTooTight:
    case ErrorCode::NoPath:
    case ErrorCode::AnchorNode:
    case ErrorCode::HalfFailure:
    case ErrorCode::EmptyGraph:
    case ErrorCode::Geometry:
      return true;
    default:
      return false;
  }
}

// Grid (origin, bins, span) of the contour implied by a prepared frame.
Boundary layout_grid(const PreparedFrame& frame, int frame_index) {
  const auto layout = contour_layout(frame.polar, frame.uips);
  Boundary b;
  b.origin = frame.polar.origin();
  b.theta_bins = frame.polar.theta_bins();
  b.theta_resolution = frame.polar.theta_resolution();
  b.start_bin = layout.start_bin;
  b.direction = layout.direction;
  b.apex_index = layout.apex_index;
  b.r.assign(static_cast<std::size_t>(layout.length + 1), 0.0);
  b.frame_index = frame_index;
  return b;
}

UipFrame median_uips(std::span<const UipFrame> frames) {
  auto med = [&](auto get) {
    std::vector<double> v;
    v.reserve(frames.size());
    for (const auto& f : frames) v.push_back(get(f));
    return median_in_place(v);
  };
  UipFrame out;
  out.apex = {med([](const UipFrame& f) { return f.apex.x; }),
              med([](const UipFrame& f) { return f.apex.y; })};
  out.mv_left = {med([](const UipFrame& f) { return f.mv_left.x; }),
                 med([](const UipFrame& f) { return f.mv_left.y; })};
  out.mv_right = {med([](const UipFrame& f) { return f.mv_right.x; }),
                  med([](const UipFrame& f) { return f.mv_right.y; })};
  return out;
}

struct StartOutcome {
  StartSelection selection;
  std::vector<std::optional<FrameSegmentation>> segmentations;
};

StartOutcome run_start_selection(std::span<const PreparedFrame> frames,
                                 const PreparedFrame* median_frame,
                                 const PipelineParams& params) {
  if (frames.empty()) throw Error(ErrorCode::StartSelection, "no candidate frames");
  StartOutcome out;
  std::vector<Boundary> computed;
  std::vector<std::optional<std::size_t>> slot(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    out.selection.candidates.push_back(static_cast<int>(k));
    try {
      auto seg = segment_frame(frames[k], frames[k].graph, params, static_cast<int>(k));
      slot[k] = computed.size();
      computed.push_back(seg.smoothed);
      out.segmentations.emplace_back(std::move(seg));
    } catch (const Error& e) {
      if (!recoverable(e.code())) throw;
      out.segmentations.emplace_back(std::nullopt);
    }
  }
  if (computed.empty()) {
    throw Error(ErrorCode::StartSelection, "every candidate start frame failed to segment");
  }
  Point common = frames.front().polar.origin();
  if (median_frame != nullptr) {
    common = median_frame->polar.origin();
    try {
      computed.push_back(segment_frame(*median_frame, median_frame->graph, params, -1).smoothed);
    } catch (const Error& e) {
      if (!recoverable(e.code())) throw;
    }
  }
  for (auto& b : computed) b = recenter(b, common);

  // Pointwise median over the bins every computed boundary covers.
  const Boundary& ref = computed.front();
  std::vector<int> bins;
  std::vector<double> median_r;
  std::vector<double> values;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const int bin = ref.theta_bin(i);
    values.clear();
    for (const auto& b : computed) {
      const auto r = b.radius_at_bin(bin);
      if (!r) break;
      values.push_back(*r);
    }
    if (values.size() != computed.size()) continue;
    bins.push_back(bin);
    median_r.push_back(median_in_place(values));
  }

  double best = std::numeric_limits<double>::infinity();
  out.selection.frame = -1;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (!slot[k]) {
      out.selection.deviation.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const Boundary& b = computed[*slot[k]];
    double sum = 0.0;
    for (std::size_t j = 0; j < bins.size(); ++j) sum += std::abs(*b.radius_at_bin(bins[j]) - median_r[j]);
    const double dev = bins.empty() ? 0.0 : sum / static_cast<double>(bins.size());
    out.selection.deviation.push_back(dev);
    if (dev < best) {
      best = dev;
      out.selection.frame = static_cast<int>(k);
    }
  }
  return out;
}

// Componentwise temporal median of canonical contours, mapped back to each
// frame's own grid.
std::vector<Boundary> temporal_smooth_canonical(std::span<const Boundary> boundaries, int window,
                                                int half_samples) {
  std::vector<Boundary> out(boundaries.begin(), boundaries.end());
  const int frames = static_cast<int>(boundaries.size());
  if (frames < 2 || window <= 1) return out;
  std::vector<std::vector<Point>> canon;
  canon.reserve(boundaries.size());
  for (const auto& b : boundaries) canon.push_back(canonical_points(b, half_samples));
  const std::size_t m = canon.front().size();
  const int half = window / 2;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<Point> med(m);
  for (int t = 0; t < frames; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(frames - 1, t + half);
    for (std::size_t i = 0; i < m; ++i) {
      xs.clear();
      ys.clear();
      for (int s = lo; s <= hi; ++s) {
        xs.push_back(canon[static_cast<std::size_t>(s)][i].x);
        ys.push_back(canon[static_cast<std::size_t>(s)][i].y);
      }
      med[i] = {median_in_place(xs), median_in_place(ys)};
    }
    out[static_cast<std::size_t>(t)] = resample_onto(boundaries[static_cast<std::size_t>(t)], med);
  }
  return out;
}

BoundaryBand smoothed_band(const Boundary& boundary, const PolarImage& polar,
                           const BandOptions& options) {
  BoundaryBand band = find_band(boundary, polar, options);
  band.inner = wavelet_filter(band.inner);
  band.outer = wavelet_filter(band.outer);
  for (std::size_t i = 0; i < band.inner.size(); ++i) {
    band.inner[i] = std::max(band.inner[i], 0.0);
    if (band.outer[i] < band.inner[i] + 0.5) {
      const double mid = 0.5 * (band.inner[i] + band.outer[i]);
      band.inner[i] = std::max(0.0, mid - 0.25);
      band.outer[i] = band.inner[i] + 0.5;
    }
  }
  band.band_area = band_area(boundary, band.inner, band.outer);
  return band;
}

}  // namespace

void PipelineParams::validate() const {
  if (median_kernel < 1 || median_kernel % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "median kernel must be a positive odd size");
  }
  cost.validate();
  if (!(window_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "window tolerance must be positive");
  if (!(rerun_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "rerun threshold must be positive");
  if (start_candidates < 1) throw Error(ErrorCode::InvalidArgument, "need at least one start candidate");
  if (temporal_window < 1 || beat_smoothing < 1) {
    throw Error(ErrorCode::InvalidArgument, "temporal windows must be positive");
  }
  if (canonical_half_samples < 2) throw Error(ErrorCode::InvalidArgument, "canonical grid too coarse");
  if (tracking.window < 3 || tracking.search_radius < 0 || tracking.sample_stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "invalid tracking settings");
  }
  if (anchors.ed < 0.0 || anchors.ed > 1.0 || anchors.es < 0.0 || anchors.es > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "MRBP anchors must lie in [0, 1]");
  }
  if (power6.base_weight < 0.0) throw Error(ErrorCode::InvalidArgument, "power-six base weight is negative");
}

PreparedFrame prepare_frame(const Image& raw, const UipFrame& uips, const PipelineParams& params) {
  validate_uips(uips);
  PreparedFrame f;
  f.uips = uips;
  f.filtered = apply_ace(median_filter(raw, params.median_kernel), ace_levels(raw, uips));
  f.polar = unwrap_polar(f.filtered, uips.center(), params.polar);
  f.graph = build_nodes(f.polar, uips, params.nodes);
  return f;
}

ContourLayout contour_layout(const PolarImage& polar, const UipFrame& uips) {
  const Point c = polar.origin();
  auto bin_of = [&](Point p) { return polar.nearest_bin(polar_angle(p.y - c.y, p.x - c.x)); };
  const int bins = polar.theta_bins();
  const int left = bin_of(uips.mv_left);
  const int right = bin_of(uips.mv_right);
  const int apex = bin_of(uips.apex);
  int direction = 1;
  if (!(wrap(apex - left, bins) < wrap(right - left, bins))) direction = -1;

  ContourLayout layout;
  layout.start_bin = left;
  layout.direction = direction;
  layout.apex_index = wrap(direction * (apex - left), bins);
  layout.length = wrap(direction * (right - left), bins);
  if (layout.apex_index <= 0 || layout.apex_index >= layout.length) {
    throw Error(ErrorCode::InvalidUip, "apex angle does not separate the annulus points");
  }
  layout.left.sweep = Sweep{apex, -direction, layout.apex_index, bins};
  layout.left.apex_r = distance(uips.apex, c);
  layout.left.mv_r = distance(uips.mv_left, c);
  layout.right.sweep = Sweep{apex, direction, layout.length - layout.apex_index, bins};
  layout.right.apex_r = layout.left.apex_r;
  layout.right.mv_r = distance(uips.mv_right, c);
  return layout;
}

FrameSegmentation segment_frame(const PreparedFrame& frame, const NodeGraph& graph,
                                const PipelineParams& params, int frame_index) {
  const auto layout = contour_layout(frame.polar, frame.uips);
  FrameSegmentation seg;
  seg.left_paths = dl_sweep(graph, layout.left, params.cost);
  seg.right_paths = dl_sweep(graph, layout.right, params.cost);

  std::vector<FusionSample> samples;
  auto add_path = [&](const PathResult& path, const HalfSpec& half, int sign) {
    const double weight = std::max(path.mean_prominence, 1e-6);
    auto emit = [&](int s, double r) {
      samples.push_back({static_cast<double>(layout.apex_index + sign * s), r, weight});
    };
    const auto& nodes = path.nodes;
    const int first = half.sweep.offset(graph.node(nodes.front()).theta_bin);
    for (int s = 0; s < first; ++s) emit(s, graph.node(nodes.front()).r);
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const Node& a = graph.node(nodes[k]);
      const Node& b = graph.node(nodes[k + 1]);
      const int sa = half.sweep.offset(a.theta_bin);
      const int sb = half.sweep.offset(b.theta_bin);
      for (int s = sa; s < sb; ++s) {
        const double t = static_cast<double>(s - sa) / (sb - sa);
        emit(s, a.r + t * (b.r - a.r));
      }
    }
    const Node& tail = graph.node(nodes.back());
    for (int s = half.sweep.offset(tail.theta_bin); s <= half.sweep.length; ++s) emit(s, tail.r);
  };
  for (const auto& p : seg.left_paths) add_path(p, layout.left, -1);
  for (const auto& p : seg.right_paths) add_path(p, layout.right, +1);

  const auto fused = mqrbf_fuse(samples, static_cast<std::size_t>(layout.length + 1), params.fusion);
  seg.fusion_fallback = fused.used_fallback;
  Boundary b;
  b.origin = frame.polar.origin();
  b.theta_bins = frame.polar.theta_bins();
  b.theta_resolution = frame.polar.theta_resolution();
  b.start_bin = layout.start_bin;
  b.direction = layout.direction;
  b.apex_index = layout.apex_index;
  b.frame_index = frame_index;
  b.r = fused.r;
  for (double& r : b.r) r = std::clamp(r, 1.0, std::max(1.0, frame.polar.max_radius()));
  seg.fused = b;
  seg.smoothed = gradient_smooth(b, frame.polar, params.smoothing);
  return seg;
}

TrackingReport track_uips(const ScanSequence& sequence, const UipFrame& initial,
                          const TrackingOptions& options) {
  sequence.validate();
  validate_uips(initial);
  const int w = sequence.width();
  const int h = sequence.height();
  for (Point p : {initial.apex, initial.mv_left, initial.mv_right}) {
    if (!(p.x >= 1.0 && p.y >= 1.0 && p.x <= w - 2 && p.y <= h - 2)) {
      throw Error(ErrorCode::InvalidUip, "UIP lies within 1 px of the frame border");
    }
  }
  TrackingReport report;
  report.uips.frames.push_back(initial);
  const int half = options.window / 2;
  const int radius = options.search_radius;
  const int stride = options.sample_stride;

  for (std::size_t t = 1; t < sequence.size(); ++t) {
    const Image& prev = sequence.frames[t - 1];
    const Image& curr = sequence.frames[t];
    const UipFrame& last = report.uips.frames.back();
    Point pts[3] = {last.apex, last.mv_left, last.mv_right};
    for (int k = 0; k < 3; ++k) {
      const int cx = static_cast<int>(std::lround(pts[k].x));
      const int cy = static_cast<int>(std::lround(pts[k].y));
      const int x0 = std::max(0, cx - half);
      const int x1 = std::min(w - 1, cx + options.window - half - 1);
      const int y0 = std::max(0, cy - half);
      const int y1 = std::min(h - 1, cy + options.window - half - 1);
      double best = -2.0;
      int best_dx = 0;
      int best_dy = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int tx0 = std::max(x0, -dx);
          const int tx1 = std::min(x1, w - 1 - dx);
          const int ty0 = std::max(y0, -dy);
          const int ty1 = std::min(y1, h - 1 - dy);
          if (tx1 < tx0 || ty1 < ty0) continue;
          double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
          double count = 0;
          for (int y = ty0; y <= ty1; y += stride) {
            for (int x = tx0; x <= tx1; x += stride) {
              const double a = prev.at(x, y);
              const double b = curr.at(x + dx, y + dy);
              sa += a;
              sb += b;
              saa += a * a;
              sbb += b * b;
              sab += a * b;
              count += 1;
            }
          }
          const double va = saa - sa * sa / count;
          const double vb = sbb - sb * sb / count;
          const double ncc = va > 0.0 && vb > 0.0 ? (sab - sa * sb / count) / std::sqrt(va * vb) : 0.0;
          const bool closer = dx * dx + dy * dy < best_dx * best_dx + best_dy * best_dy;
          if (ncc > best + 1e-12 || (std::abs(ncc - best) <= 1e-12 && closer)) {
            best = ncc;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      if (best < options.min_correlation) {
        report.lost_points.push_back(static_cast<int>(t) * 3 + k);
        continue;
      }
      pts[k].x = std::clamp(pts[k].x + best_dx, 0.0, static_cast<double>(w - 1));
      pts[k].y = std::clamp(pts[k].y + best_dy, 0.0, static_cast<double>(h - 1));
    }
    UipFrame next{pts[0], pts[1], pts[2]};
    try {
      validate_uips(next);
    } catch (const Error&) {
      next = last;
    }
    report.uips.frames.push_back(next);
  }
  return report;
}

Boundary expected_boundary(const Boundary& previous, const UipFrame& uips_prev,
                           const UipFrame& uips_curr) {
  const Point c = uips_curr.center();
  Boundary out = recenter(previous, c);
  const double shift = (distance(uips_curr.apex, c) - distance(uips_prev.apex, c) +
                        distance(uips_curr.mv_left, c) - distance(uips_prev.mv_left, c) +
                        distance(uips_curr.mv_right, c) - distance(uips_prev.mv_right, c)) /
                       3.0;
  if (shift != 0.0) {
    for (double& r : out.r) r += shift;
  }
  return out;
}

std::vector<Beat> detect_beats(std::span<const double> volumes, int smoothing) {
  const int n = static_cast<int>(volumes.size());
  if (n < 3) throw Error(ErrorCode::InsufficientData, "beat detection needs at least 3 frames");
  if (smoothing < 1) throw Error(ErrorCode::InvalidArgument, "smoothing window must be positive");
  const int half = smoothing / 2;
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(n - 1, t + half);
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) sum += volumes[static_cast<std::size_t>(k)];
    s[static_cast<std::size_t>(t)] = sum / (hi - lo + 1);
  }
  const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
  const double swing = 0.1 * (*mx - *mn);
  std::vector<Beat> beats;
  if (!(swing > 0.0)) return beats;

  bool seeking_max = true;
  int extreme = 0;
  int ed = 0;
  for (int t = 1; t < n; ++t) {
    const double v = s[static_cast<std::size_t>(t)];
    const double e = s[static_cast<std::size_t>(extreme)];
    if (seeking_max) {
      if (v > e) {
        extreme = t;
      } else if (v < e - swing) {
        ed = extreme;
        seeking_max = false;
        extreme = t;
      }
    } else {
      if (v < e) {
        extreme = t;
      } else if (v > e + swing) {
        beats.emplace_back(ed, extreme);
        seeking_max = true;
        extreme = t;
      }
    }
  }
  return beats;
}

Image temporal_median_image(const ScanSequence& sequence) {
  sequence.validate();
  const auto& first = sequence.frames.front();
  Image out(first.width(), first.height());
  std::vector<double> values(sequence.size());
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    for (std::size_t t = 0; t < sequence.size(); ++t) values[t] = sequence.frames[t].pixels()[i];
    dst[i] = static_cast<float>(median_in_place(values));
  }
  return out;
}

StartSelection select_start_frame(std::span<const PreparedFrame> frames,
                                  const PreparedFrame& median_frame,
                                  const PipelineParams& params) {
  return run_start_selection(frames, &median_frame, params).selection;
}

StartSelection select_start_frame(const ScanSequence& sequence, const UipSet& uips,
                                  const PipelineParams& params) {
  sequence.validate();
  if (uips.frames.size() != sequence.size()) {
    throw Error(ErrorCode::InvalidArgument, "UIP set does not match the sequence length");
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.start_candidates),
                                              sequence.size());
  std::vector<PreparedFrame> frames;
  for (std::size_t t = 0; t < k; ++t) {
    frames.push_back(prepare_frame(sequence.frames[t], uips.frames[t], params));
  }
  const auto med = prepare_frame(temporal_median_image(sequence), median_uips(uips.frames), params);
  return run_start_selection(frames, &med, params).selection;
}

InitializedRun segment_initialized(const PreparedFrame& frame, const Boundary& previous,
                                   const UipFrame& uips_prev, const PipelineParams& params,
                                   int frame_index) {
  InitializedRun run;
  const Boundary expected = expected_boundary(previous, uips_prev, frame.uips);
  try {
    const NodeGraph window = restrict_to_window(frame.graph, expected, params.window_tolerance);
    run.segmentation = segment_frame(frame, window, params, frame_index);
    run.relative_change =
        mean_relative_change(run.segmentation.smoothed, recenter(previous, frame.polar.origin()));
    if (run.relative_change <= params.rerun_threshold) return run;
  } catch (const Error& e) {
    if (!recoverable(e.code())) throw;
  }
  run.rerun = true;
  run.segmentation = segment_frame(frame, frame.graph, params, frame_index);
  return run;
}

SegmentationResult segment_sequence(const ScanSequence& sequence, const UipFrame& initial,
                                    const PipelineParams& params) {
  params.validate();
  sequence.validate();
  SegmentationResult result;
  result.params = params;
  const std::size_t n = sequence.size();

  auto tracking = track_uips(sequence, initial, params.tracking);
  result.uips = tracking.uips;
  result.lost_points = tracking.lost_points;

  std::vector<PreparedFrame> prepared;
  prepared.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    prepared.push_back(prepare_frame(sequence.frames[t], result.uips.frames[t], params));
  }

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.start_candidates), n);
  std::optional<PreparedFrame> median_frame;
  if (n > 1) {
    try {
      median_frame = prepare_frame(temporal_median_image(sequence), median_uips(result.uips.frames),
                                   params);
    } catch (const Error& e) {
      if (!recoverable(e.code()) && e.code() != ErrorCode::DegenerateContrast) throw;
    }
  }
  auto start = run_start_selection(std::span(prepared).first(k),
                                   median_frame ? &*median_frame : nullptr, params);
  const int s0 = start.selection.frame;
  result.start_frame = s0;

  std::vector<std::optional<Boundary>> boundaries(n);
  result.frames.assign(n, FrameRecord{});
  {
    auto& seg = *start.segmentations[static_cast<std::size_t>(s0)];
    seg.smoothed.frame_index = s0;
    boundaries[static_cast<std::size_t>(s0)] = seg.smoothed;
    result.frames[static_cast<std::size_t>(s0)].fusion_fallback = seg.fusion_fallback;
  }

  auto sweep = [&](int step) {
    int anchor = s0;
    for (int t = s0 + step; t >= 0 && t < static_cast<int>(n); t += step) {
      const auto ti = static_cast<std::size_t>(t);
      auto& record = result.frames[ti];
      try {
        const auto run = segment_initialized(prepared[ti], *boundaries[static_cast<std::size_t>(anchor)],
                                             prepared[static_cast<std::size_t>(anchor)].uips, params, t);
        boundaries[ti] = run.segmentation.smoothed;
        record.rerun = run.rerun;
        record.fusion_fallback = run.segmentation.fusion_fallback;
        anchor = t;
      } catch (const Error& e) {
        if (!recoverable(e.code())) throw;
        record.missing = true;
      }
    }
  };
  sweep(+1);
  sweep(-1);

  // Missing frames: linear interpolation between the nearest segmented frames.
  const int half_samples = params.canonical_half_samples;
  for (std::size_t t = 0; t < n; ++t) {
    if (boundaries[t]) continue;
    std::optional<std::size_t> before;
    std::optional<std::size_t> after;
    for (std::size_t s = t; s-- > 0;) {
      if (!result.frames[s].missing) {
        before = s;
        break;
      }
    }
    for (std::size_t s = t + 1; s < n; ++s) {
      if (!result.frames[s].missing) {
        after = s;
        break;
      }
    }
    if (!before && !after) throw Error(ErrorCode::HalfFailure, "no frame could be segmented");
    std::vector<Point> pts;
    if (before && after) {
      const auto a = canonical_points(*boundaries[*before], half_samples);
      const auto b = canonical_points(*boundaries[*after], half_samples);
      const double w = static_cast<double>(t - *before) / static_cast<double>(*after - *before);
      for (std::size_t i = 0; i < a.size(); ++i) pts.push_back(a[i] + w * (b[i] - a[i]));
    } else {
      pts = canonical_points(*boundaries[before ? *before : *after], half_samples);
    }
    boundaries[t] = resample_onto(layout_grid(prepared[t], static_cast<int>(t)), pts);
  }

  std::vector<Boundary> smoothed;
  smoothed.reserve(n);
  for (auto& b : boundaries) smoothed.push_back(std::move(*b));
  smoothed = temporal_smooth_canonical(smoothed, params.temporal_window, half_samples);
  for (std::size_t t = 0; t < n; ++t) {
    smoothed[t].frame_index = static_cast<int>(t);
    for (double& r : smoothed[t].r) r = std::max(r, 1.0);
  }
  result.uncorrected = smoothed;

  const double spacing = sequence.pixel_spacing_mm;
  for (const auto& b : smoothed) result.raw_volume_curve.push_back(contour_volume(b, spacing));

  std::vector<Beat> beats;
  if (n >= 3) {
    for (const auto& beat : detect_beats(result.raw_volume_curve, params.beat_smoothing)) {
      if (result.raw_volume_curve[static_cast<std::size_t>(beat.first)] >
          result.raw_volume_curve[static_cast<std::size_t>(beat.second)]) {
        beats.push_back(beat);
      }
    }
  }
  result.beats = beats;

  result.boundaries = smoothed;
  if (params.volume_correction) {
    std::vector<double> raw_mrbp;
    std::vector<double> areas;
    for (std::size_t t = 0; t < n; ++t) {
      result.bands.push_back(smoothed_band(smoothed[t], prepared[t].polar, params.band));
      raw_mrbp.push_back(mean_rbp(smoothed[t], result.bands.back()));
      areas.push_back(result.bands.back().band_area);
    }
    const double midpoint = 0.5 * (params.anchors.ed + params.anchors.es);
    result.targets.assign(n, midpoint);
    if (!beats.empty()) {
      try {
        result.schedule =
            build_schedule(raw_mrbp, result.raw_volume_curve, beats, areas, params.anchors);
        result.targets = result.schedule->cmrbp_io;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::FlatVolume) throw;
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      result.boundaries[t] =
          apply_power6(smoothed[t], result.bands[t], result.targets[t], params.power6);
      for (double& r : result.boundaries[t].r) r = std::max(r, 1.0);
    }
  }

  for (const auto& b : result.boundaries) result.volume_curve.push_back(contour_volume(b, spacing));
  for (const auto& [ed, es] : beats) {
    const double edv = result.volume_curve[static_cast<std::size_t>(ed)];
    const double esv = result.volume_curve[static_cast<std::size_t>(es)];
    result.edv.push_back(edv);
    result.esv.push_back(esv);
    result.ef.push_back(ejection_fraction(edv, esv));
  }
  return result;
}

}  // namespace proid
