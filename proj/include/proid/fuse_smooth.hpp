#pragma once

#include <span>
#include <vector>

#include "proid/boundary.hpp"
#include "proid/preprocess.hpp"

namespace proid {

struct FusionSample {
  double u = 0.0;       ///< position along the contour, in samples
  double r = 0.0;       ///< px
  double weight = 0.0;  ///< mean normalized prominence of the contributing path
};

struct FusionOptions {
  int center_spacing = 4;      ///< samples between RBF centers
  double shape_factor = 2.0;   ///< shape parameter = shape_factor * center_spacing
  double ridge = 1e-8;
  int fallback_halfwidth = 3;  ///< moving-average half window, samples
};

struct FusedRadii {
  std::vector<double> r;
  bool used_fallback = false;
};

/// Weighted multiquadric RBF regression of r(u), evaluated at u = 0..n-1.
/// Falls back to a weighted moving average when the fit is singular.
FusedRadii mqrbf_fuse(std::span<const FusionSample> samples, std::size_t n,
                      const FusionOptions& options = {});

/// Unsigned turning angle (deg) at each interior vertex; size n-2.
std::vector<double> boundary_angles(std::span<const Point> points);

struct SmoothOptions {
  double peak_threshold_deg = 25.0;
  double segment_fraction = 0.08;
  int offsets = 15;
  double offset_span = 0.10;
  int passes = 2;
};

/// Interior sample indices whose turning angle is a local maximum above the
/// threshold.
std::vector<std::size_t> angle_peaks(std::span<const double> angles, double threshold_deg);

/// Largest number of samples an extracted segment may span.
std::size_t max_segment_samples(std::size_t boundary_samples, double segment_fraction);

Boundary gradient_smooth(const Boundary& boundary, const PolarImage& polar,
                         const SmoothOptions& options = {});

/// Per-sample median over a centered window of frames, truncated at the ends.
/// All boundaries must share start bin, direction and sample count.
std::vector<Boundary> temporal_median_smooth(std::span<const Boundary> boundaries,
                                             int window = 5);

}  // namespace proid
