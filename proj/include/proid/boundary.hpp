#pragma once

#include <optional>
#include <span>
#include <vector>

#include "proid/image.hpp"

namespace proid {

/// Closed LV contour stored as r(theta) on consecutive theta bins.
///
/// Sample 0 sits at the mv_left annulus angle; samples advance by one bin in
/// `direction` (+1 or -1 in bin index) through the apex to the mv_right angle.
/// The annulus gap between the last and first samples is closed by a
/// straight segment when the contour is treated as a polygon.
struct Boundary {
  Point origin;
  int theta_bins = 360;
  double theta_resolution = 1.0;
  int start_bin = 0;
  int direction = 1;
  int apex_index = 0;
  std::vector<double> r;
  int frame_index = 0;
  bool closed = true;

  std::size_t size() const noexcept { return r.size(); }
  int theta_bin(std::size_t i) const;
  double theta_deg(std::size_t i) const;
  Point point(std::size_t i) const;
  std::vector<Point> points() const;

  /// Sample index covering `theta_bin`, if the bin lies inside the contour span.
  std::optional<std::size_t> index_of_bin(int theta_bin) const;
  std::optional<double> radius_at_bin(int theta_bin) const {
    auto i = index_of_bin(theta_bin);
    return i ? std::optional<double>(r[*i]) : std::nullopt;
  }

  /// Same bins and origin, different radii.
  Boundary with_radii(std::vector<double> radii) const;

  /// Throws Error(Geometry) on non-finite or non-positive radii.
  void validate() const;
};

/// Re-expresses `boundary` around `origin` on the same theta-bin span,
/// interpolating radii along the contour.
Boundary recenter(const Boundary& boundary, Point origin);

/// Radii of an ordered open polyline (mv_left end first) sampled on the bins
/// and origin of `grid`. Bins beyond either polyline end take the end radius.
Boundary resample_onto(const Boundary& grid, std::span<const Point> polyline);

/// Contour resampled at `half_samples` evenly spaced positions per half
/// (mv_left to apex, then apex to mv_right), 2 * half_samples - 1 points.
/// Contours with different centers and spans become comparable point by point.
std::vector<Point> canonical_points(const Boundary& boundary, int half_samples);

/// Mean over common bins of |a - b| / b.
double mean_relative_change(const Boundary& current, const Boundary& previous);

/// Mean over common bins of |a - b| in pixels.
double mean_abs_difference(const Boundary& a, const Boundary& b);

}  // namespace proid
