#pragma once

#include <vector>

#include "proid/image.hpp"

namespace proid {

/// Time-ordered grayscale frames with isotropic pixel spacing.
struct ScanSequence {
  std::vector<Image> frames;
  double pixel_spacing_mm = 1.0;
  double frame_interval_s = 1.0 / 30.0;

  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
  std::size_t size() const noexcept { return frames.size(); }

  /// Throws Error(Dimension|InvalidArgument) when the invariants do not hold.
  void validate() const;
};

/// The three operator-placed points for one frame.
struct UipFrame {
  Point apex;
  Point mv_left;
  Point mv_right;

  /// Centroid of the UIP triangle; the origin of the polar unwrap.
  Point center() const;
  Point mv_midpoint() const;
  /// Twice the signed triangle area.
  double doubled_area() const;
  /// Radius of the circle through all three points.
  double circumradius() const;

  friend bool operator==(const UipFrame&, const UipFrame&) = default;
};

/// Throws Error(InvalidUip) when points coincide or are collinear.
void validate_uips(const UipFrame& uips);

/// Per-frame tracked UIPs.
struct UipSet {
  std::vector<UipFrame> frames;
};

struct AceLevels {
  double lower = 0.0;  ///< half the mean along the MV-apex line
  double upper = 0.0;  ///< maximum along the MV-apex line
};

/// Samples the MV-apex line at unit steps and derives the contrast levels.
AceLevels ace_levels(const Image& frame, const UipFrame& uips);

/// Linear contrast stretch to [0, 1] using the given levels.
Image apply_ace(const Image& frame, const AceLevels& levels);
Image apply_ace(const Image& frame, const UipFrame& uips);

/// Square median filter with edge replication. Kernel size must be odd.
Image median_filter(const Image& frame, int kernel = 11);

/// Standard two-argument arctangent in degrees, range (-180, 180].
double polar_angle(double y, double x);

struct PolarOptions {
  double theta_resolution_deg = 1.0;
  double r_resolution_px = 1.0;
};

/// Intensity resampled on an (r, theta) grid around an origin. Columns are
/// iso-theta lines; theta bin k sits at k * theta_resolution degrees.
class PolarImage {
 public:
  PolarImage() = default;
  PolarImage(int r_bins, int theta_bins, double r_resolution, double theta_resolution,
             Point origin);

  int r_bins() const noexcept { return r_bins_; }
  int theta_bins() const noexcept { return theta_bins_; }
  double r_resolution() const noexcept { return r_resolution_; }
  double theta_resolution() const noexcept { return theta_resolution_; }
  Point origin() const noexcept { return origin_; }
  double max_radius() const noexcept { return (r_bins_ - 1) * r_resolution_; }

  float& at(int r_bin, int theta_bin) { return values_[index(r_bin, theta_bin)]; }
  float at(int r_bin, int theta_bin) const { return values_[index(r_bin, theta_bin)]; }

  /// Radial profile at one theta bin, r_bins long.
  std::vector<double> column(int theta_bin) const;

  double theta_of_bin(int theta_bin) const { return theta_bin * theta_resolution_; }
  int wrap_bin(int theta_bin) const;
  int nearest_bin(double theta_deg) const;

  /// Bilinear sample at radius (px) and angle (deg); theta wraps, r clamps.
  double sample(double r_px, double theta_deg) const;

  Point to_cartesian(double r_px, double theta_deg) const;

 private:
  std::size_t index(int r_bin, int theta_bin) const noexcept {
    return static_cast<std::size_t>(r_bin) * static_cast<std::size_t>(theta_bins_) +
           static_cast<std::size_t>(theta_bin);
  }

  int r_bins_ = 0;
  int theta_bins_ = 0;
  double r_resolution_ = 1.0;
  double theta_resolution_ = 1.0;
  Point origin_;
  std::vector<float> values_;
};

/// Cartesian to polar resampling about `center`, out to the largest radius
/// that stays inside the frame in every direction.
PolarImage unwrap_polar(const Image& frame, Point center, const PolarOptions& options = {});

}  // namespace proid
