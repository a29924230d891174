#pragma once

#include <span>
#include <utility>
#include <vector>

#include "proid/boundary.hpp"
#include "proid/image.hpp"

namespace proid {

struct VolumeOptions {
  int disks = 100;
};

/// Single-plane method of disks. `polygon` is the closed contour (the last
/// vertex connects back to the first); `mv_a`/`mv_b` are the annulus ends.
/// The long axis runs from the annulus midpoint to the farthest vertex.
/// Returns mL. Throws Error(Geometry) on self-intersection.
double contour_volume(std::span<const Point> polygon, Point mv_a, Point mv_b,
                      double pixel_spacing_mm, const VolumeOptions& options = {});
double contour_volume(const Boundary& boundary, double pixel_spacing_mm,
                      const VolumeOptions& options = {});

bool polygon_self_intersects(std::span<const Point> polygon);

/// Even-odd fill of the closed polygon plus every pixel the edges pass through.
Mask rasterize(std::span<const Point> polygon, int width, int height);

double dice(const Mask& test, const Mask& reference);

/// |mu_c - mu_m| / sqrt(var_c + var_m) with population variances.
double cnr(const Image& image, const Mask& cavity, const Mask& myocardium);

double ejection_fraction(double edv, double esv);

struct BlandAltman {
  double bias = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
};

BlandAltman bland_altman(std::span<const std::pair<double, double>> pairs);

}  // namespace proid
