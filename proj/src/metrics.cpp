#include "proid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "proid/error.hpp"

namespace proid {

namespace {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

int orientation(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), std::abs(c.x - a.x),
                                 std::abs(c.y - a.y), 1.0});
  if (std::abs(v) <= 1e-12 * scale * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

// Drops consecutive duplicate vertices (including the closing pair).
std::vector<Point> simplify(std::span<const Point> polygon) {
  std::vector<Point> out;
  for (const Point& p : polygon) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

}  // namespace

bool polygon_self_intersects(std::span<const Point> polygon) {
  const auto pts = simplify(polygon);
  const std::size_t n = pts.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a1 = pts[i];
    const Point a2 = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_intersect(a1, a2, pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

double contour_volume(std::span<const Point> polygon, Point mv_a, Point mv_b,
                      double pixel_spacing_mm, const VolumeOptions& options) {
  if (!(pixel_spacing_mm > 0.0)) throw Error(ErrorCode::InvalidArgument, "pixel spacing must be positive");
  if (options.disks < 1) throw Error(ErrorCode::InvalidArgument, "disk count must be positive");
  const auto pts = simplify(polygon);
  if (pts.size() < 3) throw Error(ErrorCode::Geometry, "contour needs at least three vertices");
  if (polygon_self_intersects(pts)) throw Error(ErrorCode::Geometry, "contour self-intersects");

  const Point base = 0.5 * (mv_a + mv_b);
  Point apex = pts.front();
  for (const Point& p : pts) {
    if (distance(p, base) > distance(apex, base)) apex = p;
  }
  const double length = distance(apex, base);
  if (!(length > 0.0)) throw Error(ErrorCode::Geometry, "degenerate long axis");
  const Point axis = (1.0 / length) * (apex - base);
  const Point perp{-axis.y, axis.x};
  const double dh = length / options.disks;
  const std::size_t n = pts.size();

  double volume_px3 = 0.0;
  std::vector<double> hits;
  for (int i = 0; i < options.disks; ++i) {
    const double h = (i + 0.5) * dh;
    // Crossings of the disk line {p : (p - base).axis = h} with each edge,
    // parameterized by the coordinate along `perp`.
    hits.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const Point p = pts[k];
      const Point q = pts[(k + 1) % n];
      const double hp = (p.x - base.x) * axis.x + (p.y - base.y) * axis.y - h;
      const double hq = (q.x - base.x) * axis.x + (q.y - base.y) * axis.y - h;
      if ((hp < 0.0) == (hq < 0.0)) continue;
      const double t = hp / (hp - hq);
      const Point c = p + t * (q - p);
      hits.push_back((c.x - base.x) * perp.x + (c.y - base.y) * perp.y);
    }
    std::sort(hits.begin(), hits.end());
    double width = 0.0;
    for (std::size_t k = 0; k + 1 < hits.size(); k += 2) width += hits[k + 1] - hits[k];
    volume_px3 += std::numbers::pi / 4.0 * width * width * dh;
  }
  const double mm3 = volume_px3 * pixel_spacing_mm * pixel_spacing_mm * pixel_spacing_mm;
  return mm3 / 1000.0;
}

double contour_volume(const Boundary& boundary, double pixel_spacing_mm,
                      const VolumeOptions& options) {
  if (boundary.size() < 3) throw Error(ErrorCode::Geometry, "contour needs at least three samples");
  const auto pts = boundary.points();
  return contour_volume(pts, pts.front(), pts.back(), pixel_spacing_mm, options);
}

Mask rasterize(std::span<const Point> polygon, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Dimension, "mask grid must be non-empty");
  Mask mask(width, height);
  const auto pts = simplify(polygon);
  const std::size_t n = pts.size();
  if (n == 0) return mask;

  std::vector<double> xs;
  for (int y = 0; y < height && n >= 3; ++y) {
    const double yc = y;
    xs.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const Point p = pts[k];
      const Point q = pts[(k + 1) % n];
      if ((p.y <= yc) == (q.y <= yc)) continue;
      xs.push_back(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int x1 = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1])));
      for (int x = x0; x <= x1; ++x) mask.set(x, y);
    }
  }

  auto mark = [&](Point p) {
    const int x = static_cast<int>(std::lround(p.x));
    const int y = static_cast<int>(std::lround(p.y));
    if (x >= 0 && y >= 0 && x < width && y < height) mask.set(x, y);
  };
  for (std::size_t k = 0; k < n; ++k) {
    const Point p = pts[k];
    const Point q = pts[(k + 1) % n];
    const int steps = std::max(1, static_cast<int>(std::ceil(4.0 * distance(p, q))));
    for (int s = 0; s <= steps; ++s) mark(p + (static_cast<double>(s) / steps) * (q - p));
  }
  return mask;
}

double dice(const Mask& test, const Mask& reference) {
  if (test.width != reference.width || test.height != reference.height) {
    throw Error(ErrorCode::Dimension, "masks are on different grids");
  }
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t both = 0;
  for (std::size_t i = 0; i < test.data.size(); ++i) {
    const bool x = test.data[i] != 0;
    const bool y = reference.data[i] != 0;
    a += x;
    b += y;
    both += x && y;
  }
  if (a + b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

double cnr(const Image& image, const Mask& cavity, const Mask& myocardium) {
  for (const Mask* m : {&cavity, &myocardium}) {
    if (m->width != image.width() || m->height != image.height()) {
      throw Error(ErrorCode::Dimension, "mask does not match the image grid");
    }
  }
  auto stats = [&](const Mask& m) {
    double sum = 0.0;
    double sq = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        if (!m.at(x, y)) continue;
        const double v = image.at(x, y);
        sum += v;
        ++count;
      }
    }
    if (count == 0) throw Error(ErrorCode::InvalidArgument, "CNR mask is empty");
    const double mean = sum / static_cast<double>(count);
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        if (!m.at(x, y)) continue;
        const double d = image.at(x, y) - mean;
        sq += d * d;
      }
    }
    return std::pair{mean, sq / static_cast<double>(count)};
  };
  const auto [mu_c, var_c] = stats(cavity);
  const auto [mu_m, var_m] = stats(myocardium);
  if (var_c + var_m == 0.0) throw Error(ErrorCode::InfiniteCnr, "both regions have zero variance");
  return std::abs(mu_c - mu_m) / std::sqrt(var_c + var_m);
}

double ejection_fraction(double edv, double esv) {
  if (!(edv > 0.0)) throw Error(ErrorCode::Domain, "end-diastolic volume must be positive");
  return 100.0 * (edv - esv) / edv;
}

BlandAltman bland_altman(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw Error(ErrorCode::InsufficientData, "Bland-Altman needs two pairs");
  double sum = 0.0;
  for (const auto& [a, b] : pairs) sum += a - b;
  const double bias = sum / static_cast<double>(pairs.size());
  double sq = 0.0;
  for (const auto& [a, b] : pairs) sq += (a - b - bias) * (a - b - bias);
  const double sd = std::sqrt(sq / static_cast<double>(pairs.size() - 1));
  return {bias, bias - 1.96 * sd, bias + 1.96 * sd};
}

}  // namespace proid
