#include "proid/boundary.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "proid/error.hpp"

namespace proid {

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;

int wrap(int bin, int bins) {
  const int m = bin % bins;
  return m < 0 ? m + bins : m;
}

}  // namespace

int Boundary::theta_bin(std::size_t i) const {
  return wrap(start_bin + direction * static_cast<int>(i), theta_bins);
}

double Boundary::theta_deg(std::size_t i) const { return theta_bin(i) * theta_resolution; }

Point Boundary::point(std::size_t i) const {
  const double t = theta_deg(i) * kRadPerDeg;
  return {origin.x + r[i] * std::cos(t), origin.y + r[i] * std::sin(t)};
}

std::vector<Point> Boundary::points() const {
  std::vector<Point> out;
  out.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out.push_back(point(i));
  return out;
}

std::optional<std::size_t> Boundary::index_of_bin(int bin) const {
  const int offset = wrap(direction * (bin - start_bin), theta_bins);
  if (static_cast<std::size_t>(offset) < r.size()) return static_cast<std::size_t>(offset);
  return std::nullopt;
}

Boundary Boundary::with_radii(std::vector<double> radii) const {
  Boundary out = *this;
  out.r = std::move(radii);
  return out;
}

void Boundary::validate() const {
  if (r.empty()) throw Error(ErrorCode::Geometry, "boundary has no samples");
  if (direction != 1 && direction != -1) {
    throw Error(ErrorCode::Geometry, "boundary direction must be +1 or -1");
  }
  if (static_cast<int>(r.size()) > theta_bins) {
    throw Error(ErrorCode::Geometry, "boundary spans more than one turn");
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r[i]) || r[i] <= 0.0) {
      throw Error(ErrorCode::Geometry, "boundary radius at sample " + std::to_string(i) +
                                           " is not positive and finite");
    }
  }
}

Boundary resample_onto(const Boundary& grid, std::span<const Point> polyline) {
  Boundary out = grid;
  const std::size_t n = grid.size();
  const std::size_t m = polyline.size();
  if (n == 0 || m == 0) return out;
  const double theta0 = grid.theta_deg(0);

  // Sweep coordinate (in bins along the grid direction) and radius of every
  // polyline vertex about the grid origin, with angles unwrapped cumulatively.
  std::vector<double> sweep(m);
  std::vector<double> radius(m);
  double prev_phi = theta0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = polyline[i].x - grid.origin.x;
    const double dy = polyline[i].y - grid.origin.y;
    radius[i] = std::hypot(dx, dy);
    double phi = std::atan2(dy, dx) / kRadPerDeg;
    phi += 360.0 * std::round((prev_phi - phi) / 360.0);
    prev_phi = phi;
    sweep[i] = (phi - theta0) * grid.direction / grid.theta_resolution;
  }

  for (std::size_t j = 0; j < n; ++j) {
    const double target = static_cast<double>(j);
    double value = std::abs(target - sweep.front()) <= std::abs(target - sweep.back())
                       ? radius.front()
                       : radius.back();
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double a = sweep[i];
      const double b = sweep[i + 1];
      if ((target - a) * (target - b) <= 0.0) {
        const double t = b == a ? 0.0 : (target - a) / (b - a);
        value = radius[i] + t * (radius[i + 1] - radius[i]);
        break;
      }
    }
    out.r[j] = value;
  }
  return out;
}

Boundary recenter(const Boundary& boundary, Point origin) {
  if (origin == boundary.origin) return boundary;
  Boundary grid = boundary;
  grid.origin = origin;
  const auto pts = boundary.points();
  return resample_onto(grid, pts);
}

std::vector<Point> canonical_points(const Boundary& boundary, int half_samples) {
  if (half_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples per half");
  const std::size_t n = boundary.size();
  if (n < 2) throw Error(ErrorCode::Geometry, "boundary too short for canonical sampling");
  const double apex = boundary.apex_index;
  const double last = static_cast<double>(n - 1);
  auto at = [&](double u) {
    const auto lo = static_cast<std::size_t>(std::floor(u));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double t = u - static_cast<double>(lo);
    const double r = boundary.r[lo] + t * (boundary.r[hi] - boundary.r[lo]);
    const double theta =
        (boundary.theta_deg(0) + boundary.direction * boundary.theta_resolution * u) * kRadPerDeg;
    return Point{boundary.origin.x + r * std::cos(theta), boundary.origin.y + r * std::sin(theta)};
  };
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(2 * half_samples - 1));
  const double k_max = half_samples - 1;
  for (int k = 0; k < half_samples; ++k) out.push_back(at(apex * k / k_max));
  for (int k = 1; k < half_samples; ++k) out.push_back(at(apex + (last - apex) * k / k_max));
  return out;
}

double mean_relative_change(const Boundary& current, const Boundary& previous) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    const auto prev = previous.radius_at_bin(current.theta_bin(i));
    if (!prev || *prev <= 0.0) continue;
    sum += std::abs(current.r[i] - *prev) / *prev;
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double mean_abs_difference(const Boundary& a, const Boundary& b) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto other = b.radius_at_bin(a.theta_bin(i));
    if (!other) continue;
    sum += std::abs(a.r[i] - *other);
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : sum / static_cast<double>(count);
}

}  // namespace proid
