#include "proid/volume_correct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "proid/error.hpp"

namespace proid {

namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;

// Daubechies 4-tap scaling filter.
const std::array<double, 4> kD4 = [] {
  const double s3 = std::sqrt(3.0);
  const double norm = 4.0 * std::sqrt(2.0);
  return std::array<double, 4>{(1 + s3) / norm, (3 + s3) / norm, (3 - s3) / norm,
                               (1 - s3) / norm};
}();

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void BoundaryBand::validate() const {
  if (inner.size() != outer.size()) throw Error(ErrorCode::DegenerateBand, "band sizes differ");
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (!(inner[i] <= outer[i])) {
      throw Error(ErrorCode::DegenerateBand,
                  "inner wall lies outside the outer wall at sample " + std::to_string(i));
    }
  }
  if (band_area < 0.0) throw Error(ErrorCode::DegenerateBand, "band area is negative");
}

ProfileHit outer_hit(std::span<const double> profile, double fraction) {
  if (profile.empty()) return {0, true};
  const double threshold = fraction * profile[0];
  for (std::size_t k = 1; k < profile.size(); ++k) {
    if (profile[k] < threshold) return {k, false};
  }
  return {profile.size() - 1, true};
}

ProfileHit inner_hit(std::span<const double> profile, double fraction) {
  if (profile.empty()) return {0, true};
  const double threshold = fraction * profile[0];
  std::optional<std::size_t> minimum;
  for (std::size_t k = 1; k < profile.size(); ++k) {
    if (profile[k] < threshold) return {k, false};
    if (!minimum && k + 1 < profile.size() && profile[k] < profile[k - 1] &&
        profile[k] <= profile[k + 1]) {
      minimum = k;
    }
  }
  if (minimum) return {*minimum, false};
  return {profile.size() - 1, true};
}

double band_area(const Boundary& geometry, std::span<const double> inner,
                 std::span<const double> outer) {
  const double d_theta = geometry.theta_resolution * kRadPerDeg;
  double area = 0.0;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    area += 0.5 * (outer[i] * outer[i] - inner[i] * inner[i]) * d_theta;
  }
  return area;
}

BoundaryBand find_band(const Boundary& boundary, const PolarImage& polar,
                       const BandOptions& options) {
  const std::size_t n = boundary.size();
  BoundaryBand band;
  band.inner.resize(n);
  band.outer.resize(n);
  band.inner_capped.resize(n);
  band.outer_capped.resize(n);
  if (n == 0) return band;
  const auto pts = boundary.points();
  const Point origin = boundary.origin;
  const double r_max = polar.max_radius();
  const double step = options.step_px;

  const Point center = polar.origin();
  auto intensity = [&](Point q) {
    const double dx = q.x - center.x;
    const double dy = q.y - center.y;
    return polar.sample(std::hypot(dx, dy), polar_angle(dy, dx));
  };

  std::vector<Point> inner_pts(n);
  std::vector<Point> outer_pts(n);
  std::vector<double> profile;
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = pts[i];
    const Point radial_vec = p - origin;
    const double rb = std::hypot(radial_vec.x, radial_vec.y);
    const Point e_r = rb > 0.0 ? (1.0 / rb) * radial_vec : Point{1.0, 0.0};
    const Point tangent = pts[std::min(i + 1, n - 1)] - pts[i == 0 ? 0 : i - 1];
    const double tlen = std::hypot(tangent.x, tangent.y);
    Point normal = tlen > 0.0 ? Point{-tangent.y / tlen, tangent.x / tlen} : e_r;
    if (normal.x * e_r.x + normal.y * e_r.y < 0.0) normal = -1.0 * normal;

    // Outward profile, stopping at the polar field edge.
    profile.clear();
    for (int k = 0;; ++k) {
      const Point q = p + (k * step) * normal;
      if (k > 0 && distance(q, center) > r_max) break;
      profile.push_back(intensity(q));
    }
    const auto out_hit = outer_hit(profile, options.outer_fraction);
    outer_pts[i] = p + (out_hit.index * step) * normal;
    band.outer_capped[i] = out_hit.capped;

    // Inward profile, stopping before the line passes the origin.
    profile.clear();
    const double along = normal.x * e_r.x + normal.y * e_r.y;
    const int inward_steps = std::max(0, static_cast<int>(std::floor(rb * along / step)) - 1);
    for (int k = 0; k <= inward_steps; ++k) profile.push_back(intensity(p - (k * step) * normal));
    const auto in_hit = inner_hit(profile, options.inner_fraction);
    inner_pts[i] = p - (in_hit.index * step) * normal;
    band.inner_capped[i] = in_hit.capped;
  }
  // Both walls are mapped back onto the boundary bins.
  band.inner = resample_onto(boundary, inner_pts).r;
  band.outer = resample_onto(boundary, outer_pts).r;
  for (std::size_t i = 0; i < n; ++i) {
    band.outer[i] = std::min(band.outer[i], r_max);
    if (band.inner[i] > band.outer[i]) std::swap(band.inner[i], band.outer[i]);
  }
  band.band_area = band_area(boundary, band.inner, band.outer);
  return band;
}

std::vector<double> wavelet_filter(std::span<const double> samples) {
  const std::size_t n = samples.size();
  std::vector<double> x(samples.begin(), samples.end());
  if (n < 8) return x;
  // Whole-sample symmetric extension: x0 .. x(n-1), x(n-2) .. x1, period 2n - 2.
  std::vector<double> ext(x);
  ext.insert(ext.end(), x.rbegin() + 1, x.rend() - 1);
  const std::size_t m = ext.size();
  std::vector<double> approx(m / 2, 0.0);
  for (std::size_t k = 0; k < m / 2; ++k) {
    for (std::size_t j = 0; j < kD4.size(); ++j) approx[k] += kD4[j] * ext[(2 * k + j) % m];
  }
  std::vector<double> recon(m, 0.0);
  for (std::size_t k = 0; k < m / 2; ++k) {
    for (std::size_t j = 0; j < kD4.size(); ++j) recon[(2 * k + j) % m] += kD4[j] * approx[k];
  }
  recon.resize(n);
  const double shift = (std::accumulate(x.begin(), x.end(), 0.0) -
                        std::accumulate(recon.begin(), recon.end(), 0.0)) /
                       static_cast<double>(n);
  for (double& v : recon) v += shift;
  return recon;
}

double rbp(double r_boundary, double r_inner, double r_outer) {
  const double width = r_outer - r_inner;
  if (std::abs(width) < 1e-12) throw Error(ErrorCode::DegenerateBand, "inner and outer walls coincide");
  return (r_boundary - r_inner) / width;
}

double inverse_rbp(double rbp_value, double r_inner, double r_outer) {
  return r_inner + rbp_value * (r_outer - r_inner);
}

double mean_rbp(const Boundary& boundary, const BoundaryBand& band) {
  if (boundary.size() != band.inner.size() || boundary.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "band does not match the boundary");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    sum += rbp(boundary.r[i], band.inner[i], band.outer[i]);
  }
  return sum / static_cast<double>(boundary.size());
}

MRBPSchedule build_schedule(std::span<const double> raw_mrbp,
                            std::span<const double> raw_volumes, std::span<const Beat> beats,
                            std::span<const double> band_areas, const ScheduleAnchors& anchors) {
  const std::size_t n = raw_volumes.size();
  if (raw_mrbp.size() != n || band_areas.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "schedule inputs differ in frame count");
  }
  if (beats.empty()) throw Error(ErrorCode::InvalidArgument, "schedule needs at least one beat");
  for (const auto& [ed, es] : beats) {
    if (ed < 0 || es < 0 || static_cast<std::size_t>(ed) >= n || static_cast<std::size_t>(es) >= n) {
      throw Error(ErrorCode::InvalidArgument, "beat frame out of range");
    }
  }

  double ved = 0.0;
  double ves = 0.0;
  for (const auto& [ed, es] : beats) {
    ved += raw_volumes[static_cast<std::size_t>(ed)];
    ves += raw_volumes[static_cast<std::size_t>(es)];
  }
  ved /= static_cast<double>(beats.size());
  ves /= static_cast<double>(beats.size());
  if (std::abs(ved - ves) < 1e-12) {
    throw Error(ErrorCode::FlatVolume, "average diastolic and systolic volumes coincide");
  }

  const double lo = std::min(anchors.ed, anchors.es);
  const double hi = std::max(anchors.ed, anchors.es);
  auto interpolate = [&](double v, double v_ed, double v_es) {
    const double t = (v - v_es) / (v_ed - v_es);
    return std::clamp((1.0 - t) * anchors.es + t * anchors.ed, lo, hi);
  };

  MRBPSchedule s;
  s.ed_anchor = anchors.ed;
  s.es_anchor = anchors.es;
  s.raw.assign(raw_mrbp.begin(), raw_mrbp.end());
  s.cmrbp_init.resize(n);
  s.cmrbp_bv.resize(n);
  s.cmrbp_io.resize(n);

  const double median_area = median_of({band_areas.begin(), band_areas.end()});
  std::size_t beat = 0;
  for (std::size_t t = 0; t < n; ++t) {
    while (beat + 1 < beats.size() && static_cast<int>(t) >= beats[beat + 1].first) ++beat;
    const double v = raw_volumes[t];
    s.cmrbp_init[t] = interpolate(v, ved, ves);
    const double own_ed = raw_volumes[static_cast<std::size_t>(beats[beat].first)];
    const double own_es = raw_volumes[static_cast<std::size_t>(beats[beat].second)];
    s.cmrbp_bv[t] = std::abs(own_ed - own_es) < 1e-12 ? s.cmrbp_init[t]
                                                      : interpolate(v, own_ed, own_es);
    const double ratio = band_areas[t] > 0.0 ? median_area / band_areas[t] : 1.0;
    s.cmrbp_io[t] = std::clamp(s.raw[t] + (s.cmrbp_bv[t] - s.raw[t]) * ratio, 0.0, 1.0);
  }
  return s;
}

Boundary apply_power6(const Boundary& boundary, const BoundaryBand& band, double target,
                      const Power6Options& options) {
  const std::size_t n = boundary.size();
  if (band.inner.size() != n || band.outer.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "band does not match the boundary");
  }
  if (n == 0) return boundary;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = rbp(boundary.r[i], band.inner[i], band.outer[i]);
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (mean == target) return boundary;

  double max_dev = 0.0;
  for (double v : values) max_dev = std::max(max_dev, std::abs(v - target));
  if (max_dev == 0.0) return boundary;

  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = options.base_weight + std::pow(std::abs(values[i] - target) / max_dev, 6.0);
  }
  const double mean_w = std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(n);
  const double shift = (target - mean) / mean_w;

  Boundary out = boundary;
  for (std::size_t i = 0; i < n; ++i) {
    out.r[i] = inverse_rbp(values[i] + shift * weights[i], band.inner[i], band.outer[i]);
  }
  return out;
}

}  // namespace proid
