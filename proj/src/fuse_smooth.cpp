#include "proid/fuse_smooth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "proid/error.hpp"

namespace proid {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

std::vector<double> moving_average(std::span<const FusionSample> samples, std::size_t n,
                                   int halfwidth) {
  std::vector<double> out(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (int hw = std::max(halfwidth, 0);; hw *= 2) {
      double sw = 0.0;
      double swr = 0.0;
      for (const auto& s : samples) {
        if (std::abs(s.u - static_cast<double>(u)) <= hw) {
          sw += s.weight;
          swr += s.weight * s.r;
        }
      }
      if (sw > 0.0) {
        out[u] = swr / sw;
        break;
      }
      if (hw > static_cast<int>(4 * n) + 4) break;
      if (hw == 0) hw = 1;
    }
  }
  return out;
}

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

FusedRadii mqrbf_fuse(std::span<const FusionSample> samples, std::size_t n,
                      const FusionOptions& options) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "fusion needs at least one output sample");
  if (options.center_spacing < 1 || !(options.shape_factor > 0.0) || options.ridge < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid MQ-RBF options");
  }
  std::vector<FusionSample> used;
  used.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.weight > 0.0 && std::isfinite(s.weight) && std::isfinite(s.r) && std::isfinite(s.u)) {
      used.push_back(s);
    }
  }
  if (used.empty()) throw Error(ErrorCode::InvalidArgument, "no weighted samples to fuse");

  std::vector<double> centers;
  for (std::size_t c = 0; c < n; c += static_cast<std::size_t>(options.center_spacing)) {
    centers.push_back(static_cast<double>(c));
  }
  if (centers.back() < static_cast<double>(n - 1)) centers.push_back(static_cast<double>(n - 1));
  const double shape = options.shape_factor * options.center_spacing;
  auto kernel = [shape](double d) { return std::sqrt(1.0 + (d / shape) * (d / shape)); };

  const auto m = static_cast<Eigen::Index>(centers.size());
  const auto rows = static_cast<Eigen::Index>(used.size()) + m;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  for (std::size_t i = 0; i < used.size(); ++i) {
    const double sw = std::sqrt(used[i].weight);
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      a(row, j) = sw * kernel(used[i].u - centers[static_cast<std::size_t>(j)]);
    }
    b(row) = sw * used[i].r;
  }
  const double ridge = std::sqrt(options.ridge);
  for (Eigen::Index j = 0; j < m; ++j) a(static_cast<Eigen::Index>(used.size()) + j, j) = ridge;

  FusedRadii out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  bool singular = qr.rank() < m;
  Eigen::VectorXd coeffs;
  if (!singular) {
    coeffs = qr.solve(b);
    singular = !coeffs.allFinite();
  }
  if (singular) {
    out.r = moving_average(used, n, options.fallback_halfwidth);
    out.used_fallback = true;
    return out;
  }
  out.r.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      v += coeffs(j) * kernel(static_cast<double>(u) - centers[static_cast<std::size_t>(j)]);
    }
    out.r[u] = v;
  }
  return out;
}

std::vector<double> boundary_angles(std::span<const Point> points) {
  std::vector<double> out;
  if (points.size() < 3) return out;
  out.reserve(points.size() - 2);
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    const Point v1 = points[i] - points[i - 1];
    const Point v2 = points[i + 1] - points[i];
    const double cross = v1.x * v2.y - v1.y * v2.x;
    const double dot = v1.x * v2.x + v1.y * v2.y;
    out.push_back(cross == 0.0 && dot == 0.0 ? 0.0 : std::atan2(std::abs(cross), dot) * kDegPerRad);
  }
  return out;
}

std::vector<std::size_t> angle_peaks(std::span<const double> angles, double threshold_deg) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!(angles[i] > threshold_deg)) continue;
    const bool left_ok = i == 0 || angles[i] >= angles[i - 1];
    const bool right_ok = i + 1 == angles.size() || angles[i] > angles[i + 1];
    if (left_ok && right_ok) peaks.push_back(i + 1);
  }
  return peaks;
}

std::size_t max_segment_samples(std::size_t boundary_samples, double segment_fraction) {
  return static_cast<std::size_t>(std::floor(segment_fraction * static_cast<double>(boundary_samples)));
}

namespace {

struct Criteria {
  double length = 0.0;
  double peaks = 0.0;
  double max_slope = 0.0;
  double neg_intensity = 0.0;
};

Criteria score_candidate(const Boundary& candidate, const PolarImage& polar, std::size_t a,
                         std::size_t b, double threshold) {
  const std::size_t n = candidate.size();
  const std::size_t lo = a == 0 ? 0 : a - 1;
  const std::size_t hi = std::min(n - 1, b + 1);
  std::vector<Point> pts;
  for (std::size_t i = lo; i <= hi; ++i) pts.push_back(candidate.point(i));

  Criteria c;
  for (std::size_t i = a; i < b; ++i) c.length += distance(candidate.point(i), candidate.point(i + 1));
  c.peaks = static_cast<double>(angle_peaks(boundary_angles(pts), threshold).size());
  for (std::size_t i = lo; i < hi; ++i) {
    c.max_slope = std::max(c.max_slope, std::abs(candidate.r[i + 1] - candidate.r[i]) /
                                            candidate.theta_resolution);
  }
  double sum = 0.0;
  for (std::size_t i = a; i <= b; ++i) sum += polar.sample(candidate.r[i], candidate.theta_deg(i));
  c.neg_intensity = -sum / static_cast<double>(b - a + 1);
  return c;
}

void normalize(std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (double& x : v) x = range > 0.0 ? (x - min) / range : 0.0;
}

}  // namespace

Boundary gradient_smooth(const Boundary& boundary, const PolarImage& polar,
                         const SmoothOptions& options) {
  Boundary current = boundary;
  const std::size_t n = current.size();
  if (n < 3 || options.offsets < 1) return current;
  const std::size_t half_cap = max_segment_samples(n, options.segment_fraction) / 2;

  for (int pass = 0; pass < options.passes; ++pass) {
    const auto pts = current.points();
    const auto peaks = angle_peaks(boundary_angles(pts), options.peak_threshold_deg);
    for (std::size_t k = 0; k < peaks.size(); ++k) {
      const std::size_t p = peaks[k];
      std::size_t a = p > half_cap ? p - half_cap : 0;
      std::size_t b = std::min(n - 1, p + half_cap);
      if (k > 0) a = std::max(a, peaks[k - 1]);
      if (k + 1 < peaks.size()) b = std::min(b, peaks[k + 1]);
      if (a >= p || b <= p) continue;

      const std::vector<double> original = current.r;
      std::vector<Boundary> candidates;
      std::vector<double> offsets;
      for (int j = 0; j < options.offsets; ++j) {
        const double f = options.offsets == 1
                             ? 0.0
                             : -options.offset_span +
                                   2.0 * options.offset_span * j / (options.offsets - 1);
        offsets.push_back(f);
        const double ra = original[a];
        const double rb = original[b];
        const double rp = original[p] * (1.0 + f);
        const double xa = static_cast<double>(a);
        const double xb = static_cast<double>(b);
        const double xp = static_cast<double>(p);
        Boundary cand = current;
        for (std::size_t i = a; i <= b; ++i) {
          const double x = static_cast<double>(i);
          const double q = ra * (x - xp) * (x - xb) / ((xa - xp) * (xa - xb)) +
                           rp * (x - xa) * (x - xb) / ((xp - xa) * (xp - xb)) +
                           rb * (x - xa) * (x - xp) / ((xb - xa) * (xb - xp));
          const double limit = options.offset_span * original[i];
          cand.r[i] = std::clamp(q, original[i] - limit, original[i] + limit);
        }
        candidates.push_back(std::move(cand));
      }

      std::vector<double> length, count, slope, dark;
      for (const auto& cand : candidates) {
        const auto c = score_candidate(cand, polar, a, b, options.peak_threshold_deg);
        length.push_back(c.length);
        count.push_back(c.peaks);
        slope.push_back(c.max_slope);
        dark.push_back(c.neg_intensity);
      }
      normalize(length);
      normalize(count);
      normalize(slope);
      normalize(dark);
      std::size_t best = 0;
      double best_score = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double score = length[j] + count[j] + slope[j] + dark[j];
        const bool better = score < best_score - 1e-12 ||
                            (std::abs(score - best_score) <= 1e-12 &&
                             std::abs(offsets[j]) < std::abs(offsets[best]));
        if (better) {
          best = j;
          best_score = std::min(best_score, score);
        }
      }
      current.r = candidates[best].r;
    }
  }
  return current;
}

std::vector<Boundary> temporal_median_smooth(std::span<const Boundary> boundaries, int window) {
  std::vector<Boundary> out(boundaries.begin(), boundaries.end());
  if (boundaries.size() < 2 || window <= 1) return out;
  const Boundary& ref = boundaries.front();
  for (const auto& b : boundaries) {
    if (b.size() != ref.size() || b.start_bin != ref.start_bin || b.direction != ref.direction) {
      throw Error(ErrorCode::InvalidArgument, "temporal smoothing needs a shared theta grid");
    }
  }
  const int half = window / 2;
  const int frames = static_cast<int>(boundaries.size());
  std::vector<double> values;
  for (int t = 0; t < frames; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(frames - 1, t + half);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      values.clear();
      for (int s = lo; s <= hi; ++s) values.push_back(boundaries[static_cast<std::size_t>(s)].r[i]);
      out[static_cast<std::size_t>(t)].r[i] = median_of(values);
    }
  }
  return out;
}

}  // namespace proid
