#include "proid/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "proid/error.hpp"

namespace proid {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

}  // namespace

void ScanSequence::validate() const {
  if (frames.empty()) throw Error(ErrorCode::InvalidArgument, "scan sequence has no frames");
  if (!(pixel_spacing_mm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pixel spacing must be positive");
  }
  if (!(frame_interval_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "frame interval must be positive");
  }
  const int w = frames.front().width();
  const int h = frames.front().height();
  if (w <= 0 || h <= 0) throw Error(ErrorCode::Dimension, "frames are empty");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].width() != w || frames[i].height() != h) {
      throw Error(ErrorCode::Dimension,
                  "frame " + std::to_string(i) + " differs in size from frame 0");
    }
  }
}

Point UipFrame::center() const {
  return {(apex.x + mv_left.x + mv_right.x) / 3.0, (apex.y + mv_left.y + mv_right.y) / 3.0};
}

Point UipFrame::mv_midpoint() const {
  return {(mv_left.x + mv_right.x) / 2.0, (mv_left.y + mv_right.y) / 2.0};
}

double UipFrame::doubled_area() const {
  return (mv_left.x - apex.x) * (mv_right.y - apex.y) -
         (mv_right.x - apex.x) * (mv_left.y - apex.y);
}

double UipFrame::circumradius() const {
  const double a = distance(apex, mv_left);
  const double b = distance(mv_left, mv_right);
  const double c = distance(mv_right, apex);
  const double twice_area = std::abs(doubled_area());
  if (twice_area == 0.0) return std::numeric_limits<double>::infinity();
  return a * b * c / (2.0 * twice_area);
}

void validate_uips(const UipFrame& uips) {
  const double ab = distance(uips.apex, uips.mv_left);
  const double bc = distance(uips.mv_left, uips.mv_right);
  const double ca = distance(uips.mv_right, uips.apex);
  if (ab < 1e-9 || bc < 1e-9 || ca < 1e-9) {
    throw Error(ErrorCode::InvalidUip, "UIPs must be pairwise distinct");
  }
  const double longest = std::max({ab, bc, ca});
  if (std::abs(uips.doubled_area()) <= 1e-6 * longest * longest) {
    throw Error(ErrorCode::InvalidUip, "UIPs are collinear");
  }
  for (double v : {uips.apex.x, uips.apex.y, uips.mv_left.x, uips.mv_left.y, uips.mv_right.x,
                   uips.mv_right.y}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidUip, "UIP coordinate is not finite");
  }
}

AceLevels ace_levels(const Image& frame, const UipFrame& uips) {
  const Point a = uips.apex;
  const Point b = uips.mv_midpoint();
  const double length = distance(a, b);
  if (length < 1e-9) {
    throw Error(ErrorCode::InvalidUip, "apex coincides with the mitral-valve midpoint");
  }
  if (!frame.contains(a.x, a.y) || !frame.contains(b.x, b.y)) {
    throw Error(ErrorCode::InvalidUip, "MV-apex line leaves the frame");
  }
  const int n = std::max(2, static_cast<int>(std::ceil(length)) + 1);
  double sum = 0.0;
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double v = frame.sample(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    sum += v;
    peak = std::max(peak, v);
  }
  AceLevels levels{0.5 * sum / n, peak};
  if (!(levels.upper > levels.lower)) {
    throw Error(ErrorCode::DegenerateContrast, "MV-apex line has no usable contrast");
  }
  return levels;
}

Image apply_ace(const Image& frame, const AceLevels& levels) {
  if (!(levels.upper > levels.lower)) {
    throw Error(ErrorCode::DegenerateContrast, "contrast levels are degenerate");
  }
  Image out(frame.width(), frame.height());
  const double scale = 1.0 / (levels.upper - levels.lower);
  auto src = frame.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(std::clamp((src[i] - levels.lower) * scale, 0.0, 1.0));
  }
  return out;
}

Image apply_ace(const Image& frame, const UipFrame& uips) {
  return apply_ace(frame, ace_levels(frame, uips));
}

namespace {

bool is_byte_image(const Image& frame) {
  for (float v : frame.pixels()) {
    if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v)) return false;
  }
  return true;
}

// Exact median for 8-bit content using a two-level sliding histogram.
Image byte_median(const Image& frame, int kernel) {
  const int half = kernel / 2;
  const int w = frame.width();
  const int h = frame.height();
  const int rank = kernel * kernel / 2;  // zero-based rank of the median
  Image out(w, h);
  std::vector<int> xs(static_cast<std::size_t>(w + 2 * half));
  for (int i = 0; i < w + 2 * half; ++i) xs[static_cast<std::size_t>(i)] = std::clamp(i - half, 0, w - 1);
  for (int y = 0; y < h; ++y) {
    int fine[256] = {};
    int coarse[16] = {};
    auto add_column = [&](int x, int delta) {
      for (int dy = -half; dy <= half; ++dy) {
        const int v = static_cast<int>(frame.at(x, std::clamp(y + dy, 0, h - 1)));
        fine[v] += delta;
        coarse[v >> 4] += delta;
      }
    };
    for (int i = 0; i < kernel; ++i) add_column(xs[static_cast<std::size_t>(i)], +1);
    for (int x = 0; x < w; ++x) {
      if (x > 0) {
        add_column(xs[static_cast<std::size_t>(x - 1)], -1);
        add_column(xs[static_cast<std::size_t>(x + kernel - 1)], +1);
      }
      int seen = 0;
      int c = 0;
      while (seen + coarse[c] <= rank) seen += coarse[c++];
      int v = c << 4;
      while (seen + fine[v] <= rank) seen += fine[v++];
      out.at(x, y) = static_cast<float>(v);
    }
  }
  return out;
}

}  // namespace

Image median_filter(const Image& frame, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "median kernel must be a positive odd size");
  }
  if (frame.width() < kernel || frame.height() < kernel) {
    throw Error(ErrorCode::Dimension, "frame is smaller than the median kernel");
  }
  if (is_byte_image(frame)) return byte_median(frame, kernel);
  const int half = kernel / 2;
  const int w = frame.width();
  const int h = frame.height();
  Image out(w, h);
  std::vector<float> window(static_cast<std::size_t>(kernel) * kernel);
  const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
  std::vector<int> xs(static_cast<std::size_t>(kernel));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dx = -half; dx <= half; ++dx) xs[dx + half] = std::clamp(x + dx, 0, w - 1);
      std::size_t n = 0;
      for (int dy = -half; dy <= half; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int xx : xs) window[n++] = frame.at(xx, yy);
      }
      std::nth_element(window.begin(), mid, window.end());
      out.at(x, y) = *mid;
    }
  }
  return out;
}

double polar_angle(double y, double x) {
  if (x == 0.0 && y == 0.0) return 0.0;
  const double deg = std::atan2(y, x) * kDegPerRad;
  return deg <= -180.0 ? 180.0 : deg;
}

PolarImage::PolarImage(int r_bins, int theta_bins, double r_resolution, double theta_resolution,
                       Point origin)
    : r_bins_(r_bins),
      theta_bins_(theta_bins),
      r_resolution_(r_resolution),
      theta_resolution_(theta_resolution),
      origin_(origin),
      values_(static_cast<std::size_t>(r_bins) * static_cast<std::size_t>(theta_bins), 0.0f) {}

std::vector<double> PolarImage::column(int theta_bin) const {
  std::vector<double> out(static_cast<std::size_t>(r_bins_));
  for (int i = 0; i < r_bins_; ++i) out[static_cast<std::size_t>(i)] = at(i, theta_bin);
  return out;
}

int PolarImage::wrap_bin(int theta_bin) const {
  const int m = theta_bin % theta_bins_;
  return m < 0 ? m + theta_bins_ : m;
}

int PolarImage::nearest_bin(double theta_deg) const {
  return wrap_bin(static_cast<int>(std::lround(theta_deg / theta_resolution_)));
}

double PolarImage::sample(double r_px, double theta_deg) const {
  const double rb = std::clamp(r_px / r_resolution_, 0.0, static_cast<double>(r_bins_ - 1));
  double tb = std::fmod(theta_deg / theta_resolution_, static_cast<double>(theta_bins_));
  if (tb < 0.0) tb += theta_bins_;
  const int r0 = std::min(static_cast<int>(rb), r_bins_ - 1);
  const int r1 = std::min(r0 + 1, r_bins_ - 1);
  const int t0 = std::min(static_cast<int>(tb), theta_bins_ - 1);
  const int t1 = (t0 + 1) % theta_bins_;
  const double fr = rb - r0;
  const double ft = tb - t0;
  const double near = at(r0, t0) * (1.0 - ft) + at(r0, t1) * ft;
  const double far = at(r1, t0) * (1.0 - ft) + at(r1, t1) * ft;
  return near * (1.0 - fr) + far * fr;
}

Point PolarImage::to_cartesian(double r_px, double theta_deg) const {
  const double t = theta_deg / kDegPerRad;
  return {origin_.x + r_px * std::cos(t), origin_.y + r_px * std::sin(t)};
}

PolarImage unwrap_polar(const Image& frame, Point center, const PolarOptions& options) {
  if (!frame.contains(center.x, center.y)) {
    throw Error(ErrorCode::InvalidCenter, "polar center lies outside the frame");
  }
  if (!(options.theta_resolution_deg > 0.0) || !(options.r_resolution_px > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "polar resolutions must be positive");
  }
  const double bins_exact = 360.0 / options.theta_resolution_deg;
  const int theta_bins = static_cast<int>(std::lround(bins_exact));
  if (std::abs(bins_exact - theta_bins) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "theta resolution must divide 360 degrees");
  }
  const double r_limit = std::min({center.x, center.y, frame.width() - 1 - center.x,
                                   frame.height() - 1 - center.y});
  const int r_bins = static_cast<int>(std::floor(r_limit / options.r_resolution_px)) + 1;
  PolarImage polar(r_bins, theta_bins, options.r_resolution_px, options.theta_resolution_deg,
                   center);
  for (int k = 0; k < theta_bins; ++k) {
    const double t = k * options.theta_resolution_deg / kDegPerRad;
    const double c = std::cos(t);
    const double s = std::sin(t);
    for (int i = 0; i < r_bins; ++i) {
      const double r = i * options.r_resolution_px;
      polar.at(i, k) = static_cast<float>(frame.sample(center.x + r * c, center.y + r * s));
    }
  }
  return polar;
}

}  // namespace proid
