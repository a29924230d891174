#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "proid/boundary.hpp"
#include "proid/phantom.hpp"

namespace fixture {

inline constexpr double kPi = std::numbers::pi;

/// Circle of radius r about origin as a contour spanning `span` bins.
inline proid::Boundary circle(proid::Point origin, double r, int span = 300, int start_bin = 120) {
  proid::Boundary b;
  b.origin = origin;
  b.start_bin = start_bin;
  b.direction = 1;
  b.apex_index = span / 2;
  b.r.assign(static_cast<std::size_t>(span), r);
  return b;
}

/// Closed polygon tracing a circle, starting and ending next to the bottom
/// point so the annulus gap is a single short chord.
inline std::vector<proid::Point> circle_polygon(proid::Point c, double r, int n = 720) {
  std::vector<proid::Point> pts;
  for (int i = 0; i < n; ++i) {
    const double t = kPi / 2 + 2 * kPi * (i + 0.5) / n;
    pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
  }
  return pts;
}

/// The 60% ejection-fraction phantom used by the pipeline-level tests.
inline proid::PhantomSpec ef60(double cnr = 5.0) {
  proid::PhantomSpec spec;
  spec.volume_amplitude = 3.0 / 7.0;
  spec.target_cnr = cnr;
  return spec;
}

inline double rms(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("proid-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
