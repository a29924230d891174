#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "proid/error.hpp"
#include "proid/metrics.hpp"
#include "proid/phantom.hpp"
#include "proid/sequence.hpp"

using namespace proid;

namespace {

Image texture(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  Image coarse(w / 4 + 2, h / 4 + 2);
  for (float& v : coarse.pixels()) v = u(rng);
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>(coarse.sample(x / 4.0, y / 4.0));
  return img;
}

Image shifted(const Image& src, int dx, int dy) {
  Image out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      out.at(x, y) = src.at(std::clamp(x - dx, 0, src.width() - 1), std::clamp(y - dy, 0, src.height() - 1));
  return out;
}

ScanSequence repeat(const Image& frame, int n) {
  ScanSequence s;
  s.frames.assign(static_cast<std::size_t>(n), frame);
  return s;
}

const Phantom& clean_phantom() {
  static const Phantom ph = generate_phantom(fixture::ef60(5.0));
  return ph;
}

}  // namespace

TEST_CASE("static sequences keep their UIPs") {
  const UipFrame u{{80, 40}, {50, 120}, {110, 120}};
  const auto report = track_uips(repeat(texture(160, 160, 1), 4), u, {64, 12, 0.2, 2});
  for (const auto& f : report.uips.frames) CHECK(f == u);
  CHECK(report.lost_points.empty());
}

TEST_CASE("a translated frame moves every UIP by the translation") {
  const Image f0 = texture(200, 200, 2);
  ScanSequence s;
  s.frames = {f0, shifted(f0, 5, 3)};
  const UipFrame u{{100, 50}, {60, 140}, {140, 140}};
  const auto report = track_uips(s, u, {64, 12, 0.2, 2});
  const auto& moved = report.uips.frames[1];
  for (auto [a, b] : {std::pair{u.apex, moved.apex}, {u.mv_left, moved.mv_left}, {u.mv_right, moved.mv_right}}) {
    CHECK(b.x == a.x + 5);
    CHECK(b.y == a.y + 3);
  }
}

TEST_CASE("points near the border track with a clipped window") {
  const Image f0 = texture(120, 120, 3);
  ScanSequence s;
  s.frames = {f0, shifted(f0, 2, 0)};
  const UipFrame u{{10, 10}, {10, 100}, {100, 60}};
  const auto report = track_uips(s, u, {64, 12, 0.2, 2});
  CHECK(report.uips.frames[1].apex.x == 12);
  CHECK(report.uips.frames[1].apex.y == 10);
}

TEST_CASE("expected boundary from UIP motion") {
  const Point c{100, 100};
  auto on = [&](double r, double deg) {
    const double t = deg * fixture::kPi / 180.0;
    return Point{c.x + r * std::cos(t), c.y + r * std::sin(t)};
  };
  const double R = 30.0;
  const UipFrame prev{on(R, 270), on(R, 30), on(R, 150)};
  const auto previous = fixture::circle(c, 45.0);

  CHECK(expected_boundary(previous, prev, prev).r == previous.r);

  const UipFrame grown{on(R + 4, 270), on(R + 4, 30), on(R + 4, 150)};
  for (double r : expected_boundary(previous, prev, grown).r) CHECK(r == doctest::Approx(49.0));

  // Apex and mv_left move out by 3 px, mv_right stays at R, centroid fixed.
  const double half = std::acos(R / (2.0 * (R + 3.0))) * 180.0 / fixture::kPi;
  const UipFrame mixed{on(R + 3, 90 - half), on(R + 3, 90 + half), on(R, 270)};
  REQUIRE(mixed.center().x == doctest::Approx(c.x));
  REQUIRE(mixed.center().y == doctest::Approx(c.y));
  for (double r : expected_boundary(previous, prev, mixed).r) CHECK(r == doctest::Approx(47.0));
}

TEST_CASE("beat detection") {
  std::vector<double> v;
  for (int t = 0; t < 40; ++t) v.push_back(100 + 20 * std::cos(2 * fixture::kPi * t / 20.0));
  const auto beats = detect_beats(v);
  REQUIRE(beats.size() == 2);
  CHECK(std::abs(beats[0].first - 0) <= 1);
  CHECK(std::abs(beats[0].second - 10) <= 1);
  CHECK(std::abs(beats[1].first - 20) <= 1);
  CHECK(std::abs(beats[1].second - 30) <= 1);

  std::vector<double> ramp;
  for (int t = 0; t < 30; ++t) ramp.push_back(50 + t);
  CHECK(detect_beats(ramp).empty());

  std::mt19937 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto noisy = v;
  for (double& x : noisy) x += noise(rng);
  CHECK(detect_beats(noisy) == beats);

  CHECK_THROWS_AS(detect_beats(std::vector<double>{1, 2}), Error);
}

TEST_CASE("start selection on identical frames picks frame zero") {
  const auto& ph = clean_phantom();
  const auto params = phantom_pipeline_params();
  ScanSequence s = repeat(ph.sequence.frames[0], 6);
  UipSet uips{std::vector<UipFrame>(6, ph.truth.frames[0].uips)};
  const auto sel = select_start_frame(s, uips, params);
  CHECK(sel.frame == 0);
  CHECK(sel.candidates.size() == 5);

  ScanSequence three = repeat(ph.sequence.frames[0], 3);
  UipSet three_uips{std::vector<UipFrame>(3, ph.truth.frames[0].uips)};
  CHECK(select_start_frame(three, three_uips, params).candidates.size() == 3);
}

TEST_CASE("a candidate with a dropout sector is not selected") {
  auto spec = fixture::ef60(5.0);
  spec.volume_amplitude = 0.0;
  const auto ph = generate_phantom(spec);
  const auto& truth = ph.truth.frames[2];
  const Mask myo = myocardium_mask(spec, truth);
  const Point c = truth.uips.center();
  ScanSequence s;
  for (int t = 0; t < 5; ++t) s.frames.push_back(ph.sequence.frames[static_cast<std::size_t>(t)]);
  Image& corrupt = s.frames[2];
  for (int y = 0; y < corrupt.height(); ++y) {
    for (int x = 0; x < corrupt.width(); ++x) {
      const double theta = polar_angle(y - c.y, x - c.x);
      if (myo.at(x, y) && theta > -150.0 && theta < -30.0) corrupt.at(x, y) *= 0.25f;
    }
  }
  UipSet uips{std::vector<UipFrame>(5, truth.uips)};
  const auto sel = select_start_frame(s, uips, phantom_pipeline_params());
  CHECK(sel.frame != 2);
  REQUIRE(sel.deviation.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    if (i != 2) CHECK(sel.deviation[2] > sel.deviation[i]);
  }
}

TEST_CASE("a single frame gives volumes but no beats") {
  const auto& ph = clean_phantom();
  ScanSequence s = repeat(ph.sequence.frames[0], 1);
  s.pixel_spacing_mm = ph.sequence.pixel_spacing_mm;
  const auto r = segment_sequence(s, ph.truth.frames[0].uips, phantom_pipeline_params());
  CHECK(r.boundaries.size() == 1);
  CHECK(r.volume_curve.size() == 1);
  CHECK(r.volume_curve[0] > 0.0);
  CHECK(r.beats.empty());
  CHECK(r.ef.empty());
}

TEST_CASE("a large initialized change triggers the uninitialized rerun") {
  const auto& ph = clean_phantom();
  const auto params = phantom_pipeline_params();
  const auto& uips = ph.truth.frames[0].uips;
  const auto frame = prepare_frame(ph.sequence.frames[0], uips, params);
  const auto own = segment_frame(frame, frame.graph, params, 0).smoothed;

  const auto same = segment_initialized(frame, own, uips, params, 0);
  CHECK_FALSE(same.rerun);

  auto wider = own;
  for (double& r : wider.r) r /= 0.85;
  const auto shrunk = segment_initialized(frame, wider, uips, params, 0);
  CHECK(shrunk.relative_change > params.rerun_threshold);
  CHECK(shrunk.rerun);
}

TEST_CASE("restricting to a window around the truth changes little") {
  const auto& ph = clean_phantom();
  const auto params = phantom_pipeline_params();
  const auto& truth = ph.truth.frames[0];
  const auto frame = prepare_frame(ph.sequence.frames[0], truth.uips, params);
  const auto free_run = segment_frame(frame, frame.graph, params, 0).smoothed;
  const auto expected = resample_onto(free_run, truth.endocardium);
  const auto window = restrict_to_window(frame.graph, expected, params.window_tolerance);
  const auto limited = segment_frame(frame, window, params, 0).smoothed;
  CHECK(mean_abs_difference(limited, free_run) <= 1.0);
}

TEST_CASE("clean phantom sequence reaches Dice 0.90 on every frame") {
  const auto& ph = clean_phantom();
  const auto spec = fixture::ef60(5.0);
  const auto r = segment_sequence(ph.sequence, ph.truth.frames[0].uips, phantom_pipeline_params());
  REQUIRE(r.boundaries.size() == ph.sequence.size());
  for (std::size_t t = 0; t < r.boundaries.size(); ++t) {
    CAPTURE(t);
    CHECK(phantom_dice(spec, ph.truth, static_cast<int>(t), r.boundaries[t]) >= 0.90);
  }
  REQUIRE(r.ef.size() == 1);
  CHECK(std::abs(r.ef[0] - 60.0) <= 5.0);
}

TEST_CASE("pure noise cannot be segmented") {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> byte(0, 255);
  ScanSequence s;
  for (int t = 0; t < 4; ++t) {
    Image img(160, 200);
    for (float& v : img.pixels()) v = static_cast<float>(byte(rng));
    s.frames.push_back(img);
  }
  CHECK_THROWS_AS(segment_sequence(s, {{80, 30}, {40, 170}, {120, 170}}), Error);
}
