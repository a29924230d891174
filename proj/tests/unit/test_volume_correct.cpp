#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "proid/error.hpp"
#include "proid/sequence.hpp"
#include "proid/volume_correct.hpp"

using namespace proid;

namespace {

BoundaryBand flat_band(std::size_t n, double inner, double outer) {
  BoundaryBand band;
  band.inner.assign(n, inner);
  band.outer.assign(n, outer);
  return band;
}

}  // namespace

TEST_CASE("outer wall is the first drop below the outer fraction") {
  const std::vector<double> p{0.60, 0.55, 0.45, 0.35};
  const auto hit = outer_hit(p, 0.67);
  CHECK(hit.index == 3);
  CHECK_FALSE(hit.capped);
  CHECK(outer_hit(std::vector<double>{0.6, 0.6, 0.6}, 0.67).capped);
}

TEST_CASE("inner wall falls back to the first minimum") {
  const std::vector<double> p{0.60, 0.40, 0.20, 0.35};
  const auto hit = inner_hit(p, 0.25);
  CHECK(hit.index == 2);
  CHECK_FALSE(hit.capped);
  CHECK(inner_hit(std::vector<double>{0.6, 0.5, 0.1, 0.3}, 0.25).index == 2);
  CHECK(inner_hit(std::vector<double>{0.6, 0.5, 0.4, 0.3}, 0.25).capped);
}

TEST_CASE("band edges follow the analytic walls on a clean phantom") {
  auto spec = fixture::ef60(100.0);
  const auto ph = generate_phantom(spec);
  const auto params = phantom_pipeline_params();
  const auto& truth = ph.truth.frames[0];
  const auto frame = prepare_frame(ph.sequence.frames[0], truth.uips, params);
  const auto seg = segment_frame(frame, frame.graph, params, 0);
  const auto band = find_band(seg.smoothed, frame.polar, params.band);
  const auto endo = resample_onto(seg.smoothed, truth.endocardium).r;
  const auto epi = resample_onto(seg.smoothed, truth.epicardium).r;
  CHECK(fixture::rms(band.inner, endo) <= 2.0);
  CHECK(fixture::rms(band.outer, epi) <= 2.0);
  CHECK_NOTHROW(band.validate());
}

TEST_CASE("wavelet filter") {
  std::vector<double> flat(40, 7.5);
  for (double v : wavelet_filter(flat)) CHECK(v == doctest::Approx(7.5));

  std::vector<double> saw(40);
  for (std::size_t i = 0; i < saw.size(); ++i) saw[i] = 50.0 + (i % 2 ? 2.0 : -2.0);
  for (double v : wavelet_filter(saw)) CHECK(std::abs(v - 50.0) < 0.5);

  std::vector<double> ramp(40);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 20.0 + 0.5 * i;
  const auto out = wavelet_filter(ramp);
  for (std::size_t i = 4; i + 4 < ramp.size(); ++i) CHECK(std::abs(out[i] - ramp[i]) <= 0.1);

  std::vector<double> tiny{1, 5, 2};
  CHECK(wavelet_filter(tiny) == tiny);
}

TEST_CASE("relative boundary position") {
  CHECK(rbp(60, 50, 70) == doctest::Approx(0.5));
  CHECK(rbp(70, 50, 70) == doctest::Approx(1.0));
  CHECK(rbp(45, 50, 70) == doctest::Approx(-0.25));
  CHECK(inverse_rbp(0.25, 50, 70) == doctest::Approx(55.0));
  CHECK_THROWS_AS(rbp(60, 50, 50), Error);
}

TEST_CASE("target schedule") {
  const std::vector<double> volumes{100, 90, 75, 60, 50, 60, 75, 90, 100, 75};
  const std::vector<double> raw(volumes.size(), 0.4);
  const std::vector<double> areas(volumes.size(), 900.0);
  const std::vector<Beat> beats{{0, 4}};
  const auto s = build_schedule(raw, volumes, beats, areas);
  CHECK(s.cmrbp_init[0] == doctest::Approx(0.47));
  CHECK(s.cmrbp_init[4] == doctest::Approx(0.27));
  CHECK(s.cmrbp_init[2] == doctest::Approx(0.37));
  for (std::size_t t = 0; t < volumes.size(); ++t) CHECK(s.cmrbp_io[t] == doctest::Approx(s.cmrbp_bv[t]));

  const std::vector<double> flat(volumes.size(), 80.0);
  try {
    build_schedule(raw, flat, beats, areas);
    FAIL("expected a flat-volume error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FlatVolume);
  }
  CHECK_THROWS_AS(build_schedule(raw, volumes, std::vector<Beat>{}, areas), Error);
}

TEST_CASE("band area scales the correction step") {
  const std::vector<double> volumes{100, 75, 50, 75, 100};
  const std::vector<double> raw(5, 0.6);
  const std::vector<double> areas{1000, 1000, 2000, 1000, 1000};
  const auto s = build_schedule(raw, volumes, std::vector<Beat>{{0, 2}}, areas);
  CHECK(s.cmrbp_io[2] == doctest::Approx(0.6 + (0.27 - 0.6) * 0.5));
}

TEST_CASE("power-six correction") {
  const auto b = fixture::circle({100, 100}, 60.0, 3, 0);
  auto band = flat_band(3, 50.0, 70.0);

  SUBCASE("already on target") {
    const auto out = apply_power6(b, band, 0.5);
    CHECK(out.r == b.r);
  }
  SUBCASE("uniform shift from 0.69 to 0.53") {
    const auto start = b.with_radii(std::vector<double>(3, inverse_rbp(0.69, 50, 70)));
    const auto out = apply_power6(start, band, 0.53);
    for (std::size_t i = 0; i < 3; ++i) CHECK(rbp(out.r[i], 50, 70) == doctest::Approx(0.53));
  }
  SUBCASE("mixed positions") {
    const std::vector<double> rbps{0.2, 0.5, 0.9};
    std::vector<double> radii;
    for (double v : rbps) radii.push_back(inverse_rbp(v, 50, 70));
    const auto start = b.with_radii(radii);
    const auto out = apply_power6(start, band, 0.4);
    CHECK(std::abs(mean_rbp(out, band) - 0.4) <= 1e-6);
    const double moved_mid = std::abs(rbp(out.r[1], 50, 70) - 0.5);
    const double moved_far = std::abs(rbp(out.r[2], 50, 70) - 0.9);
    CHECK(moved_far > moved_mid);
  }
}
