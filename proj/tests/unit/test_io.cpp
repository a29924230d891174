#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "proid/error.hpp"
#include "proid/io.hpp"

using namespace proid;

namespace {

Image gradient(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>((3 * x + 7 * y) % 256);
  return img;
}

}  // namespace

TEST_CASE("PGM and PNG round trips") {
  fixture::TempDir dir;
  const Image img = gradient(23, 17);
  write_pgm(dir / "a.pgm", img);
  write_png(dir / "a.png", img);
  CHECK(read_image(dir / "a.pgm") == img);
  CHECK(read_image(dir / "a.png") == img);
  const std::string png = encode_png(img);
  CHECK(png.substr(1, 3) == "PNG");
}

TEST_CASE("ASCII PGM is accepted") {
  fixture::TempDir dir;
  std::ofstream(dir / "p2.pgm") << "P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n";
  const Image img = read_image(dir / "p2.pgm");
  REQUIRE(img.width() == 3);
  CHECK(img.at(2, 1) == 255.0f);
  CHECK(img.at(1, 0) == 10.0f);
}

TEST_CASE("unreadable images raise IO errors") {
  fixture::TempDir dir;
  std::ofstream(dir / "bad.pgm") << "P7\n";
  CHECK_THROWS_AS(read_image(dir / "bad.pgm"), Error);
  CHECK_THROWS_AS(read_image(dir / "missing.png"), Error);
}

TEST_CASE("sequence directories round trip") {
  fixture::TempDir dir;
  ScanSequence s;
  s.pixel_spacing_mm = 0.4;
  s.frame_interval_s = 0.02;
  for (int t = 0; t < 3; ++t) {
    Image img = gradient(20, 10);
    img.at(0, 0) = static_cast<float>(t);
    s.frames.push_back(img);
  }
  save_sequence(dir / "scan", s);
  const auto back = load_sequence(dir / "scan");
  CHECK(back.pixel_spacing_mm == 0.4);
  CHECK(back.frame_interval_s == 0.02);
  REQUIRE(back.size() == 3);
  for (int t = 0; t < 3; ++t) CHECK(back.frames[static_cast<std::size_t>(t)] == s.frames[static_cast<std::size_t>(t)]);
}

TEST_CASE("UIP files") {
  fixture::TempDir dir;
  const UipFrame u{{10.5, 3}, {2, 40}, {30, 41}};
  CHECK(uips_from_json(uips_to_json(u)) == u);
  try {
    load_uips(dir / "nope.json");
    FAIL("expected an IO error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("uip file not found") != std::string::npos);
  }
  CHECK_THROWS_AS(uips_from_json(Json{{"apex", {1, 2}}}), Error);
}

TEST_CASE("parameter overrides merge over the defaults") {
  const auto p = params_from_json(Json{{"tracking", {{"window", 64}}}, {"median_kernel", 7}});
  CHECK(p.tracking.window == 64);
  CHECK(p.tracking.search_radius == PipelineParams{}.tracking.search_radius);
  CHECK(p.median_kernel == 7);
  CHECK(p.cost.alpha == 15.0);
  CHECK(params_from_json(params_to_json(p)).tracking.window == 64);
  CHECK_THROWS_AS(params_from_json(Json{{"medain_kernel", 7}}), Error);
  CHECK_THROWS_AS(params_from_json(Json{{"cost", {{"alpah", 1}}}}), Error);
  CHECK_THROWS_AS(params_from_json(Json{{"median_kernel", 4}}), Error);
}

TEST_CASE("phantom specs round trip") {
  PhantomSpec spec;
  spec.target_cnr = 3.5;
  spec.dropout = DropoutSpec{10, 40, 0.5};
  const auto back = phantom_spec_from_json(phantom_spec_to_json(spec));
  CHECK(back.target_cnr == 3.5);
  REQUIRE(back.dropout);
  CHECK(back.dropout->theta_max_deg == 40);
  CHECK_THROWS_AS(phantom_spec_from_json(Json{{"cnr", 3}}), Error);
}

TEST_CASE("results written to disk evaluate against their own truth") {
  fixture::TempDir dir;
  const auto spec = fixture::ef60(5.0);
  const auto ph = generate_phantom(spec);
  const auto r = segment_sequence(ph.sequence, ph.truth.frames[0].uips, phantom_pipeline_params());
  write_result(dir / "out", r, spec.pixel_spacing_mm, {"segment", "scan", "uips.json", 3});
  for (const char* f : {"volume.csv", "metrics.json", "manifest.json", "boundaries/frame_0000.csv"}) {
    CHECK(std::filesystem::exists(dir / "out" / f));
  }
  const auto manifest = Json::parse(read_text(dir.path() / "out" / "manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["params"]["tracking"]["window"] == 64);

  const auto stored = load_result(dir / "out");
  REQUIRE(stored.contours.size() == ph.sequence.size());
  CHECK(stored.beats == r.beats);

  TruthSet self;
  self.width = spec.width;
  self.height = spec.height;
  self.pixel_spacing_mm = spec.pixel_spacing_mm;
  self.contours = stored.contours;
  self.volumes_ml = stored.volumes_ml;
  for (double d : evaluate(stored, self).dice) CHECK(d == 1.0);

  TruthSet truth = truth_from_phantom(spec, ph.truth);
  const auto back = truth_from_json(truth_to_json(truth));
  CHECK(back.contours.size() == truth.contours.size());
  const auto eval = evaluate(stored, back);
  for (double d : eval.dice) CHECK(d >= 0.9);
  REQUIRE(eval.beats.size() == 1);
  CHECK(eval.beats[0].true_ef == doctest::Approx(60.0).epsilon(1e-2));
  CHECK(eval.volume_agreement.has_value());

  TruthSet shifted = self;
  for (std::size_t k = 0; k < shifted.contours.size(); ++k) {
    const Point c = r.uips.frames[k].center();
    for (Point& p : shifted.contours[k]) {
      const Point d = p - c;
      const double len = std::hypot(d.x, d.y);
      p = p + (5.0 / len) * d;
    }
  }
  for (double d : evaluate(stored, shifted).dice) CHECK(d < 1.0);

  truth.contours.pop_back();
  truth.volumes_ml.pop_back();
  CHECK_THROWS_AS(evaluate(stored, truth), Error);
}
