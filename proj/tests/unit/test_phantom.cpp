#include <doctest.h>

#include "fixtures.hpp"
#include "proid/error.hpp"
#include "proid/metrics.hpp"
#include "proid/phantom.hpp"

using namespace proid;

TEST_CASE("measured CNR matches the target") {
  for (double target : {3.0, 5.0}) {
    PhantomSpec spec;
    spec.target_cnr = target;
    const auto ph = generate_phantom(spec);
    CAPTURE(target);
    CHECK(ph.truth.measured_cnr >= target - 0.2);
    CHECK(ph.truth.measured_cnr <= target + 0.2);
    const auto& f = ph.truth.frames[0];
    const double independent =
        cnr(ph.sequence.frames[0], cavity_mask(spec, f), myocardium_mask(spec, f));
    CHECK(independent == doctest::Approx(ph.truth.measured_cnr).epsilon(1e-9));
  }
}

TEST_CASE("zero amplitude keeps the geometry static") {
  PhantomSpec spec;
  spec.volume_amplitude = 0.0;
  const auto ph = generate_phantom(spec);
  for (const auto& f : ph.truth.frames) CHECK(f.volume_ml == ph.truth.frames[0].volume_ml);
}

TEST_CASE("volume curve follows the requested ejection fraction") {
  const auto spec = fixture::ef60();
  const auto ph = generate_phantom(spec);
  const auto [ed, es] = true_ed_es(ph.truth);
  const double ef = ejection_fraction(ph.truth.frames[static_cast<std::size_t>(ed)].volume_ml,
                                      ph.truth.frames[static_cast<std::size_t>(es)].volume_ml);
  CHECK(ef == doctest::Approx(60.0).epsilon(1e-3));
  for (const auto& f : ph.truth.frames) CHECK(f.epicardial_volume_ml > f.volume_ml);
}

TEST_CASE("myocardial volume is conserved across the cycle") {
  const auto ph = generate_phantom(fixture::ef60());
  const auto& f0 = ph.truth.frames[0];
  for (const auto& f : ph.truth.frames) {
    CHECK(f.epicardial_volume_ml - f.volume_ml ==
          doctest::Approx(f0.epicardial_volume_ml - f0.volume_ml).epsilon(1e-3));
  }
}

TEST_CASE("same seed gives identical sequences") {
  PhantomSpec spec;
  spec.seed = 77;
  const auto a = generate_phantom(spec);
  const auto b = generate_phantom(spec);
  for (std::size_t t = 0; t < a.sequence.size(); ++t) CHECK(a.sequence.frames[t] == b.sequence.frames[t]);
  spec.seed = 78;
  CHECK_FALSE(generate_phantom(spec).sequence.frames[0] == a.sequence.frames[0]);
}

TEST_CASE("UIP perturbation") {
  const auto ph = generate_phantom(PhantomSpec{});
  const auto& truth = ph.truth.frames[0].uips;
  CHECK(perturb_uips(ph.truth, 0.0, 5) == truth);
  CHECK(perturb_uips(ph.truth, 0.5, 5) == perturb_uips(ph.truth, 0.5, 5));
  CHECK_FALSE(perturb_uips(ph.truth, 0.5, 5) == perturb_uips(ph.truth, 0.5, 6));
  const double band = ph.truth.wall_thickness_px;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto p = perturb_uips(ph.truth, 1.0, seed);
    REQUIRE(distance(p.apex, truth.apex) <= band);
    REQUIRE(distance(p.mv_left, truth.mv_left) <= band);
    REQUIRE(distance(p.mv_right, truth.mv_right) <= band);
  }
}

TEST_CASE("spec validation") {
  PhantomSpec spec;
  spec.cavity_half_width_mm = 200.0;
  CHECK_THROWS_AS(generate_phantom(spec), Error);
  PhantomSpec flat;
  flat.myocardium_intensity = flat.cavity_intensity;
  CHECK_THROWS_AS(generate_phantom(flat), Error);
}

TEST_CASE("a single Monte-Carlo trial reports zero spread") {
  MonteCarloOptions opt;
  opt.trials = 1;
  const auto mc = run_monte_carlo(fixture::ef60(5.0), opt);
  CHECK(mc.trials.size() == 1);
  CHECK(mc.std_dice == 0.0);
  CHECK(mc.mean_dice == mc.trials[0].dice);
}
