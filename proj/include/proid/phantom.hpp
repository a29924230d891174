#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proid/image.hpp"
#include "proid/preprocess.hpp"
#include "proid/sequence.hpp"

namespace proid {

struct DropoutSpec {
  double theta_min_deg = 0.0;  ///< angle about the cavity center, degrees
  double theta_max_deg = 0.0;
  double attenuation = 1.0;    ///< myocardium intensity multiplier in [0, 1]
};

/// Bullet-shaped LV: a half-ellipse apex cap on top of a rectangular base
/// section, with the apex towards small y. All lengths in mm and given at
/// end diastole. The cavity scales with the volume curve while the
/// epicardial apex stays put and the myocardial volume is conserved.
struct PhantomSpec {
  int width = 240;
  int height = 320;
  double pixel_spacing_mm = 0.5;
  double frame_interval_s = 1.0 / 30.0;
  int frames = 20;

  double apex_x_mm = 60.0;
  double apex_y_mm = 20.0;
  double cavity_half_width_mm = 22.0;
  double cap_length_mm = 45.0;
  double base_length_mm = 30.0;
  double wall_thickness_mm = 5.0;
  double annulus_extension_mm = 3.0;  ///< wall continues past the annulus plane

  double cavity_intensity = 40.0;
  double myocardium_intensity = 160.0;
  double background_intensity = 40.0;
  double target_cnr = 5.0;
  double noise_correlation_px = 1.5;  ///< Gaussian smoothing of the noise field

  std::optional<DropoutSpec> dropout;

  double volume_amplitude = 0.0;  ///< (V_ed - V_mean) / V_mean
  int period_frames = 20;

  std::uint64_t seed = 1;

  void validate() const;
};

/// Analytic geometry of one phantom frame.
struct PhantomFrameTruth {
  std::vector<Point> endocardium;  ///< px, mv_left -> apex -> mv_right
  std::vector<Point> epicardium;   ///< px
  double volume_ml = 0.0;          ///< analytic solid-of-revolution volume
  double epicardial_volume_ml = 0.0;
  UipFrame uips;                   ///< apex and annulus ends on the wall midline
  double scale = 1.0;              ///< cavity scale relative to frame 0
  double wall_px = 0.0;            ///< wall thickness, grows as the cavity shrinks
};

struct GroundTruth {
  std::vector<PhantomFrameTruth> frames;
  double wall_thickness_px = 0.0;
  double noise_sigma = 0.0;
  double measured_cnr = 0.0;  ///< frame 0
};

struct Phantom {
  ScanSequence sequence;
  GroundTruth truth;
};

/// Pipeline defaults for phantom runs: the tracking template shrinks to 64 px
/// to suit the small phantom frame.
PipelineParams phantom_pipeline_params();

/// Throws Error(Spec) when the geometry does not fit or the CNR is unreachable.
Phantom generate_phantom(const PhantomSpec& spec);

/// Masks of the cavity and the myocardium for one phantom frame.
Mask cavity_mask(const PhantomSpec& spec, const PhantomFrameTruth& frame);
Mask myocardium_mask(const PhantomSpec& spec, const PhantomFrameTruth& frame);

/// Displaces each frame-0 UIP by a uniform random vector inside a disk of
/// radius magnitude * wall thickness.
UipFrame perturb_uips(const GroundTruth& truth, double magnitude, std::uint64_t seed);

struct TrialRecord {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double dice_ed = 0.0;
  double dice_es = 0.0;
  double dice = 0.0;  ///< mean of ED and ES
};

struct MonteCarloResult {
  double mean_dice = 0.0;
  double std_dice = 0.0;
  std::vector<TrialRecord> trials;
  std::size_t failures = 0;
};

struct MonteCarloOptions {
  int trials = 100;
  double magnitude = 0.5;
  std::uint64_t master_seed = 2020;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  PipelineParams params = phantom_pipeline_params();
};

/// Dice of a contour polygon against the phantom endocardium on frame `k`.
double phantom_dice(const PhantomSpec& spec, const GroundTruth& truth, int k,
                    const Boundary& boundary);

/// Frames of maximum and minimum true volume.
std::pair<int, int> true_ed_es(const GroundTruth& truth);

/// Throws Error(Harness) when more than 20% of trials fail.
MonteCarloResult run_monte_carlo(const PhantomSpec& spec, const MonteCarloOptions& options);

}  // namespace proid
