#pragma once

#include <span>
#include <utility>
#include <vector>

#include "proid/boundary.hpp"
#include "proid/preprocess.hpp"

namespace proid {

/// Inner and outer wall estimates sampled on the boundary's bins.
struct BoundaryBand {
  std::vector<double> inner;  ///< px
  std::vector<double> outer;  ///< px
  std::vector<bool> inner_capped;
  std::vector<bool> outer_capped;
  double band_area = 0.0;  ///< px^2 between inner and outer

  void validate() const;
};

struct BandOptions {
  double outer_fraction = 0.67;
  double inner_fraction = 0.25;
  double step_px = 1.0;
};

/// Result of the threshold/minimum search along one perpendicular profile.
struct ProfileHit {
  std::size_t index = 0;
  bool capped = false;
};

/// `profile[0]` is the boundary sample. First index whose value drops below
/// fraction * profile[0]; capped at the last index when never reached.
ProfileHit outer_hit(std::span<const double> profile, double fraction);
/// First drop below fraction * profile[0]. Only a local minimum reached
/// before that drop can stand in for it, so when the drop never happens the
/// first local minimum is used.
ProfileHit inner_hit(std::span<const double> profile, double fraction);

BoundaryBand find_band(const Boundary& boundary, const PolarImage& polar,
                       const BandOptions& options = {});

/// Area between two radius curves sharing the boundary's bins.
double band_area(const Boundary& geometry, std::span<const double> inner,
                 std::span<const double> outer);

/// Single-level Daubechies-4 analysis with zeroed details, then synthesis.
/// Sequences shorter than 8 samples are returned unchanged.
std::vector<double> wavelet_filter(std::span<const double> samples);

double rbp(double r_boundary, double r_inner, double r_outer);
double inverse_rbp(double rbp_value, double r_inner, double r_outer);
double mean_rbp(const Boundary& boundary, const BoundaryBand& band);

/// Beat as (end-diastolic frame, end-systolic frame).
using Beat = std::pair<int, int>;

struct ScheduleAnchors {
  double ed = 0.47;
  double es = 0.27;
};

struct MRBPSchedule {
  std::vector<double> raw;
  std::vector<double> cmrbp_init;
  std::vector<double> cmrbp_bv;
  std::vector<double> cmrbp_io;
  double ed_anchor = 0.47;
  double es_anchor = 0.27;
};

/// Builds the per-frame cMRBP targets. Throws Error(FlatVolume) when the
/// average diastolic and systolic volumes coincide, Error(InvalidArgument)
/// without beats or on size mismatch.
MRBPSchedule build_schedule(std::span<const double> raw_mrbp,
                            std::span<const double> raw_volumes, std::span<const Beat> beats,
                            std::span<const double> band_areas,
                            const ScheduleAnchors& anchors = {});

struct Power6Options {
  /// Weight added to every sample before the power-six deviation term. With
  /// zero the whole shift concentrates on the farthest samples.
  double base_weight = 1.0;
};

/// Moves samples in RBP space so the mean RBP hits `target`, with the samples
/// farthest from the target moving most.
Boundary apply_power6(const Boundary& boundary, const BoundaryBand& band, double target,
                      const Power6Options& options = {});

}  // namespace proid
