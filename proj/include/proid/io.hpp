#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "proid/image.hpp"
#include "proid/metrics.hpp"
#include "proid/phantom.hpp"
#include "proid/preprocess.hpp"
#include "proid/sequence.hpp"

namespace proid {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// Images. Reading accepts 8-bit PGM (P2/P5) and PNG; PNG colour or 16-bit
// input is reduced to 8-bit gray. Writing rounds and clips to [0, 255].
Image read_image(const fs::path& path);
void write_pgm(const fs::path& path, const Image& image);
void write_png(const fs::path& path, const Image& image);
std::string encode_png(const Image& image);

/// Frames (*.pgm, *.png) in lexicographic order plus `metadata.json`
/// holding pixel_spacing_mm and frame_interval_s.
ScanSequence load_sequence(const fs::path& dir);
void save_sequence(const fs::path& dir, const ScanSequence& sequence);

UipFrame uips_from_json(const Json& j);
Json uips_to_json(const UipFrame& uips);
/// Throws Error(Io, "uip file not found") when the file is absent.
UipFrame load_uips(const fs::path& path);

// Parameter overrides are partial documents merged over the defaults.
// Unknown keys are rejected so typos do not pass silently.
Json params_to_json(const PipelineParams& params);
PipelineParams params_from_json(const Json& overrides, const PipelineParams& base = {});
PipelineParams load_params(const fs::path& path, const PipelineParams& base = {});

Json phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(const Json& overrides);
PhantomSpec load_phantom_spec(const fs::path& path);

/// Reference contours for evaluation, one closed polygon per frame.
struct TruthSet {
  int width = 0;
  int height = 0;
  double pixel_spacing_mm = 1.0;
  std::vector<std::vector<Point>> contours;
  std::vector<double> volumes_ml;
};

Json truth_to_json(const TruthSet& truth);
TruthSet truth_from_json(const Json& j);
TruthSet load_truth(const fs::path& path);
TruthSet truth_from_phantom(const PhantomSpec& spec, const GroundTruth& truth);

/// Everything the result endpoints and the writers need, as JSON.
Json result_to_json(const SegmentationResult& result, double pixel_spacing_mm);

struct ManifestInfo {
  std::string command;
  fs::path scan_dir;
  fs::path uip_file;
  std::uint64_t seed = 0;
};

/// Writes boundaries/frame_NNNN.csv, volume.csv, metrics.json and
/// manifest.json under `out_dir`.
void write_result(const fs::path& out_dir, const SegmentationResult& result,
                  double pixel_spacing_mm, const ManifestInfo& manifest);

/// A result directory read back for evaluation.
struct StoredResult {
  std::vector<std::vector<Point>> contours;
  std::vector<double> volumes_ml;
  std::vector<Beat> beats;
};
StoredResult load_result(const fs::path& out_dir);

struct Evaluation {
  std::vector<double> dice;
  std::vector<double> volume_ml;
  std::vector<double> true_volume_ml;
  struct BeatDelta {
    Beat beat;
    double edv = 0.0, esv = 0.0, ef = 0.0;
    double true_edv = 0.0, true_esv = 0.0, true_ef = 0.0;
  };
  std::vector<BeatDelta> beats;
  std::optional<BlandAltman> volume_agreement;
};

/// Throws Error(Dimension) when the frame counts differ.
Evaluation evaluate(const StoredResult& result, const TruthSet& truth);
Json evaluation_to_json(const Evaluation& evaluation);
std::string evaluation_csv(const Evaluation& evaluation);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace proid
