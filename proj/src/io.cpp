#include "proid/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "proid/error.hpp"

namespace proid {

// Option structs map one-to-one onto JSON objects.
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PolarOptions, theta_resolution_deg, r_resolution_px)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NodeGraphOptions, radial_cap_factor, prune_factor)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CostParams, alpha, beta, gamma, angle_factor, dl_set,
                                   anchor_tolerance_px, anchor_search_bins)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FusionOptions, center_spacing, shape_factor, ridge,
                                   fallback_halfwidth)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SmoothOptions, peak_threshold_deg, segment_fraction, offsets,
                                   offset_span, passes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BandOptions, outer_fraction, inner_fraction, step_px)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScheduleAnchors, ed, es)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Power6Options, base_weight)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrackingOptions, window, search_radius, min_correlation,
                                   sample_stride)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PipelineParams, median_kernel, polar, nodes, cost, fusion,
                                   smoothing, band, anchors, power6, tracking, window_tolerance,
                                   rerun_threshold, start_candidates, temporal_window,
                                   beat_smoothing, canonical_half_samples, volume_correction)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DropoutSpec, theta_min_deg, theta_max_deg, attenuation)

namespace {

int to_byte(float v) { return std::clamp(static_cast<int>(std::lround(v)), 0, 255); }

Image read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  auto token = [&]() {
    std::string t;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(static_cast<char>(c));
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P2") throw Error(ErrorCode::Io, path.string() + " is not a gray PGM");
  int w = 0;
  int h = 0;
  int maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "malformed PGM header in " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::Io, "unsupported PGM (8-bit gray only): " + path.string());
  }
  Image img(w, h);
  if (magic == "P5") {
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
      throw Error(ErrorCode::Io, "truncated PGM " + path.string());
    }
    for (std::size_t i = 0; i < buf.size(); ++i) img.pixels()[i] = buf[i];
  } else {
    for (float& v : img.pixels()) {
      const std::string t = token();
      if (t.empty()) throw Error(ErrorCode::Io, "truncated PGM " + path.string());
      v = static_cast<float>(std::stoi(t));
    }
  }
  if (maxval != 255) {
    for (float& v : img.pixels()) v = std::round(v * 255.0f / static_cast<float>(maxval));
  }
  return img;
}

Image read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::Io, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::Io, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  Image img(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < buf.size(); ++i) img.pixels()[i] = buf[i];
  return img;
}

std::vector<unsigned char> to_bytes(const Image& image) {
  std::vector<unsigned char> bytes(image.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(to_byte(image.pixels()[i]));
  }
  return bytes;
}

png_image png_header(const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_GRAY;
  return png;
}

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }

Point point_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::InvalidUip, std::string(what) + " must be an [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

// Every key of `overrides` must exist in `defaults`; nested objects recurse.
void check_keys(const Json& defaults, const Json& overrides, const std::string& where) {
  if (!overrides.is_object()) {
    throw Error(ErrorCode::InvalidArgument, where.empty() ? "overrides must be a JSON object"
                                                          : where + " must be an object");
  }
  for (const auto& [key, value] : overrides.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw Error(ErrorCode::InvalidArgument, "unknown parameter " + path);
    if (defaults[key].is_object()) check_keys(defaults[key], value, path);
  }
}

Json parse_json(const std::string& text, const fs::path& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Io, "invalid JSON in " + source.string() + ": " + e.what());
  }
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<Point> polyline_from(const Json& j) {
  std::vector<Point> pts;
  for (const auto& p : j) pts.push_back(point_from(p, "contour vertex"));
  return pts;
}

}  // namespace

Image read_image(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "file not found: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw Error(ErrorCode::Io, "unsupported image type: " + path.string());
}

void write_pgm(const fs::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  const auto bytes = to_bytes(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_png(const fs::path& path, const Image& image) {
  write_text(path, encode_png(image));
}

std::string encode_png(const Image& image) {
  if (image.empty()) throw Error(ErrorCode::InvalidArgument, "cannot encode an empty image");
  const auto bytes = to_bytes(image);
  png_image png = png_header(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG encoding failed: ") + png.message);
  }
  std::string out(size, '\0');
  png = png_header(image);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("PNG encoding failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

ScanSequence load_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "scan directory not found: " + dir.string());
  const fs::path meta_path = dir / "metadata.json";
  if (!fs::exists(meta_path)) throw Error(ErrorCode::Io, "metadata.json not found in " + dir.string());
  const Json meta = parse_json(read_text(meta_path), meta_path);

  ScanSequence seq;
  try {
    seq.pixel_spacing_mm = meta.at("pixel_spacing_mm").get<double>();
    seq.frame_interval_s = meta.at("frame_interval_s").get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, "metadata.json: " + std::string(e.what()));
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_extension(entry.path());
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw Error(ErrorCode::Io, "no PGM or PNG frames in " + dir.string());
  for (const auto& f : files) seq.frames.push_back(read_image(f));
  seq.validate();
  return seq;
}

void save_sequence(const fs::path& dir, const ScanSequence& sequence) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.pgm", k);
    write_pgm(dir / name, sequence.frames[k]);
  }
  const Json meta{{"pixel_spacing_mm", sequence.pixel_spacing_mm},
                  {"frame_interval_s", sequence.frame_interval_s}};
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

UipFrame uips_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidUip, "UIPs must be a JSON object");
  UipFrame u;
  for (const char* key : {"apex", "mv_left", "mv_right"}) {
    if (!j.contains(key)) throw Error(ErrorCode::InvalidUip, std::string("missing UIP ") + key);
  }
  u.apex = point_from(j["apex"], "apex");
  u.mv_left = point_from(j["mv_left"], "mv_left");
  u.mv_right = point_from(j["mv_right"], "mv_right");
  validate_uips(u);
  return u;
}

Json uips_to_json(const UipFrame& uips) {
  return {{"apex", point_json(uips.apex)},
          {"mv_left", point_json(uips.mv_left)},
          {"mv_right", point_json(uips.mv_right)}};
}

UipFrame load_uips(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "uip file not found: " + path.string());
  return uips_from_json(parse_json(read_text(path), path));
}

Json params_to_json(const PipelineParams& params) { return params; }

PipelineParams params_from_json(const Json& overrides, const PipelineParams& base) {
  Json merged = params_to_json(base);
  if (!overrides.is_null()) {
    check_keys(merged, overrides, "");
    merged.merge_patch(overrides);
  }
  PipelineParams p;
  try {
    p = merged.get<PipelineParams>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad parameter value: ") + e.what());
  }
  p.validate();
  return p;
}

PipelineParams load_params(const fs::path& path, const PipelineParams& base) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "params file not found: " + path.string());
  return params_from_json(parse_json(read_text(path), path), base);
}

Json phantom_spec_to_json(const PhantomSpec& s) {
  Json j{{"width", s.width},
         {"height", s.height},
         {"pixel_spacing_mm", s.pixel_spacing_mm},
         {"frame_interval_s", s.frame_interval_s},
         {"frames", s.frames},
         {"apex_x_mm", s.apex_x_mm},
         {"apex_y_mm", s.apex_y_mm},
         {"cavity_half_width_mm", s.cavity_half_width_mm},
         {"cap_length_mm", s.cap_length_mm},
         {"base_length_mm", s.base_length_mm},
         {"wall_thickness_mm", s.wall_thickness_mm},
         {"annulus_extension_mm", s.annulus_extension_mm},
         {"cavity_intensity", s.cavity_intensity},
         {"myocardium_intensity", s.myocardium_intensity},
         {"background_intensity", s.background_intensity},
         {"target_cnr", s.target_cnr},
         {"noise_correlation_px", s.noise_correlation_px},
         {"volume_amplitude", s.volume_amplitude},
         {"period_frames", s.period_frames},
         {"seed", s.seed}};
  j["dropout"] = s.dropout ? Json(*s.dropout) : Json(nullptr);
  return j;
}

PhantomSpec phantom_spec_from_json(const Json& overrides) {
  Json merged = phantom_spec_to_json(PhantomSpec{});
  if (!overrides.is_null()) {
    check_keys(merged, overrides, "");
    if (overrides.contains("dropout") && overrides["dropout"].is_object()) {
      check_keys(Json(DropoutSpec{}), overrides["dropout"], "dropout");
      Json dropout = Json(DropoutSpec{});
      dropout.merge_patch(overrides["dropout"]);
      Json rest = overrides;
      rest.erase("dropout");
      merged.merge_patch(rest);
      merged["dropout"] = dropout;
    } else {
      merged.merge_patch(overrides);
    }
  }
  PhantomSpec s;
  try {
    s.width = merged.at("width").get<int>();
    s.height = merged.at("height").get<int>();
    s.pixel_spacing_mm = merged.at("pixel_spacing_mm").get<double>();
    s.frame_interval_s = merged.at("frame_interval_s").get<double>();
    s.frames = merged.at("frames").get<int>();
    s.apex_x_mm = merged.at("apex_x_mm").get<double>();
    s.apex_y_mm = merged.at("apex_y_mm").get<double>();
    s.cavity_half_width_mm = merged.at("cavity_half_width_mm").get<double>();
    s.cap_length_mm = merged.at("cap_length_mm").get<double>();
    s.base_length_mm = merged.at("base_length_mm").get<double>();
    s.wall_thickness_mm = merged.at("wall_thickness_mm").get<double>();
    s.annulus_extension_mm = merged.at("annulus_extension_mm").get<double>();
    s.cavity_intensity = merged.at("cavity_intensity").get<double>();
    s.myocardium_intensity = merged.at("myocardium_intensity").get<double>();
    s.background_intensity = merged.at("background_intensity").get<double>();
    s.target_cnr = merged.at("target_cnr").get<double>();
    s.noise_correlation_px = merged.at("noise_correlation_px").get<double>();
    s.volume_amplitude = merged.at("volume_amplitude").get<double>();
    s.period_frames = merged.at("period_frames").get<int>();
    s.seed = merged.at("seed").get<std::uint64_t>();
    if (!merged.at("dropout").is_null()) s.dropout = merged["dropout"].get<DropoutSpec>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Spec, std::string("bad phantom spec value: ") + e.what());
  }
  s.validate();
  return s;
}

PhantomSpec load_phantom_spec(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "phantom spec not found: " + path.string());
  return phantom_spec_from_json(parse_json(read_text(path), path));
}

Json truth_to_json(const TruthSet& truth) {
  Json frames = Json::array();
  for (std::size_t k = 0; k < truth.contours.size(); ++k) {
    Json contour = Json::array();
    for (const Point& p : truth.contours[k]) contour.push_back(point_json(p));
    Json f{{"endocardium", contour}};
    if (k < truth.volumes_ml.size()) f["volume_ml"] = truth.volumes_ml[k];
    frames.push_back(f);
  }
  return {{"width", truth.width},
          {"height", truth.height},
          {"pixel_spacing_mm", truth.pixel_spacing_mm},
          {"frames", frames}};
}

TruthSet truth_from_json(const Json& j) {
  TruthSet t;
  try {
    t.width = j.at("width").get<int>();
    t.height = j.at("height").get<int>();
    t.pixel_spacing_mm = j.at("pixel_spacing_mm").get<double>();
    for (const auto& f : j.at("frames")) {
      t.contours.push_back(polyline_from(f.at("endocardium")));
      const double v = f.contains("volume_ml")
                           ? f["volume_ml"].get<double>()
                           : contour_volume(t.contours.back(), t.contours.back().front(),
                                            t.contours.back().back(), t.pixel_spacing_mm);
      t.volumes_ml.push_back(v);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed truth file: ") + e.what());
  }
  if (t.width <= 0 || t.height <= 0) throw Error(ErrorCode::Io, "truth grid must be non-empty");
  return t;
}

TruthSet load_truth(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "truth file not found: " + path.string());
  return truth_from_json(parse_json(read_text(path), path));
}

TruthSet truth_from_phantom(const PhantomSpec& spec, const GroundTruth& truth) {
  TruthSet t;
  t.width = spec.width;
  t.height = spec.height;
  t.pixel_spacing_mm = spec.pixel_spacing_mm;
  for (const auto& f : truth.frames) {
    t.contours.push_back(f.endocardium);
    t.volumes_ml.push_back(f.volume_ml);
  }
  return t;
}

Json result_to_json(const SegmentationResult& result, double pixel_spacing_mm) {
  Json boundaries = Json::array();
  for (std::size_t k = 0; k < result.boundaries.size(); ++k) {
    const Boundary& b = result.boundaries[k];
    Json theta = Json::array();
    Json r = Json::array();
    Json x = Json::array();
    Json y = Json::array();
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Point p = b.point(i);
      theta.push_back(b.theta_deg(i));
      r.push_back(b.r[i]);
      x.push_back(p.x);
      y.push_back(p.y);
    }
    boundaries.push_back({{"frame", k}, {"theta_deg", theta}, {"r_px", r}, {"x_px", x}, {"y_px", y}});
  }

  Json beats = Json::array();
  for (std::size_t i = 0; i < result.beats.size(); ++i) {
    beats.push_back({{"ed", result.beats[i].first},
                     {"es", result.beats[i].second},
                     {"edv_ml", result.edv[i]},
                     {"esv_ml", result.esv[i]},
                     {"ef_percent", result.ef[i]}});
  }
  Json frames = Json::array();
  for (std::size_t k = 0; k < result.frames.size(); ++k) {
    const auto& f = result.frames[k];
    Json entry{{"frame", k},
               {"rerun", f.rerun},
               {"missing", f.missing},
               {"fusion_fallback", f.fusion_fallback}};
    if (k < result.uips.frames.size()) entry["uips"] = uips_to_json(result.uips.frames[k]);
    frames.push_back(entry);
  }
  Json metrics{{"beats", beats},
               {"start_frame", result.start_frame},
               {"frames", frames},
               {"lost_points", result.lost_points.size()},
               {"pixel_spacing_mm", pixel_spacing_mm}};
  return {{"boundaries", boundaries},
          {"volume_curve",
           {{"volume_ml", result.volume_curve},
            {"raw_volume_ml", result.raw_volume_curve},
            {"target_mrbp", result.targets}}},
          {"metrics", metrics}};
}

void write_result(const fs::path& out_dir, const SegmentationResult& result,
                  double pixel_spacing_mm, const ManifestInfo& manifest) {
  fs::create_directories(out_dir / "boundaries");
  for (std::size_t k = 0; k < result.boundaries.size(); ++k) {
    const Boundary& b = result.boundaries[k];
    std::string csv = "theta_deg,r_px,x_px,y_px\n";
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Point p = b.point(i);
      csv += fixed(b.theta_deg(i)) + "," + fixed(b.r[i]) + "," + fixed(p.x) + "," + fixed(p.y) + "\n";
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.csv", k);
    write_text(out_dir / "boundaries" / name, csv);
  }

  std::string volume = "frame,volume_ml,raw_volume_ml,target_mrbp\n";
  for (std::size_t k = 0; k < result.volume_curve.size(); ++k) {
    volume += std::to_string(k) + "," + fixed(result.volume_curve[k]) + "," +
              fixed(result.raw_volume_curve[k]) + "," +
              (k < result.targets.size() ? fixed(result.targets[k]) : std::string()) + "\n";
  }
  write_text(out_dir / "volume.csv", volume);

  const Json full = result_to_json(result, pixel_spacing_mm);
  write_text(out_dir / "metrics.json", full["metrics"].dump(2) + "\n");

  const Json m{{"command", manifest.command},
               {"scan_dir", manifest.scan_dir.string()},
               {"uip_file", manifest.uip_file.string()},
               {"seed", manifest.seed},
               {"version", PROID_VERSION},
               {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR)},
               {"libpng", PNG_LIBPNG_VER_STRING},
               {"params", params_to_json(result.params)}};
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

StoredResult load_result(const fs::path& out_dir) {
  StoredResult r;
  const fs::path bdir = out_dir / "boundaries";
  if (!fs::is_directory(bdir)) throw Error(ErrorCode::Io, "no boundaries/ in " + out_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(bdir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::istringstream in(read_text(f));
    std::string line;
    std::getline(in, line);
    std::vector<Point> pts;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      double theta = 0;
      double radius = 0;
      double x = 0;
      double y = 0;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &theta, &radius, &x, &y) != 4) {
        throw Error(ErrorCode::Io, "malformed boundary row in " + f.string());
      }
      pts.push_back({x, y});
    }
    r.contours.push_back(std::move(pts));
  }

  std::istringstream vin(read_text(out_dir / "volume.csv"));
  std::string line;
  std::getline(vin, line);
  while (std::getline(vin, line)) {
    if (line.empty()) continue;
    int frame = 0;
    double v = 0;
    if (std::sscanf(line.c_str(), "%d,%lf", &frame, &v) != 2) {
      throw Error(ErrorCode::Io, "malformed volume.csv row");
    }
    r.volumes_ml.push_back(v);
  }

  const Json metrics = parse_json(read_text(out_dir / "metrics.json"), out_dir / "metrics.json");
  for (const auto& b : metrics.value("beats", Json::array())) {
    r.beats.emplace_back(b.at("ed").get<int>(), b.at("es").get<int>());
  }
  if (r.volumes_ml.size() != r.contours.size()) {
    throw Error(ErrorCode::Io, "volume.csv and boundaries/ disagree on the frame count");
  }
  return r;
}

Evaluation evaluate(const StoredResult& result, const TruthSet& truth) {
  if (result.contours.size() != truth.contours.size()) {
    throw Error(ErrorCode::Dimension, "result has " + std::to_string(result.contours.size()) +
                                          " frames, truth has " +
                                          std::to_string(truth.contours.size()));
  }
  Evaluation e;
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t k = 0; k < truth.contours.size(); ++k) {
    const Mask a = rasterize(result.contours[k], truth.width, truth.height);
    const Mask b = rasterize(truth.contours[k], truth.width, truth.height);
    e.dice.push_back(dice(a, b));
    e.volume_ml.push_back(result.volumes_ml[k]);
    e.true_volume_ml.push_back(truth.volumes_ml[k]);
    pairs.emplace_back(result.volumes_ml[k], truth.volumes_ml[k]);
  }
  for (const Beat& beat : result.beats) {
    Evaluation::BeatDelta d;
    d.beat = beat;
    const auto ed = static_cast<std::size_t>(beat.first);
    const auto es = static_cast<std::size_t>(beat.second);
    if (ed >= e.volume_ml.size() || es >= e.volume_ml.size()) {
      throw Error(ErrorCode::Dimension, "beat refers to a frame outside the truth set");
    }
    d.edv = e.volume_ml[ed];
    d.esv = e.volume_ml[es];
    d.ef = ejection_fraction(d.edv, d.esv);
    d.true_edv = e.true_volume_ml[ed];
    d.true_esv = e.true_volume_ml[es];
    d.true_ef = ejection_fraction(d.true_edv, d.true_esv);
    e.beats.push_back(d);
  }
  if (pairs.size() >= 2) e.volume_agreement = bland_altman(pairs);
  return e;
}

Json evaluation_to_json(const Evaluation& e) {
  Json frames = Json::array();
  for (std::size_t k = 0; k < e.dice.size(); ++k) {
    frames.push_back({{"frame", k},
                      {"dice", e.dice[k]},
                      {"volume_ml", e.volume_ml[k]},
                      {"true_volume_ml", e.true_volume_ml[k]}});
  }
  Json beats = Json::array();
  for (const auto& b : e.beats) {
    beats.push_back({{"ed", b.beat.first},
                     {"es", b.beat.second},
                     {"edv_ml", b.edv},
                     {"esv_ml", b.esv},
                     {"ef_percent", b.ef},
                     {"true_edv_ml", b.true_edv},
                     {"true_esv_ml", b.true_esv},
                     {"true_ef_percent", b.true_ef},
                     {"delta_edv_ml", b.edv - b.true_edv},
                     {"delta_esv_ml", b.esv - b.true_esv},
                     {"delta_ef_percent", b.ef - b.true_ef}});
  }
  double mean = 0.0;
  for (double d : e.dice) mean += d;
  if (!e.dice.empty()) mean /= static_cast<double>(e.dice.size());
  Json j{{"frames", frames}, {"beats", beats}, {"mean_dice", mean}};
  if (e.volume_agreement) {
    j["bland_altman"] = {{"bias_ml", e.volume_agreement->bias},
                         {"loa_low_ml", e.volume_agreement->loa_low},
                         {"loa_high_ml", e.volume_agreement->loa_high}};
  } else {
    j["bland_altman"] = nullptr;
  }
  return j;
}

std::string evaluation_csv(const Evaluation& e) {
  std::string csv = "frame,dice,volume_ml,true_volume_ml\n";
  for (std::size_t k = 0; k < e.dice.size(); ++k) {
    csv += std::to_string(k) + "," + fixed(e.dice[k]) + "," + fixed(e.volume_ml[k]) + "," +
           fixed(e.true_volume_ml[k]) + "\n";
  }
  return csv;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace proid
