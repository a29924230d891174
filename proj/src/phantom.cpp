#include "proid/phantom.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "proid/error.hpp"
#include "proid/metrics.hpp"

namespace proid {

namespace {

constexpr double kPi = std::numbers::pi;

// Portable draws on top of the standard engine, so sequences do not depend on
// the library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Geometry of one frame in px. `ay` is the top of the cavity.
struct Shape {
  double ax, ay;  // cavity apex
  double a, b;    // cap semi-axes (x, y)
  double base;    // base section length
  double wall;
  double ext;
  double cap_cy() const { return ay + b; }
  double mv_y() const { return ay + b + base; }
};

Shape shape_of(const PhantomSpec& spec) {
  const double s = spec.pixel_spacing_mm;
  return {spec.apex_x_mm / s,          spec.apex_y_mm / s,       spec.cavity_half_width_mm / s,
          spec.cap_length_mm / s,      spec.base_length_mm / s,  spec.wall_thickness_mm / s,
          spec.annulus_extension_mm / s};
}

double cavity_px3(const Shape& g) {
  return 2.0 / 3.0 * kPi * g.a * g.a * g.b + kPi * g.a * g.a * g.base;
}

double epicardial_px3(const Shape& g) {
  const double aw = g.a + g.wall;
  return 2.0 / 3.0 * kPi * aw * aw * (g.b + g.wall) + kPi * aw * aw * (g.base + g.ext);
}

// Cavity scaled by `scale` with the epicardial apex held in place. The wall
// thickness is solved so the myocardial volume matches the reference frame.
Shape frame_shape(const Shape& ref, double scale) {
  Shape g = ref;
  g.a = scale * ref.a;
  g.b = scale * ref.b;
  g.base = scale * ref.base;
  const double myocardium = epicardial_px3(ref) - cavity_px3(ref);
  double lo = 0.0;
  double hi = 4.0 * ref.wall + ref.a;
  for (int i = 0; i < 80; ++i) {
    g.wall = 0.5 * (lo + hi);
    (epicardial_px3(g) - cavity_px3(g) < myocardium ? lo : hi) = g.wall;
  }
  g.wall = 0.5 * (lo + hi);
  g.ay = ref.ay - ref.wall + g.wall;
  return g;
}

Shape frame_shape(const PhantomSpec& spec, const PhantomFrameTruth& frame) {
  return frame_shape(shape_of(spec), frame.scale);
}

bool in_cavity(const Shape& g, double x, double y) {
  if (y > g.mv_y()) return false;
  const double dx = (x - g.ax) / g.a;
  if (y >= g.cap_cy()) return std::abs(dx) <= 1.0;
  const double dy = (y - g.cap_cy()) / g.b;
  return dx * dx + dy * dy <= 1.0;
}

bool in_epicardium(const Shape& g, double x, double y) {
  if (y > g.mv_y() + g.ext) return false;
  const double dx = (x - g.ax) / (g.a + g.wall);
  if (y >= g.cap_cy()) return std::abs(dx) <= 1.0;
  const double dy = (y - g.cap_cy()) / (g.b + g.wall);
  return dx * dx + dy * dy <= 1.0;
}

bool in_myocardium(const Shape& g, double x, double y) {
  if (!in_epicardium(g, x, y) || in_cavity(g, x, y)) return false;
  // Below the annulus only the side walls continue.
  return !(y > g.mv_y() && std::abs(x - g.ax) < g.a);
}

std::vector<Point> outline(const Shape& g, double a, double b, double bottom) {
  std::vector<Point> pts;
  const int side = 60;
  const int arc = 240;
  const double cy = g.cap_cy();
  for (int i = 0; i <= side; ++i) pts.push_back({g.ax - a, bottom + (cy - bottom) * i / side});
  for (int i = 1; i < arc; ++i) {
    const double phi = kPi + kPi * i / arc;  // left, over the top, to the right
    pts.push_back({g.ax + a * std::cos(phi), cy + b * std::sin(phi)});
  }
  for (int i = 0; i <= side; ++i) pts.push_back({g.ax + a, cy + (bottom - cy) * i / side});
  return pts;
}

Image gaussian_blur(const Image& in, double sigma) {
  if (sigma <= 0.0) return in;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= sum;
  const int w = in.width();
  const int h = in.height();
  Image tmp(w, h);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[static_cast<std::size_t>(i + radius)] * in.at(std::clamp(x + i, 0, w - 1), y);
      }
      tmp.at(x, y) = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

// Unit-variance spatially correlated Gaussian field.
Image noise_field(int w, int h, double correlation_px, std::uint64_t seed) {
  Rng rng(seed);
  Image white(w, h);
  for (float& v : white.pixels()) v = static_cast<float>(rng.normal());
  Image field = gaussian_blur(white, correlation_px);
  double mean = 0.0;
  for (float v : field.pixels()) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (float v : field.pixels()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(field.size()));
  for (float& v : field.pixels()) v = static_cast<float>((v - mean) / sd);
  return field;
}

Image compose(const Image& clean, const Image& noise, double sigma) {
  Image out(clean.width(), clean.height());
  auto c = clean.pixels();
  auto n = noise.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = static_cast<float>(std::round(std::clamp(c[i] + sigma * n[i], 0.0, 255.0)));
  }
  return out;
}

}  // namespace

void PhantomSpec::validate() const {
  if (width < 16 || height < 16) throw Error(ErrorCode::Spec, "phantom image too small");
  if (!(pixel_spacing_mm > 0.0) || !(frame_interval_s > 0.0) || frames < 1) {
    throw Error(ErrorCode::Spec, "spacing, interval and frame count must be positive");
  }
  if (!(target_cnr > 0.0)) throw Error(ErrorCode::Spec, "target CNR must be positive");
  if (!(cavity_half_width_mm > 0.0) || !(cap_length_mm > 0.0) || base_length_mm < 0.0 ||
      !(wall_thickness_mm > 0.0) || annulus_extension_mm < 0.0) {
    throw Error(ErrorCode::Spec, "invalid cavity geometry");
  }
  if (dropout && (dropout->attenuation < 0.0 || dropout->attenuation > 1.0)) {
    throw Error(ErrorCode::Spec, "dropout attenuation must lie in [0, 1]");
  }
  if (volume_amplitude < 0.0 || volume_amplitude >= 1.0 || period_frames < 1) {
    throw Error(ErrorCode::Spec, "volume amplitude must lie in [0, 1) with a positive period");
  }
  if (noise_correlation_px < 0.0) throw Error(ErrorCode::Spec, "noise correlation is negative");
  const Shape g = shape_of(*this);
  const double left = g.ax - g.a - g.wall;
  const double right = g.ax + g.a + g.wall;
  const double top = g.ay - g.wall;
  const double bottom = g.mv_y() + g.ext;
  if (left < 2.0 || top < 2.0 || right > width - 3.0 || bottom > height - 3.0) {
    throw Error(ErrorCode::Spec, "phantom geometry does not fit the image");
  }
}

Mask cavity_mask(const PhantomSpec& spec, const PhantomFrameTruth& frame) {
  const Shape g = frame_shape(spec, frame);
  Mask m(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (in_cavity(g, x, y)) m.set(x, y);
    }
  }
  return m;
}

Mask myocardium_mask(const PhantomSpec& spec, const PhantomFrameTruth& frame) {
  const Shape g = frame_shape(spec, frame);
  Mask m(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (in_myocardium(g, x, y)) m.set(x, y);
    }
  }
  return m;
}

PipelineParams phantom_pipeline_params() {
  PipelineParams p;
  p.tracking.window = 64;
  return p;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const Shape ref = shape_of(spec);
  const double mm3_per_px3 = std::pow(spec.pixel_spacing_mm, 3);

  Phantom out;
  out.sequence.pixel_spacing_mm = spec.pixel_spacing_mm;
  out.sequence.frame_interval_s = spec.frame_interval_s;
  out.truth.wall_thickness_px = ref.wall;

  const double amp = spec.volume_amplitude;
  std::vector<Shape> shapes;
  for (int t = 0; t < spec.frames; ++t) {
    const double rel = (1.0 + amp * std::cos(2.0 * kPi * t / spec.period_frames)) / (1.0 + amp);
    PhantomFrameTruth f;
    f.scale = std::cbrt(rel);
    const Shape g = frame_shape(ref, f.scale);
    f.wall_px = g.wall;
    f.endocardium = outline(g, g.a, g.b, g.mv_y());
    f.epicardium = outline(g, g.a + g.wall, g.b + g.wall, g.mv_y() + g.ext);
    f.volume_ml = cavity_px3(g) * mm3_per_px3 / 1000.0;
    f.epicardial_volume_ml = epicardial_px3(g) * mm3_per_px3 / 1000.0;
    // UIPs sit on the wall midline, where a reader clicks the bright apex and
    // annulus hinge points.
    const double mid = 0.5 * g.wall;
    f.uips.apex = {g.ax, g.ay - mid};
    f.uips.mv_left = {g.ax - g.a - mid, g.mv_y()};
    f.uips.mv_right = {g.ax + g.a + mid, g.mv_y()};
    out.truth.frames.push_back(std::move(f));
    shapes.push_back(g);
  }

  std::vector<Image> clean;
  for (std::size_t t = 0; t < shapes.size(); ++t) {
    const auto& f = out.truth.frames[t];
    const Shape& g = shapes[t];
    Image img(spec.width, spec.height, static_cast<float>(spec.background_intensity));
    const Point c = f.uips.center();
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (in_cavity(g, x, y)) {
          img.at(x, y) = static_cast<float>(spec.cavity_intensity);
        } else if (in_myocardium(g, x, y)) {
          double v = spec.myocardium_intensity;
          if (spec.dropout) {
            double theta = polar_angle(y - c.y, x - c.x);
            if (theta < 0.0) theta += 360.0;
            const auto& d = *spec.dropout;
            const bool inside = d.theta_min_deg <= d.theta_max_deg
                                    ? theta >= d.theta_min_deg && theta <= d.theta_max_deg
                                    : theta >= d.theta_min_deg || theta <= d.theta_max_deg;
            if (inside) v *= d.attenuation;
          }
          img.at(x, y) = static_cast<float>(v);
        }
      }
    }
    clean.push_back(std::move(img));
  }

  std::vector<Image> noise;
  for (int t = 0; t < spec.frames; ++t) {
    noise.push_back(noise_field(spec.width, spec.height, spec.noise_correlation_px,
                                splitmix(spec.seed * 1000003ULL + static_cast<std::uint64_t>(t))));
  }

  const Mask cav = cavity_mask(spec, out.truth.frames.front());
  const Mask myo = myocardium_mask(spec, out.truth.frames.front());
  auto measured = [&](double sigma) {
    try {
      return cnr(compose(clean.front(), noise.front(), sigma), cav, myo);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InfiniteCnr) return std::numeric_limits<double>::infinity();
      throw;
    }
  };
  // Measured CNR falls as the noise level rises; bisect in log space.
  double lo = std::log(1e-3);
  double hi = std::log(1e4);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (measured(std::exp(mid)) > spec.target_cnr) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double sigma = std::exp(0.5 * (lo + hi));
  double achieved = measured(sigma);
  for (double candidate : {std::exp(lo), std::exp(hi)}) {
    const double v = measured(candidate);
    if (std::abs(v - spec.target_cnr) < std::abs(achieved - spec.target_cnr)) {
      achieved = v;
      sigma = candidate;
    }
  }
  if (!(std::abs(achieved - spec.target_cnr) <= 0.2)) {
    throw Error(ErrorCode::Spec, "target CNR is unreachable with this phantom");
  }
  out.truth.noise_sigma = sigma;
  out.truth.measured_cnr = achieved;
  for (int t = 0; t < spec.frames; ++t) {
    out.sequence.frames.push_back(
        compose(clean[static_cast<std::size_t>(t)], noise[static_cast<std::size_t>(t)], sigma));
  }
  return out;
}

UipFrame perturb_uips(const GroundTruth& truth, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0) throw Error(ErrorCode::InvalidArgument, "perturbation magnitude is negative");
  if (truth.frames.empty()) throw Error(ErrorCode::InvalidArgument, "ground truth has no frames");
  Rng rng(seed);
  const double radius = magnitude * truth.wall_thickness_px;
  auto jitter = [&](Point p) {
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    return Point{p.x + r * std::cos(phi), p.y + r * std::sin(phi)};
  };
  const UipFrame& u = truth.frames.front().uips;
  UipFrame out;
  out.apex = jitter(u.apex);
  out.mv_left = jitter(u.mv_left);
  out.mv_right = jitter(u.mv_right);
  return out;
}

double phantom_dice(const PhantomSpec& spec, const GroundTruth& truth, int k,
                    const Boundary& boundary) {
  const auto pts = boundary.points();
  const Mask test = rasterize(pts, spec.width, spec.height);
  const Mask ref =
      rasterize(truth.frames.at(static_cast<std::size_t>(k)).endocardium, spec.width, spec.height);
  return dice(test, ref);
}

std::pair<int, int> true_ed_es(const GroundTruth& truth) {
  int ed = 0;
  int es = 0;
  for (std::size_t t = 0; t < truth.frames.size(); ++t) {
    if (truth.frames[t].volume_ml > truth.frames[static_cast<std::size_t>(ed)].volume_ml) ed = static_cast<int>(t);
    if (truth.frames[t].volume_ml < truth.frames[static_cast<std::size_t>(es)].volume_ml) es = static_cast<int>(t);
  }
  return {ed, es};
}

MonteCarloResult run_monte_carlo(const PhantomSpec& spec, const MonteCarloOptions& options) {
  if (options.trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  const Phantom phantom = generate_phantom(spec);
  const auto [ed, es] = true_ed_es(phantom.truth);

  MonteCarloResult result;
  result.trials.resize(static_cast<std::size_t>(options.trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < options.trials; i = next++) {
      TrialRecord& rec = result.trials[static_cast<std::size_t>(i)];
      rec.seed = splitmix(options.master_seed + static_cast<std::uint64_t>(i));
      try {
        const UipFrame uips = perturb_uips(phantom.truth, options.magnitude, rec.seed);
        const auto seg = segment_sequence(phantom.sequence, uips, options.params);
        rec.dice_ed = phantom_dice(spec, phantom.truth, ed,
                                   seg.boundaries[static_cast<std::size_t>(ed)]);
        rec.dice_es = phantom_dice(spec, phantom.truth, es,
                                   seg.boundaries[static_cast<std::size_t>(es)]);
        rec.dice = 0.5 * (rec.dice_ed + rec.dice_es);
      } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
      }
    }
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(options.trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> values;
  for (const auto& rec : result.trials) {
    if (rec.failed) {
      ++result.failures;
    } else {
      values.push_back(rec.dice);
    }
  }
  if (static_cast<double>(result.failures) > 0.2 * options.trials) {
    throw Error(ErrorCode::Harness, std::to_string(result.failures) + " of " +
                                        std::to_string(options.trials) + " trials failed");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  result.mean_dice = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - result.mean_dice) * (v - result.mean_dice);
    result.std_dice = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return result;
}

}  // namespace proid
