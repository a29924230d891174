// proid command-line front end.
//
//   proid segment SCAN_DIR UIP_FILE OUT_DIR [--params FILE] [--seed N]
//   proid evaluate RESULT_DIR TRUTH_FILE [--out DIR]
//   proid phantom generate OUT_DIR [--spec FILE] [--cnr X] [--seed N]
//   proid phantom mc OUT_CSV [--spec FILE] [--cnr X ...] [--trials N] [--magnitude M]
//   proid serve DATA_DIR [--host H] [--port N]
//
// Exit status: 0 success, 1 invalid input, 2 segmentation failure.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "proid/error.hpp"
#include "proid/io.hpp"
#include "proid/phantom.hpp"
#include "proid/service.hpp"

namespace {

using namespace proid;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;

bool is_validation(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidUip:
    case ErrorCode::InvalidCenter:
    case ErrorCode::Dimension:
    case ErrorCode::Io:
    case ErrorCode::Spec:
      return true;
    default:
      return false;
  }
}

int report(const Error& e) {
  std::cerr << "error: " << e.what() << " [" << to_string(e.code()) << "]\n";
  return is_validation(e.code()) ? kInvalid : kFailed;
}

struct SegmentArgs {
  std::string scan_dir, uip_file, out_dir, params;
  std::uint64_t seed = 0;
};

int cmd_segment(const SegmentArgs& a) {
  ScanSequence scan;
  UipFrame uips;
  PipelineParams params;
  try {
    uips = load_uips(a.uip_file);
    scan = load_sequence(a.scan_dir);
    if (!a.params.empty()) params = load_params(a.params);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  SegmentationResult result;
  try {
    result = segment_sequence(scan, uips, params);
  } catch (const Error& e) {
    return report(e);
  }
  try {
    write_result(a.out_dir, result, scan.pixel_spacing_mm,
                 {"segment", a.scan_dir, a.uip_file, a.seed});
  } catch (const Error& e) {
    return report(e);
  }
  for (std::size_t b = 0; b < result.beats.size(); ++b) {
    std::printf("beat %zu: ED %d ES %d EDV %.2f mL ESV %.2f mL EF %.1f%%\n", b,
                result.beats[b].first, result.beats[b].second, result.edv[b], result.esv[b],
                result.ef[b]);
  }
  return kOk;
}

int cmd_evaluate(const std::string& result_dir, const std::string& truth_file,
                 const std::string& out_dir) {
  try {
    const auto evaluation = evaluate(load_result(result_dir), load_truth(truth_file));
    const fs::path out = out_dir.empty() ? fs::path(result_dir) : fs::path(out_dir);
    fs::create_directories(out);
    const Json j = evaluation_to_json(evaluation);
    write_text(out / "evaluation.json", j.dump(2) + "\n");
    write_text(out / "evaluation.csv", evaluation_csv(evaluation));
    std::printf("mean Dice %.4f over %zu frames\n", j["mean_dice"].get<double>(),
                evaluation.dice.size());
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

PhantomSpec phantom_spec(const std::string& spec_file, std::optional<double> cnr,
                         std::optional<std::uint64_t> seed) {
  PhantomSpec spec = spec_file.empty() ? PhantomSpec{} : load_phantom_spec(spec_file);
  if (cnr) spec.target_cnr = *cnr;
  if (seed) spec.seed = *seed;
  spec.validate();
  return spec;
}

int cmd_phantom_generate(const std::string& out_dir, const std::string& spec_file,
                         std::optional<double> cnr, std::optional<std::uint64_t> seed) {
  try {
    const PhantomSpec spec = phantom_spec(spec_file, cnr, seed);
    const Phantom ph = generate_phantom(spec);
    const fs::path out(out_dir);
    save_sequence(out / "scan", ph.sequence);
    write_text(out / "uips.json", uips_to_json(ph.truth.frames.front().uips).dump(2) + "\n");
    write_text(out / "truth.json", truth_to_json(truth_from_phantom(spec, ph.truth)).dump() + "\n");
    write_text(out / "spec.json", phantom_spec_to_json(spec).dump(2) + "\n");
    const Json params{{"tracking", {{"window", phantom_pipeline_params().tracking.window}}}};
    write_text(out / "params.json", params.dump(2) + "\n");
    std::printf("phantom: %zu frames, CNR %.3f, noise sigma %.3f\n", ph.sequence.size(),
                ph.truth.measured_cnr, ph.truth.noise_sigma);
    return kOk;
  } catch (const Error& e) {
    return report(e);
  }
}

struct McArgs {
  std::string out_csv, spec, params;
  std::vector<double> cnrs{1, 3, 5, 7};
  int trials = 25;
  double magnitude = 0.5;
  std::uint64_t seed = 2020;
  unsigned threads = 0;
};

int cmd_phantom_mc(const McArgs& a) {
  try {
    PhantomSpec base = phantom_spec(a.spec, std::nullopt, std::nullopt);
    MonteCarloOptions options;
    options.trials = a.trials;
    options.magnitude = a.magnitude;
    options.master_seed = a.seed;
    options.threads = a.threads;
    if (!a.params.empty()) options.params = load_params(a.params, phantom_pipeline_params());
    std::ostringstream csv;
    csv << "cnr,mean_dice,std_dice,failures\n";
    for (double c : a.cnrs) {
      PhantomSpec spec = base;
      spec.target_cnr = c;
      const auto mc = run_monte_carlo(spec, options);
      char row[128];
      std::snprintf(row, sizeof row, "%g,%.6f,%.6f,%zu\n", c, mc.mean_dice, mc.std_dice,
                    mc.failures);
      csv << row;
      std::fputs(row, stdout);
      std::fflush(stdout);
    }
    write_text(a.out_csv, csv.str());
    return kOk;
  } catch (const Error& e) {
    return report(e);
  }
}

Service* g_service = nullptr;

int cmd_serve(const std::string& data_dir, const std::string& host, int port) {
  try {
    Service service(data_dir);
    const int bound = service.bind(host, port);
    g_service = &service;
    std::signal(SIGINT, [](int) {
      if (g_service) g_service->stop();
    });
    std::signal(SIGTERM, [](int) {
      if (g_service) g_service->stop();
    });
    std::printf("listening on http://%s:%d\n", host.c_str(), bound);
    std::fflush(stdout);
    service.listen();
    g_service = nullptr;
    return kOk;
  } catch (const Error& e) {
    return report(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proid: unsupervised left-ventricle segmentation"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "segment a scan sequence");
  segment->add_option("scan_dir", seg.scan_dir, "directory of frames plus metadata.json")->required();
  segment->add_option("uip_file", seg.uip_file, "JSON with apex, mv_left, mv_right")->required();
  segment->add_option("out_dir", seg.out_dir, "output directory")->required();
  segment->add_option("--params", seg.params, "JSON parameter overrides");
  segment->add_option("--seed", seg.seed, "recorded in the manifest");

  std::string result_dir, truth_file, eval_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compare a result with reference contours");
  evaluate_cmd->add_option("result_dir", result_dir)->required();
  evaluate_cmd->add_option("truth_file", truth_file)->required();
  evaluate_cmd->add_option("--out", eval_out, "defaults to the result directory");

  auto* phantom = app.add_subcommand("phantom", "synthetic phantom tools");
  phantom->require_subcommand(1);
  std::string gen_out, gen_spec;
  std::optional<double> gen_cnr;
  std::optional<std::uint64_t> gen_seed;
  auto* generate = phantom->add_subcommand("generate", "write a phantom scan with ground truth");
  generate->add_option("out_dir", gen_out)->required();
  generate->add_option("--spec", gen_spec, "phantom spec JSON overrides");
  generate->add_option("--cnr", gen_cnr, "target contrast-to-noise ratio");
  generate->add_option("--seed", gen_seed, "noise seed");

  McArgs mc;
  auto* mc_cmd = phantom->add_subcommand("mc", "Monte-Carlo UIP perturbation sweep over CNR");
  mc_cmd->add_option("out_csv", mc.out_csv)->required();
  mc_cmd->add_option("--spec", mc.spec, "phantom spec JSON overrides");
  mc_cmd->add_option("--params", mc.params, "pipeline JSON overrides");
  mc_cmd->add_option("--cnr", mc.cnrs, "CNR values")->expected(1, -1);
  mc_cmd->add_option("--trials", mc.trials)->check(CLI::PositiveNumber);
  mc_cmd->add_option("--magnitude", mc.magnitude)->check(CLI::NonNegativeNumber);
  mc_cmd->add_option("--seed", mc.seed, "master seed");
  mc_cmd->add_option("--threads", mc.threads, "0 = all cores");

  std::string data_dir, host = "127.0.0.1";
  int port = default_port();
  auto* serve = app.add_subcommand("serve", "HTTP service for the reader UI");
  serve->add_option("data_dir", data_dir, "one subdirectory per scan")->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port, "defaults to PROID_PORT or 8080");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  if (*segment) return cmd_segment(seg);
  if (*evaluate_cmd) return cmd_evaluate(result_dir, truth_file, eval_out);
  if (*generate) return cmd_phantom_generate(gen_out, gen_spec, gen_cnr, gen_seed);
  if (*mc_cmd) return cmd_phantom_mc(mc);
  if (*serve) return cmd_serve(data_dir, host, port);
  return kInvalid;
}
