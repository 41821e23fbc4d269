#include "mnflow/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mnflow/errors.hpp"
#include "mnflow/experiment.hpp"
#include "mnflow/netpbm.hpp"
#include "mnflow/noise.hpp"
#include "mnflow/pelrec.hpp"
#include "mnflow/synthetic.hpp"

namespace mnflow::cli {

namespace {

const std::map<std::string, NormMode> kModes{
    {"lms", NormMode::kLms}, {"lmf", NormMode::kLmf}, {"adaptive", NormMode::kAdaptive}};
const std::map<std::string, KurtosisMode> kKurtosisModes{
    {"residual", KurtosisMode::kResidual}, {"literal", KurtosisMode::kLiteralIntensity}};
const std::map<std::string, Prediction> kPredictions{
    {"causal_average", Prediction::kCausalAverage},
    {"previous_pixel", Prediction::kPreviousPixel},
    {"zero", Prediction::kZero}};

const CLI::Validator kNoiseName(
    [](std::string& text) -> std::string {
      try {
        parse_noise_family(text);
        return {};
      } catch (const InvalidArgument& e) {
        return e.what();
      }
    },
    "NOISE", "noise family");

std::string number(double v, int digits = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Solver and scan flags shared by estimate and bench.
void add_estimator_options(CLI::App* app, PelRecConfig& cfg, bool causal_window_flag) {
  app->add_option("--window", cfg.window_side, "Neighborhood side length")
      ->capture_default_str();
  app->add_option("--dmax", cfg.d_max, "Displacement clamp (pixels)")->capture_default_str();
  app->add_option("--beta0", cfg.solver.beta0, "Step scale")->capture_default_str();
  app->add_option("--gamma-c", cfg.solver.gamma.c, "Sigmoid sharpness c")->capture_default_str();
  app->add_option("--gamma-A", cfg.solver.gamma.A, "Sigmoid shift A")->capture_default_str();
  app->add_option("--kurtosis-mode", cfg.solver.kurtosis_mode, "residual | literal")
      ->transform(CLI::CheckedTransformer(kKurtosisModes, CLI::ignore_case));
  app->add_option("--kurtosis-window", cfg.kurtosis_window,
                  "Residual window side / literal run length (0 = 7 / 5)")
      ->capture_default_str();
  app->add_option("--max-iters", cfg.solver.max_iters, "Iterations per pixel")
      ->capture_default_str();
  app->add_option("--tol", cfg.solver.tol, "Update-norm stopping threshold (pixels)")
      ->capture_default_str();
  app->add_option("--prediction", cfg.prediction, "causal_average | previous_pixel | zero")
      ->transform(CLI::CheckedTransformer(kPredictions, CLI::ignore_case));
  if (causal_window_flag) {
    app->add_flag_callback(
        "--causal-window", [&cfg] { cfg.window_shape = WindowShape::kCausal; },
        "Use a causal block ending at the working point instead of a centered one");
  }
}

struct DegradeArgs {
  std::string input, output, noise;
  double snr = 30.0;
  std::uint64_t seed = 0;
};

struct EstimateArgs {
  std::string frame_k, frame_km1, output, viz;
  double viz_max = 0.0;
  PelRecConfig config;
};

struct CompensateArgs {
  std::string frame_km1, flow, output;
};

struct EvaluateArgs {
  std::string reference, test;
  bool header = false;
};

struct BenchArgs {
  std::vector<std::string> frames;
  std::vector<std::string> noises{"gaussian", "laplacian", "uniform"};
  std::vector<double> snrs{30.0, 20.0};
  std::vector<NormMode> modes{NormMode::kLms, NormMode::kLmf, NormMode::kAdaptive};
  std::uint64_t seed = 0;
  std::string out_dir;
  bool degrade_both = false;
  PelRecConfig config;
};

struct SynthArgs {
  int width = 64, height = 64;
  std::vector<int> shift{1, 0};
  std::uint64_t seed = 0;
  double sigma = 1.5;
  std::string previous, current;
};

int do_degrade(const DegradeArgs& a, std::ostream& out) {
  const Image clean = load_pgm(a.input);
  const Degraded result = degrade_to_snr(clean, parse_noise_family(a.noise), a.snr, a.seed);
  save_pgm(result.noisy, a.output);
  out << "noise=" << to_string(result.spec.family) << " snr_target=" << number(a.snr, 2)
      << " snr_achieved=" << number(result.report.snr_db, 4)
      << " noise_variance=" << number(result.report.noise_variance, 8) << " seed=" << a.seed
      << '\n';
  return kExitOk;
}

int do_estimate(const EstimateArgs& a, std::ostream& out) {
  // Everything is loaded and computed before the first write.
  const Image frame_k = load_pgm(a.frame_k);
  const Image frame_km1 = load_pgm(a.frame_km1);
  const FlowEstimate estimate = estimate_flow(frame_k, frame_km1, a.config);
  write_flo(estimate.flow, a.output);
  if (!a.viz.empty()) save_ppm(flow_to_color(estimate.flow, a.viz_max), a.viz);

  const auto& d = estimate.diagnostics;
  out << "mode=" << to_string(a.config.solver.mode) << " mean_iters=" << number(d.mean_iters, 3)
      << " mean_gamma=" << number(d.mean_gamma) << " mean_abs_dfd_before="
      << number(d.mean_abs_dfd_before) << " mean_abs_dfd_after=" << number(d.mean_abs_dfd_after)
      << " mean_displacement=" << number(d.mean_displacement) << " converged=" << d.converged
      << '/' << d.pixels.size() << '\n';
  return kExitOk;
}

int do_compensate(const CompensateArgs& a, std::ostream&) {
  const Image frame_km1 = load_pgm(a.frame_km1);
  const FlowField flow = read_flo(a.flow);
  save_pgm(motion_compensate(frame_km1, flow), a.output);
  return kExitOk;
}

int do_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Image reference = load_pgm(a.reference);
  const Image test = load_pgm(a.test);
  const SnrReport r = snr_between(reference, test);
  if (a.header) out << "mse,psnr_db,snr_db\n";
  out << number(r.mse, 9) << ',' << number(r.psnr_db, 4) << ',' << number(r.snr_db, 4) << '\n';
  return kExitOk;
}

int do_bench(const BenchArgs& a, std::ostream& out) {
  ExperimentPlan plan;
  for (const auto& n : a.noises) plan.noises.push_back(parse_noise_family(n));
  plan.snr_targets_db = a.snrs;
  plan.modes = a.modes;
  plan.seed = a.seed;
  plan.degrade_both = a.degrade_both;
  plan.estimator = a.config;

  const Image frame_k = load_pgm(a.frames.at(0));
  const Image frame_km1 = load_pgm(a.frames.at(1));
  const auto rows = run_bench(plan, frame_k, frame_km1);
  const std::string csv = format_bench_csv(plan, rows);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    const auto path = std::filesystem::path(a.out_dir) / "bench.csv";
    std::ofstream file(path, std::ios::trunc);
    if (!file || !(file << csv)) throw IoError("cannot write " + path.string());
  }
  out << csv;
  return kExitOk;
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  const FramePair pair = shifted_pair(a.width, a.height, a.shift.at(0), a.shift.at(1), a.seed);
  save_pgm(pair.previous, a.previous);
  save_pgm(pair.current, a.current);
  out << "wrote " << a.previous << " and " << a.current << " (shift " << a.shift[0] << ','
      << a.shift[1] << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kurtosis-adaptive mixed-norm pel-recursive optical flow", "mnflow"};
  app.require_subcommand(1);

  DegradeArgs degrade;
  auto* degrade_cmd = app.add_subcommand("degrade", "Add noise to a frame at a target SNR");
  degrade_cmd->add_option("input", degrade.input, "Clean PGM")->required()->check(CLI::ExistingFile);
  degrade_cmd->add_option("output", degrade.output, "Degraded PGM")->required();
  degrade_cmd->add_option("--noise", degrade.noise, "gaussian | laplacian | uniform | mix:a,f1,b,f2")
      ->required()
      ->check(kNoiseName);
  degrade_cmd->add_option("--snr", degrade.snr, "Target SNR (dB)")->required();
  degrade_cmd->add_option("--seed", degrade.seed, "RNG seed")->capture_default_str();

  EstimateArgs estimate;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a dense flow field");
  estimate_cmd->add_option("frame_k", estimate.frame_k, "Current frame (PGM)")->required();
  estimate_cmd->add_option("frame_km1", estimate.frame_km1, "Previous frame (PGM)")->required();
  estimate_cmd->add_option("output", estimate.output, "Flow file (.flo)")->required();
  estimate_cmd->add_option("--mode", estimate.config.solver.mode, "lms | lmf | adaptive")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  add_estimator_options(estimate_cmd, estimate.config, true);
  estimate_cmd->add_option("--viz", estimate.viz, "Color visualization (PPM)");
  estimate_cmd->add_option("--viz-max", estimate.viz_max,
                           "Magnitude at full saturation (0 = largest vector)");

  CompensateArgs compensate;
  auto* compensate_cmd = app.add_subcommand("compensate", "Backward-warp a frame along a flow");
  compensate_cmd->add_option("frame_km1", compensate.frame_km1, "Previous frame (PGM)")
      ->required();
  compensate_cmd->add_option("flow", compensate.flow, "Flow file (.flo)")->required();
  compensate_cmd->add_option("output", compensate.output, "Compensated frame (PGM)")->required();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Print mse,psnr_db,snr_db as CSV");
  evaluate_cmd->add_option("reference", evaluate.reference, "Reference PGM")->required();
  evaluate_cmd->add_option("test", evaluate.test, "Test PGM")->required();
  evaluate_cmd->add_flag("--header", evaluate.header, "Emit the CSV header row");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the noise x SNR x mode comparison grid");
  bench_cmd->add_option("--frames", bench.frames, "Current and previous frame (PGM)")
      ->required()
      ->expected(2);
  bench_cmd->add_option("--noise", bench.noises, "Noise families (repeatable)")
      ->check(kNoiseName)
      ->capture_default_str();
  bench_cmd->add_option("--snr", bench.snrs, "Comma-separated SNR targets (dB)")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--modes", bench.modes, "Comma-separated norm modes")
      ->delimiter(',')
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  bench_cmd->add_option("--seed", bench.seed, "Base RNG seed")->capture_default_str();
  bench_cmd->add_option("--out", bench.out_dir, "Directory for bench.csv");
  bench_cmd->add_flag("--degrade-both", bench.degrade_both, "Corrupt the previous frame too");
  add_estimator_options(bench_cmd, bench.config, false);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic translated frame pair");
  synth_cmd->add_option("previous", synth.previous, "Previous frame (PGM)")->required();
  synth_cmd->add_option("current", synth.current, "Current frame (PGM)")->required();
  synth_cmd->add_option("--width", synth.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.height)->capture_default_str();
  synth_cmd->add_option("--shift", synth.shift, "dx,dy in whole pixels")
      ->delimiter(',')
      ->expected(2);
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--sigma", synth.sigma, "Texture blur (pixels)")->capture_default_str();

  std::vector<const char*> argv{"mnflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*degrade_cmd) return do_degrade(degrade, out);
    if (*estimate_cmd) return do_estimate(estimate, out);
    if (*compensate_cmd) return do_compensate(compensate, out);
    if (*evaluate_cmd) return do_evaluate(evaluate, out);
    if (*bench_cmd) return do_bench(bench, out);
    if (*synth_cmd) return do_synth(synth, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mnflow::cli
