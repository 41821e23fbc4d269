#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnflow/image.hpp"
#include "mnflow/noise.hpp"
#include "mnflow/pelrec.hpp"

namespace mnflow {

/// Degrade / estimate / compensate / evaluate grid over noise families, SNR
/// targets and norm modes.
struct ExperimentPlan {
  std::vector<NoiseFamily> noises;
  std::vector<double> snr_targets_db;
  std::vector<NormMode> modes;
  std::uint64_t seed = 0;
  bool degrade_both = false;
  PelRecConfig estimator;  // solver.mode is overridden per cell

  void validate() const;
};

struct BenchRow {
  std::string noise;
  double snr_target = 0.0;
  double snr_achieved = 0.0;
  NormMode mode = NormMode::kAdaptive;
  double psnr_compensated = 0.0;
  double mean_gamma = 0.0;
  double mean_iters = 0.0;
  double runtime_ms = 0.0;
};

/// Runs every (noise, snr, mode) cell. Cells execute in parallel; each cell's
/// scan is sequential. Rows come back in noise-major, then SNR, then mode
/// order. The noise realization depends on (seed, noise, snr) only, so all
/// modes of a cell see the same degraded frames.
std::vector<BenchRow> run_bench(const ExperimentPlan& plan, const Image& frame_k,
                                const Image& frame_km1);

/// CSV with '#' metadata lines echoing the configuration, then a header row.
std::string format_bench_csv(const ExperimentPlan& plan, const std::vector<BenchRow>& rows,
                             bool include_runtime = true);

std::string to_string(NormMode mode);

}  // namespace mnflow
