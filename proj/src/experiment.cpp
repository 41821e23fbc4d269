#include "mnflow/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

std::uint64_t cell_seed(std::uint64_t base, std::size_t noise_index, std::size_t snr_index) {
  return base + 1'000'003ull * noise_index + 7'919ull * snr_index;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_string(NormMode mode) {
  switch (mode) {
    case NormMode::kLms:
      return "lms";
    case NormMode::kLmf:
      return "lmf";
    case NormMode::kAdaptive:
      return "adaptive";
  }
  return "?";
}

void ExperimentPlan::validate() const {
  if (noises.empty()) throw InvalidArgument("plan needs at least one noise family");
  if (snr_targets_db.empty()) throw InvalidArgument("plan needs at least one SNR target");
  if (modes.empty()) throw InvalidArgument("plan needs at least one mode");
  for (double snr : snr_targets_db) {
    if (!std::isfinite(snr)) throw InvalidArgument("SNR targets must be finite");
  }
  estimator.validate();
}

std::vector<BenchRow> run_bench(const ExperimentPlan& plan, const Image& frame_k,
                                const Image& frame_km1) {
  plan.validate();
  if (!frame_k.same_shape(frame_km1)) throw InvalidArgument("frame dimensions differ");

  const std::size_t n_snr = plan.snr_targets_db.size();
  const std::size_t n_mode = plan.modes.size();
  const std::size_t n_cells = plan.noises.size() * n_snr * n_mode;
  std::vector<BenchRow> rows(n_cells);
  std::vector<std::exception_ptr> failures(n_cells);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t cell = 0; cell < static_cast<std::ptrdiff_t>(n_cells); ++cell) {
    const auto c = static_cast<std::size_t>(cell);
    const std::size_t noise_index = c / (n_snr * n_mode);
    const std::size_t snr_index = (c / n_mode) % n_snr;
    const NormMode mode = plan.modes[c % n_mode];
    try {
      const auto start = std::chrono::steady_clock::now();
      const NoiseFamily& family = plan.noises[noise_index];
      const double target = plan.snr_targets_db[snr_index];
      const std::uint64_t seed = cell_seed(plan.seed, noise_index, snr_index);

      const Degraded current = degrade_to_snr(frame_k, family, target, seed);
      const Image previous = plan.degrade_both
                                 ? degrade_to_snr(frame_km1, family, target, seed + 1).noisy
                                 : frame_km1;

      PelRecConfig config = plan.estimator;
      config.solver.mode = mode;
      const FlowEstimate estimate = estimate_flow(current.noisy, previous, config);
      const Image compensated = motion_compensate(previous, estimate.flow);
      const SnrReport quality = snr_between(frame_k, compensated);

      BenchRow& row = rows[c];
      row.noise = to_string(family);
      row.snr_target = target;
      row.snr_achieved = current.report.snr_db;
      row.mode = mode;
      row.psnr_compensated = quality.psnr_db;
      row.mean_gamma = estimate.diagnostics.mean_gamma;
      row.mean_iters = estimate.diagnostics.mean_iters;
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
              .count();
    } catch (...) {
      failures[c] = std::current_exception();
    }
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return rows;
}

std::string format_bench_csv(const ExperimentPlan& plan, const std::vector<BenchRow>& rows,
                             bool include_runtime) {
  const auto& e = plan.estimator;
  const auto& s = e.solver;
  std::ostringstream out;
  out << "# seed=" << plan.seed << " degrade_both=" << (plan.degrade_both ? 1 : 0) << '\n';
  out << "# window=" << e.window_side
      << " window_shape=" << (e.window_shape == WindowShape::kCentered ? "centered" : "causal")
      << " d_max=" << e.d_max << " kurtosis_window=" << e.effective_kurtosis_window()
      << " kurtosis_mode="
      << (s.kurtosis_mode == KurtosisMode::kResidual ? "residual" : "literal") << '\n';
  out << "# beta0=" << s.beta0 << " gamma_c=" << s.gamma.c << " gamma_A=" << s.gamma.A
      << " max_iters=" << s.max_iters << " tol=" << s.tol << '\n';

  out << "noise,snr_target,snr_achieved,mode,psnr_compensated,mean_gamma,mean_iters";
  if (include_runtime) out << ",runtime_ms";
  out << '\n';
  for (const auto& r : rows) {
    // Mixture names contain commas.
    const bool quote = r.noise.find(',') != std::string::npos;
    out << (quote ? "\"" + r.noise + "\"" : r.noise) << ',' << fixed(r.snr_target, 2) << ','
        << fixed(r.snr_achieved, 4) << ',' << to_string(r.mode) << ','
        << fixed(r.psnr_compensated, 4) << ',' << fixed(r.mean_gamma, 6) << ','
        << fixed(r.mean_iters, 3);
    if (include_runtime) out << ',' << fixed(r.runtime_ms, 1);
    out << '\n';
  }
  return out.str();
}

}  // namespace mnflow
