#include "mnflow/pelrec.hpp"

#include <algorithm>
#include <cmath>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

constexpr int kDefaultResidualKurtosisSide = 7;
constexpr int kDefaultLiteralKurtosisRun = 5;

Window solve_window(const PelRecConfig& config) {
  return config.window_shape == WindowShape::kCentered ? Window::centered(config.window_side)
                                                       : Window::causal(config.window_side);
}

// Causal run of raw current-frame intensities ending at r, clamped at the
// left border.
std::vector<double> intensity_run(const Image& frame, PixelCoord r, int length) {
  std::vector<double> run(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    run[static_cast<std::size_t>(i)] = frame(std::max(r.x - (length - 1) + i, 0), r.y);
  }
  return run;
}

double clamp_component(double v, double d_max) { return std::clamp(v, -d_max, d_max); }

}  // namespace

void PelRecConfig::validate() const {
  if (window_shape == WindowShape::kCentered && (window_side < 1 || window_side % 2 == 0)) {
    throw InvalidArgument("centered window side must be odd and >= 1");
  }
  if (window_side < 1 || window_side * window_side < 2) {
    throw InvalidArgument("window must contain at least 2 pixels");
  }
  if (kurtosis_window < 0) throw InvalidArgument("kurtosis window must be >= 0");
  if (solver.kurtosis_mode == KurtosisMode::kResidual && kurtosis_window != 0 &&
      kurtosis_window % 2 == 0) {
    throw InvalidArgument("residual kurtosis window side must be odd");
  }
  if (solver.kurtosis_mode == KurtosisMode::kLiteralIntensity && kurtosis_window == 1) {
    throw InvalidArgument("literal kurtosis window needs at least 2 samples");
  }
  if (!(d_max > 0.0)) throw InvalidArgument("d_max must be positive");
  solver.validate();
}

int PelRecConfig::effective_kurtosis_window() const {
  if (kurtosis_window > 0) return kurtosis_window;
  return solver.kurtosis_mode == KurtosisMode::kResidual ? kDefaultResidualKurtosisSide
                                                         : kDefaultLiteralKurtosisRun;
}

Vec2 predict_displacement(const FlowField& flow_so_far, PixelCoord r, Prediction rule) {
  const bool has_west = r.x > 0;
  const bool has_north = r.y > 0;
  switch (rule) {
    case Prediction::kZero:
      return {};
    case Prediction::kPreviousPixel:
      return has_west ? flow_so_far(r.x - 1, r.y) : Vec2{};
    case Prediction::kCausalAverage:
      break;
  }

  Vec2 sum{};
  int count = 0;
  auto take = [&](int x, int y) {
    sum = sum + flow_so_far(x, y);
    ++count;
  };
  if (has_west) take(r.x - 1, r.y);
  if (has_west && has_north) take(r.x - 1, r.y - 1);
  if (has_north) take(r.x, r.y - 1);
  if (has_north && r.x + 1 < flow_so_far.width()) take(r.x + 1, r.y - 1);
  if (count == 0) return {};
  return {sum.x / count, sum.y / count};
}

Vec2 estimate_pixel(const Image& frame_k, const Image& frame_km1, const FlowField& flow_so_far,
                    PixelCoord r, const PelRecConfig& config, PixelDiagnostics* diagnostics) {
  const Vec2 d_pred = predict_displacement(flow_so_far, r, config.prediction);
  const ObservationSystem obs = assemble(frame_k, frame_km1, r, d_pred, solve_window(config));

  UpdateResult update;
  if (config.solver.mode != NormMode::kAdaptive) {
    update = solve_update(obs, config.solver);
  } else if (config.solver.kurtosis_mode == KurtosisMode::kLiteralIntensity) {
    const auto run = intensity_run(frame_k, r, config.effective_kurtosis_window());
    const double chi = window_kurtosis_or_neutral(run, KurtosisMode::kLiteralIntensity);
    update = solve_update(obs, config.solver, fixed_gamma(gamma_of_kurtosis(chi, config.solver.gamma)));
  } else {
    // Residuals over a (usually wider) centered window, re-evaluated at each
    // iterate u.
    const ObservationSystem wide = assemble(frame_k, frame_km1, r, d_pred,
                                            Window::centered(config.effective_kurtosis_window()));
    const GammaParams params = config.solver.gamma;
    update = solve_update(obs, config.solver, [&wide, params](Vec2 u, std::span<const double>) {
      const auto wide_residuals = residuals(wide, u);
      return gamma_of_kurtosis(window_kurtosis_or_neutral(wide_residuals, KurtosisMode::kResidual),
                               params);
    });
  }

  if (diagnostics != nullptr) {
    diagnostics->iters = update.iters;
    double g = 0.0;
    for (double v : update.gamma_trace) g += v;
    diagnostics->mean_gamma = update.gamma_trace.empty() ? 0.0 : g / update.gamma_trace.size();
    diagnostics->final_cost = update.final_cost;
    diagnostics->converged = update.converged;
  }
  return {clamp_component(d_pred.x + update.u.x, config.d_max),
          clamp_component(d_pred.y + update.u.y, config.d_max)};
}

FlowEstimate estimate_flow(const Image& frame_k, const Image& frame_km1,
                           const PelRecConfig& config) {
  if (!frame_k.same_shape(frame_km1)) throw InvalidArgument("frame dimensions differ");
  config.validate();

  FlowEstimate out{FlowField(frame_k.width(), frame_k.height()), {}};
  auto& diag = out.diagnostics;
  diag.pixels.resize(frame_k.size());

  for (int y = 0; y < frame_k.height(); ++y) {
    for (int x = 0; x < frame_k.width(); ++x) {
      auto& pd = diag.pixels[static_cast<std::size_t>(y) * frame_k.width() + x];
      out.flow(x, y) = estimate_pixel(frame_k, frame_km1, out.flow, {x, y}, config, &pd);
    }
  }

  const double n = static_cast<double>(frame_k.size());
  for (const auto& pd : diag.pixels) {
    diag.mean_iters += pd.iters;
    diag.mean_gamma += pd.mean_gamma;
  }
  diag.mean_iters /= n;
  diag.mean_gamma /= n;
  for (const Vec2 d : out.flow.vectors()) diag.mean_displacement += std::hypot(d.x, d.y);
  diag.mean_displacement /= n;
  diag.mean_abs_dfd_before =
      mean_abs_dfd(frame_k, frame_km1, FlowField(frame_k.width(), frame_k.height()));
  diag.mean_abs_dfd_after = mean_abs_dfd(frame_k, frame_km1, out.flow);
  diag.converged = static_cast<std::size_t>(std::count_if(
      diag.pixels.begin(), diag.pixels.end(), [](const PixelDiagnostics& p) { return p.converged; }));
  return out;
}

double mean_abs_dfd(const Image& frame_k, const Image& frame_km1, const FlowField& flow) {
  if (!frame_k.same_shape(frame_km1) || !flow.matches(frame_k)) {
    throw InvalidArgument("frame/flow dimensions differ");
  }
  const int w = frame_k.width();
  const int h = frame_k.height();
  std::vector<double> rows(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double s = 0.0;
    for (int x = 0; x < w; ++x) s += std::abs(dfd(frame_k, frame_km1, {x, y}, flow(x, y)));
    rows[static_cast<std::size_t>(y)] = s;
  }
  double total = 0.0;
  for (double s : rows) total += s;
  return total / static_cast<double>(frame_k.size());
}

}  // namespace mnflow
