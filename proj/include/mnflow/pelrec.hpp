#pragma once

#include <filesystem>
#include <vector>

#include "mnflow/image.hpp"
#include "mnflow/netpbm.hpp"
#include "mnflow/solver.hpp"

namespace mnflow {

enum class Prediction { kCausalAverage, kPreviousPixel, kZero };

enum class WindowShape { kCentered, kCausal };

struct PelRecConfig {
  int window_side = 3;
  WindowShape window_shape = WindowShape::kCentered;
  /// Side of the square residual window (residual mode) or length of the
  /// causal intensity run (literal mode). 0 selects 7 or 5 respectively.
  int kurtosis_window = 0;
  double d_max = 5.0;
  Prediction prediction = Prediction::kCausalAverage;
  SolverConfig solver;

  void validate() const;
  int effective_kurtosis_window() const;
};

struct PixelDiagnostics {
  int iters = 0;
  double mean_gamma = 0.0;
  double final_cost = 0.0;
  bool converged = false;
};

struct FlowDiagnostics {
  std::vector<PixelDiagnostics> pixels;  // row-major
  double mean_iters = 0.0;
  double mean_gamma = 0.0;
  double mean_abs_dfd_before = 0.0;  // zero flow
  double mean_abs_dfd_after = 0.0;   // estimated flow
  double mean_displacement = 0.0;
  std::size_t converged = 0;
};

struct FlowEstimate {
  FlowField flow;
  FlowDiagnostics diagnostics;
};

/// Displacement prediction from raster-earlier vectors of flow_so_far.
Vec2 predict_displacement(const FlowField& flow_so_far, PixelCoord r, Prediction rule);

/// Vector for one working point given the finalized vectors of every
/// raster-earlier pixel. estimate_flow calls this in scan order.
Vec2 estimate_pixel(const Image& frame_k, const Image& frame_km1, const FlowField& flow_so_far,
                    PixelCoord r, const PelRecConfig& config,
                    PixelDiagnostics* diagnostics = nullptr);

/// Single left-to-right, top-to-bottom pel-recursive scan. Sequential: each
/// prediction depends on the vectors finalized before it.
FlowEstimate estimate_flow(const Image& frame_k, const Image& frame_km1,
                           const PelRecConfig& config);

/// Mean |I_k(r) - I_{k-1}(r - d(r))| over all pixels.
double mean_abs_dfd(const Image& frame_k, const Image& frame_km1, const FlowField& flow);

/// Flow file: float 202021.25, int32 width, int32 height, then row-major
/// interleaved (u, v) float32 values, all little-endian.
void write_flo(const FlowField& flow, const std::filesystem::path& path);
FlowField read_flo(const std::filesystem::path& path);

inline constexpr float kFloSentinel = 202021.25f;

/// Hue from direction, saturation from |d| / max_mag (clamped to 1), full
/// value; zero vectors are white. max_mag <= 0 selects the largest magnitude
/// present. Parallel over pixels.
RgbImage flow_to_color(const FlowField& flow, double max_mag = 0.0);
RgbImage flow_to_color_serial(const FlowField& flow, double max_mag = 0.0);

}  // namespace mnflow
