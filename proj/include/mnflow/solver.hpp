#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mnflow/hos.hpp"
#include "mnflow/image.hpp"

namespace mnflow {

/// Neighborhood R as a list of offsets from the working point, row-major.
struct Window {
  std::vector<PixelCoord> offsets;

  /// side x side block centered on the working point; side must be odd.
  static Window centered(int side);
  /// side x side block whose bottom-right corner is the working point.
  static Window causal(int side);
};

/// Linearized observation model z = G u + n for one working point.
struct ObservationSystem {
  std::vector<double> z;       // stacked DFD values
  std::vector<Vec2> G;         // spatial gradient rows (g_x, g_y)
  std::vector<PixelCoord> coords;

  std::size_t size() const noexcept { return z.size(); }
};

enum class NormMode { kLms, kLmf, kAdaptive };

struct SolverConfig {
  double beta0 = 1.0;
  GammaParams gamma;
  NormMode mode = NormMode::kAdaptive;
  int max_iters = 50;
  double tol = 1e-4;  // pixels
  KurtosisMode kurtosis_mode = KurtosisMode::kResidual;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct UpdateResult {
  Vec2 u;
  int iters = 0;
  double final_cost = 0.0;
  double initial_cost = 0.0;  // cost at u = 0 under the final gamma
  std::vector<double> gamma_trace;
  bool converged = false;
};

/// Supplies gamma for the current iterate and its residuals z - G u.
using GammaSource = std::function<double(Vec2 u, std::span<const double> residuals)>;

GammaSource fixed_gamma(double gamma);
/// gamma_of_kurtosis over the residuals handed to the source.
GammaSource residual_kurtosis_gamma(const GammaParams& params);
/// lms -> 0, lmf -> 1, adaptive -> residual_kurtosis_gamma.
GammaSource default_gamma_source(const SolverConfig& config);

/// Stacks z_j = DFD(r_j, d_pred) and G_j = -grad I_{k-1}(r_j - d_pred) for
/// r_j = r + offset, so that z ~ G u with u = d - d_pred. Requires at least
/// 2 offsets.
ObservationSystem assemble(const Image& frame_k, const Image& frame_km1, PixelCoord r,
                           Vec2 d_pred, const Window& window);

std::vector<double> residuals(const ObservationSystem& obs, Vec2 u);

/// (1 - gamma) ||z - G u||_2^2 + gamma ||z - G u||_4^4
double mixed_norm_cost(const ObservationSystem& obs, Vec2 u, double gamma);

/// Gradient with gamma held fixed:
/// -2 (1 - gamma) G^T r - 4 gamma G^T r^3, r = z - G u, cube taken elementwise.
Vec2 mixed_norm_gradient(const ObservationSystem& obs, Vec2 u, double gamma);

/// beta0 / (eps + ||G||_F^2)
double relaxation(const ObservationSystem& obs, double beta0);

/// One unsafeguarded iteration u + beta G^T [(1 - gamma) I + 2 gamma P(u)] (z - G u).
Vec2 mixed_norm_step(const ObservationSystem& obs, Vec2 u, double gamma, double beta);

/// Steepest descent from u = 0 with step halving whenever J would increase.
/// Stops once the update norm drops below config.tol or after max_iters.
/// Throws NumericalError on non-finite arithmetic.
UpdateResult solve_update(const ObservationSystem& obs, const SolverConfig& config,
                          const GammaSource& gamma_source);
UpdateResult solve_update(const ObservationSystem& obs, const SolverConfig& config);

}  // namespace mnflow
