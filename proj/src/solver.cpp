#include "mnflow/solver.hpp"

#include <cmath>
#include <string>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

constexpr double kStepEpsilon = 1e-8;
constexpr int kMaxHalvings = 20;

double cost_of(std::span<const double> r, double gamma) {
  double l2 = 0.0;
  double l4 = 0.0;
  for (double v : r) {
    const double v2 = v * v;
    l2 += v2;
    l4 += v2 * v2;
  }
  return (1.0 - gamma) * l2 + gamma * l4;
}

Vec2 step_from(const ObservationSystem& obs, std::span<const double> r, double gamma,
               double beta) {
  Vec2 g;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double w = (1.0 - gamma) * r[i] + 2.0 * gamma * r[i] * r[i] * r[i];
    g.x += obs.G[i].x * w;
    g.y += obs.G[i].y * w;
  }
  return {beta * g.x, beta * g.y};
}

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

Window Window::centered(int side) {
  if (side < 1 || side % 2 == 0) {
    throw InvalidArgument("centered window side must be odd and >= 1, got " +
                          std::to_string(side));
  }
  Window w;
  const int half = side / 2;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) w.offsets.push_back({dx, dy});
  }
  return w;
}

Window Window::causal(int side) {
  if (side < 1) throw InvalidArgument("causal window side must be >= 1");
  Window w;
  for (int dy = 1 - side; dy <= 0; ++dy) {
    for (int dx = 1 - side; dx <= 0; ++dx) w.offsets.push_back({dx, dy});
  }
  return w;
}

void SolverConfig::validate() const {
  if (!(beta0 > 0.0)) throw InvalidArgument("beta0 must be positive");
  if (!(gamma.c > 0.0) || !(gamma.A > 0.0)) {
    throw InvalidArgument("gamma parameters c and A must be positive");
  }
  if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
}

GammaSource fixed_gamma(double gamma) {
  return [gamma](Vec2, std::span<const double>) { return gamma; };
}

GammaSource residual_kurtosis_gamma(const GammaParams& params) {
  return [params](Vec2, std::span<const double> r) {
    return gamma_of_kurtosis(window_kurtosis_or_neutral(r, KurtosisMode::kResidual), params);
  };
}

GammaSource default_gamma_source(const SolverConfig& config) {
  switch (config.mode) {
    case NormMode::kLms:
      return fixed_gamma(0.0);
    case NormMode::kLmf:
      return fixed_gamma(1.0);
    case NormMode::kAdaptive:
      break;
  }
  return residual_kurtosis_gamma(config.gamma);
}

ObservationSystem assemble(const Image& frame_k, const Image& frame_km1, PixelCoord r,
                           Vec2 d_pred, const Window& window) {
  if (window.offsets.size() < 2) {
    throw InvalidArgument("observation window needs at least 2 points");
  }
  ObservationSystem obs;
  obs.z.reserve(window.offsets.size());
  obs.G.reserve(window.offsets.size());
  obs.coords.reserve(window.offsets.size());
  for (const PixelCoord off : window.offsets) {
    const PixelCoord rj{r.x + off.x, r.y + off.y};
    obs.coords.push_back(rj);
    obs.z.push_back(dfd(frame_k, frame_km1, rj, d_pred));
    // DFD ~ -u . grad I_{k-1}(r - d_pred), so z = G u needs the negated gradient.
    const Vec2 g = spatial_gradient(frame_km1, rj.x - d_pred.x, rj.y - d_pred.y);
    obs.G.push_back({-g.x, -g.y});
  }
  return obs;
}

std::vector<double> residuals(const ObservationSystem& obs, Vec2 u) {
  std::vector<double> r(obs.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = obs.z[i] - (obs.G[i].x * u.x + obs.G[i].y * u.y);
  }
  return r;
}

double mixed_norm_cost(const ObservationSystem& obs, Vec2 u, double gamma) {
  return cost_of(residuals(obs, u), gamma);
}

Vec2 mixed_norm_gradient(const ObservationSystem& obs, Vec2 u, double gamma) {
  const auto r = residuals(obs, u);
  Vec2 g;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double w = -2.0 * (1.0 - gamma) * r[i] - 4.0 * gamma * r[i] * r[i] * r[i];
    g.x += obs.G[i].x * w;
    g.y += obs.G[i].y * w;
  }
  return g;
}

double relaxation(const ObservationSystem& obs, double beta0) {
  double frob = 0.0;
  for (const Vec2 g : obs.G) frob += g.x * g.x + g.y * g.y;
  return beta0 / (kStepEpsilon + frob);
}

Vec2 mixed_norm_step(const ObservationSystem& obs, Vec2 u, double gamma, double beta) {
  return u + step_from(obs, residuals(obs, u), gamma, beta);
}

UpdateResult solve_update(const ObservationSystem& obs, const SolverConfig& config,
                          const GammaSource& gamma_source) {
  config.validate();
  if (obs.size() < 2) throw InvalidArgument("observation system needs N >= 2");

  const double beta = relaxation(obs, config.beta0);
  UpdateResult result;
  result.gamma_trace.reserve(static_cast<std::size_t>(config.max_iters));

  Vec2 u{};
  double gamma = 0.0;
  for (int k = 1; k <= config.max_iters; ++k) {
    const auto r = residuals(obs, u);
    gamma = gamma_source(u, r);
    result.gamma_trace.push_back(gamma);

    const double cost = cost_of(r, gamma);
    Vec2 step = step_from(obs, r, gamma, beta);
    Vec2 next = u + step;
    int halvings = 0;
    while (mixed_norm_cost(obs, next, gamma) > cost) {
      if (++halvings > kMaxHalvings) {
        next = u;
        break;
      }
      step = {0.5 * step.x, 0.5 * step.y};
      next = u + step;
    }
    if (!finite(next) || !std::isfinite(cost)) {
      throw NumericalError("mixed-norm iteration produced a non-finite value at iteration " +
                           std::to_string(k));
    }

    const Vec2 delta = next - u;
    u = next;
    result.iters = k;
    if (std::hypot(delta.x, delta.y) < config.tol) {
      result.converged = true;
      break;
    }
  }

  // gamma may move between iterations; keep the end point no worse than the
  // start under the gamma it finished with.
  result.initial_cost = cost_of(obs.z, gamma);
  result.final_cost = mixed_norm_cost(obs, u, gamma);
  if (result.final_cost > result.initial_cost) {
    u = {};
    result.final_cost = result.initial_cost;
  }
  result.u = u;
  return result;
}

UpdateResult solve_update(const ObservationSystem& obs, const SolverConfig& config) {
  return solve_update(obs, config, default_gamma_source(config));
}

}  // namespace mnflow
