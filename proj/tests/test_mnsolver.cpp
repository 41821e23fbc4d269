#include <doctest.h>

#include <cmath>
#include <random>

#include "mnflow/errors.hpp"
#include "mnflow/solver.hpp"
#include "mnflow/synthetic.hpp"
#include "oracles.hpp"

using namespace mnflow;

namespace {

ObservationSystem well_conditioned(std::mt19937_64& rng, std::size_t n = 9) {
  while (true) {
    auto obs = oracle::random_system(rng, n);
    const Vec2 ls = oracle::least_squares(obs);
    // Keeps the quartic minimizer well inside the oracle's [-3,3]^2 grid.
    if (oracle::condition(obs) < 10.0 && std::abs(ls.x) < 2.0 && std::abs(ls.y) < 2.0) return obs;
  }
}

SolverConfig tight(NormMode mode, int max_iters = 500) {
  SolverConfig c;
  c.mode = mode;
  c.max_iters = max_iters;
  c.tol = 1e-13;
  return c;
}

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_SUITE("window") {
  TEST_CASE("centered 3x3 enumerates row-major") {
    const Window w = Window::centered(3);
    REQUIRE(w.offsets.size() == 9);
    CHECK(w.offsets.front() == PixelCoord{-1, -1});
    CHECK(w.offsets[1] == PixelCoord{0, -1});
    CHECK(w.offsets[4] == PixelCoord{0, 0});
    CHECK(w.offsets.back() == PixelCoord{1, 1});
    CHECK_THROWS_AS(Window::centered(4), InvalidArgument);
  }

  TEST_CASE("causal block ends at the working point") {
    const Window w = Window::causal(2);
    REQUIRE(w.offsets.size() == 4);
    CHECK(w.offsets.back() == PixelCoord{0, 0});
    CHECK(w.offsets.front() == PixelCoord{-1, -1});
  }
}

TEST_SUITE("assemble") {
  TEST_CASE("identical frames give zero observations and the negated frame gradients") {
    const Image img = textured_frame(16, 16, 1);
    const auto obs = assemble(img, img, {8, 8}, {0, 0}, Window::centered(3));
    REQUIRE(obs.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(obs.z[i] == 0.0);
      const Vec2 g = spatial_gradient(img, obs.coords[i].x, obs.coords[i].y);
      CHECK(obs.G[i] == Vec2{-g.x, -g.y});
    }
    CHECK(obs.coords[0] == PixelCoord{7, 7});
    CHECK(obs.coords[8] == PixelCoord{9, 9});
  }

  TEST_CASE("true displacement prediction registers perfectly") {
    const FramePair pair = shifted_pair(20, 20, 1, 0, 3);
    const auto obs = assemble(pair.current, pair.previous, {10, 10}, {1, 0}, Window::centered(3));
    for (double z : obs.z) CHECK(std::abs(z) < 1e-12);
  }

  TEST_CASE("needs two points") {
    const Image img(4, 4);
    CHECK_THROWS_AS(assemble(img, img, {1, 1}, {}, Window::centered(1)), InvalidArgument);
  }
}

TEST_SUITE("cost and gradient") {
  ObservationSystem two_rows(double r1, double r2) {
    ObservationSystem o;
    o.z = {r1, r2};
    o.G = {{1.0, 0.0}, {0.0, 1.0}};
    o.coords = {{0, 0}, {1, 0}};
    return o;
  }

  TEST_CASE("cost examples") {
    const auto obs = two_rows(1.0, 2.0);
    CHECK(mixed_norm_cost(obs, {0, 0}, 0.0) == 5.0);
    CHECK(mixed_norm_cost(obs, {0, 0}, 0.5) == 11.0);
    for (double g : {0.0, 0.4, 1.0}) CHECK(mixed_norm_cost(obs, {1.0, 2.0}, g) == 0.0);
  }

  TEST_CASE("gradient specializations") {
    std::mt19937_64 rng(1);
    const auto obs = oracle::random_system(rng, 9);
    const Vec2 ls = oracle::least_squares(obs);
    const Vec2 g0 = mixed_norm_gradient(obs, ls, 0.0);
    CHECK(std::abs(g0.x) < 1e-12);
    CHECK(std::abs(g0.y) < 1e-12);

    const Vec2 u{0.3, -0.2};
    const Vec2 g = mixed_norm_gradient(obs, u, 0.0);
    double ex = 0, ey = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double r = obs.z[i] - obs.G[i].x * u.x - obs.G[i].y * u.y;
      ex += -2.0 * obs.G[i].x * r;
      ey += -2.0 * obs.G[i].y * r;
    }
    CHECK(g.x == doctest::Approx(ex));
    CHECK(g.y == doctest::Approx(ey));
  }

  TEST_CASE("frozen-gamma gradient matches finite differences") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const auto obs = oracle::random_system(rng, 9);
      const Vec2 u{ud(rng), ud(rng)};
      for (double gamma : {0.0, 0.3, 0.7, 1.0}) {
        const Vec2 a = mixed_norm_gradient(obs, u, gamma);
        const Vec2 fd = oracle::central_difference(obs, u, gamma);
        REQUIRE(dist(a, fd) / std::max(std::hypot(fd.x, fd.y), 1e-12) < 1e-5);
      }
    }
  }

  TEST_CASE("one iteration equals u - beta/2 grad J") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto obs = oracle::random_system(rng, 9);
      const Vec2 u{ud(rng), ud(rng)};
      const double gamma = (ud(rng) + 1.0) / 2.0;
      const double beta = relaxation(obs, 1.0);
      const Vec2 step = mixed_norm_step(obs, u, gamma, beta);
      const Vec2 g = mixed_norm_gradient(obs, u, gamma);
      REQUIRE(std::abs(step.x - (u.x - 0.5 * beta * g.x)) < 1e-12);
      REQUIRE(std::abs(step.y - (u.y - 0.5 * beta * g.y)) < 1e-12);
    }
  }
}

TEST_SUITE("solve_update") {
  TEST_CASE("zero observations are a fixed point") {
    std::mt19937_64 rng(4);
    auto obs = oracle::random_system(rng, 9);
    std::fill(obs.z.begin(), obs.z.end(), 0.0);
    for (NormMode mode : {NormMode::kLms, NormMode::kLmf, NormMode::kAdaptive}) {
      SolverConfig c;
      c.mode = mode;
      const auto r = solve_update(obs, c);
      CHECK(r.u == Vec2{0.0, 0.0});
      CHECK(r.iters == 1);
      CHECK(r.converged);
    }
  }

  TEST_CASE("lms reaches the least-squares solution") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const auto obs = well_conditioned(rng);
      const auto r = solve_update(obs, tight(NormMode::kLms));
      REQUIRE(dist(r.u, oracle::least_squares(obs)) < 1e-6);
      REQUIRE(r.iters <= 500);
    }
  }

  TEST_CASE("lms minimizer is invariant to a common scale of z and G") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      const auto obs = well_conditioned(rng);
      for (double s : {0.01, 7.0}) {
        auto scaled = obs;
        for (auto& z : scaled.z) z *= s;
        for (auto& g : scaled.G) g = {g.x * s, g.y * s};
        const auto r = solve_update(scaled, tight(NormMode::kLms));
        REQUIRE(dist(r.u, oracle::least_squares(obs)) < 1e-6);
      }
    }
  }

  TEST_CASE("lmf reaches the quartic minimum") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
      const auto obs = well_conditioned(rng, 5);
      const auto r = solve_update(obs, tight(NormMode::kLmf, 5000));
      const double best = oracle::quartic_minimum(obs);
      REQUIRE(std::abs(r.final_cost - best) < 1e-8);
    }
  }

  TEST_CASE("final cost never exceeds the starting cost") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
      // Large observations stress the quartic term.
      const auto obs = oracle::random_system(rng, 9, -4.0, 4.0);
      for (NormMode mode : {NormMode::kLms, NormMode::kLmf, NormMode::kAdaptive}) {
        SolverConfig c;
        c.mode = mode;
        c.beta0 = 5.0;
        const auto r = solve_update(obs, c);
        REQUIRE(r.final_cost <= r.initial_cost);
        REQUIRE(r.final_cost >= 0.0);
        REQUIRE(r.iters <= c.max_iters);
      }
    }
  }

  TEST_CASE("adaptive with pinned gamma reproduces the fixed modes exactly") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const auto obs = oracle::random_system(rng, 9);
      SolverConfig adaptive;
      adaptive.mode = NormMode::kAdaptive;
      SolverConfig lms = adaptive, lmf = adaptive;
      lms.mode = NormMode::kLms;
      lmf.mode = NormMode::kLmf;

      const auto a0 = solve_update(obs, adaptive, fixed_gamma(0.0));
      const auto l0 = solve_update(obs, lms);
      REQUIRE(a0.u == l0.u);
      REQUIRE(a0.iters == l0.iters);

      const auto a1 = solve_update(obs, adaptive, fixed_gamma(1.0));
      const auto l1 = solve_update(obs, lmf);
      REQUIRE(a1.u == l1.u);
      REQUIRE(a1.final_cost == l1.final_cost);
    }
  }

  TEST_CASE("adaptive gamma trace follows the residual kurtosis") {
    std::mt19937_64 rng(10);
    auto obs = oracle::random_system(rng, 9);
    SolverConfig c;
    const auto r = solve_update(obs, c);
    REQUIRE(r.gamma_trace.size() == static_cast<std::size_t>(r.iters));
    const double chi0 = window_kurtosis_or_neutral(obs.z, KurtosisMode::kResidual);
    CHECK(r.gamma_trace.front() == doctest::Approx(gamma_of_kurtosis(chi0, c.gamma)));
    for (double g : r.gamma_trace) {
      CHECK(g > 0.0);
      CHECK(g < 1.0);
    }
  }

  TEST_CASE("non-finite input is reported") {
    std::mt19937_64 rng(11);
    auto obs = oracle::random_system(rng, 9);
    obs.z[3] = NAN;
    CHECK_THROWS_AS(solve_update(obs, SolverConfig{}), NumericalError);
  }

  TEST_CASE("invalid configuration is rejected") {
    std::mt19937_64 rng(12);
    const auto obs = oracle::random_system(rng, 9);
    SolverConfig c;
    c.beta0 = 0.0;
    CHECK_THROWS_AS(solve_update(obs, c), InvalidArgument);
    c = {};
    c.max_iters = 0;
    CHECK_THROWS_AS(solve_update(obs, c), InvalidArgument);
    c = {};
    c.gamma.A = -1.0;
    CHECK_THROWS_AS(solve_update(obs, c), InvalidArgument);
  }
}

TEST_CASE("linearized model predicts the DFD for a small sub-pixel motion") {
  // On a ramp the first-order model is exact: z_j(d_pred) = G_j . (d - d_pred).
  Image ramp(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) ramp(x, y) = 0.02 * x + 0.01 * y;
  const Vec2 d{0.4, -0.3};
  FlowField truth(16, 16, d);
  const Image current = motion_compensate(ramp, truth);
  const auto obs = assemble(current, ramp, {8, 8}, {0, 0}, Window::centered(3));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    CHECK(obs.z[i] == doctest::Approx(obs.G[i].x * d.x + obs.G[i].y * d.y).epsilon(1e-12));
  }
}
