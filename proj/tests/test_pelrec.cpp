#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "mnflow/errors.hpp"
#include "mnflow/noise.hpp"
#include "mnflow/pelrec.hpp"
#include "mnflow/synthetic.hpp"
#include "oracles.hpp"

using namespace mnflow;

namespace {

double interior_endpoint_error(const FlowField& flow, Vec2 truth, int margin) {
  double total = 0.0;
  int count = 0;
  for (int y = margin; y < flow.height() - margin; ++y) {
    for (int x = margin; x < flow.width() - margin; ++x) {
      total += std::hypot(flow(x, y).x - truth.x, flow(x, y).y - truth.y);
      ++count;
    }
  }
  return total / count;
}

}  // namespace

TEST_SUITE("predict_displacement") {
  TEST_CASE("first pixel has no causal neighbors") {
    const FlowField f(4, 4, {3.0, 3.0});
    for (Prediction p : {Prediction::kCausalAverage, Prediction::kPreviousPixel, Prediction::kZero}) {
      CHECK(predict_displacement(f, {0, 0}, p) == Vec2{0, 0});
    }
  }

  TEST_CASE("causal average of four equal neighbors") {
    const FlowField f(4, 4, {1.0, 0.0});
    CHECK(predict_displacement(f, {1, 1}, Prediction::kCausalAverage) == Vec2{1.0, 0.0});
  }

  TEST_CASE("edge pixel averages the neighbors that exist") {
    // r = (3, 1) on a 4-wide field: west (2,1), north-west (2,0), north (3,0); no north-east.
    FlowField f(4, 4);
    f(2, 1) = {1.0, 0.0};
    f(2, 0) = {0.0, 1.0};
    f(3, 0) = {0.5, 0.5};
    const Vec2 p = predict_displacement(f, {3, 1}, Prediction::kCausalAverage);
    CHECK(p.x == doctest::Approx(0.5));
    CHECK(p.y == doctest::Approx(0.5));

    // Left column, second row: north and north-east only.
    FlowField g(4, 4);
    g(0, 0) = {1.0, 0.0};
    g(1, 0) = {0.0, 1.0};
    const Vec2 q = predict_displacement(g, {0, 1}, Prediction::kCausalAverage);
    CHECK(q.x == doctest::Approx(0.5));
    CHECK(q.y == doctest::Approx(0.5));
  }

  TEST_CASE("previous pixel and zero rules") {
    FlowField f(4, 4);
    f(1, 2) = {2.0, -1.0};
    CHECK(predict_displacement(f, {2, 2}, Prediction::kPreviousPixel) == Vec2{2.0, -1.0});
    CHECK(predict_displacement(f, {2, 2}, Prediction::kZero) == Vec2{0.0, 0.0});
  }
}

TEST_SUITE("estimate_flow") {
  TEST_CASE("identical frames give zero flow") {
    const Image img = textured_frame(24, 24, 1);
    for (NormMode mode : {NormMode::kLms, NormMode::kLmf, NormMode::kAdaptive}) {
      PelRecConfig c;
      c.solver.mode = mode;
      const auto est = estimate_flow(img, img, c);
      for (const Vec2 d : est.flow.vectors()) {
        REQUIRE(std::abs(d.x) < c.solver.tol);
        REQUIRE(std::abs(d.y) < c.solver.tol);
      }
    }
  }

  TEST_CASE("one-pixel shift is recovered in the interior") {
    const FramePair pair = shifted_pair(64, 64, 1, 0, 17);
    const auto est = estimate_flow(pair.current, pair.previous, PelRecConfig{});
    CHECK(interior_endpoint_error(est.flow, {1.0, 0.0}, 4) < 0.3);
    CHECK(est.diagnostics.mean_abs_dfd_after < est.diagnostics.mean_abs_dfd_before);
  }

  TEST_CASE("estimated flow beats zero-flow compensation by 5 dB") {
    const FramePair pair = shifted_pair(64, 64, 1, 0, 23);
    const auto est = estimate_flow(pair.current, pair.previous, PelRecConfig{});
    const double with_flow = snr_between(pair.current, motion_compensate(pair.previous, est.flow)).psnr_db;
    const double zero_flow = snr_between(pair.current, pair.previous).psnr_db;
    CHECK(with_flow >= zero_flow + 5.0);
  }

  TEST_CASE("d_max clamp is honored") {
    const FramePair pair = shifted_pair(40, 40, 5, 0, 2);
    PelRecConfig c;
    c.d_max = 2.0;
    c.solver.beta0 = 10.0;
    const auto est = estimate_flow(pair.current, pair.previous, c);
    for (const Vec2 d : est.flow.vectors()) {
      REQUIRE(std::abs(d.x) <= 2.0);
      REQUIRE(std::abs(d.y) <= 2.0);
    }
  }

  TEST_CASE("deterministic") {
    const FramePair pair = shifted_pair(32, 32, 1, 1, 5);
    const Image noisy = degrade_to_snr(pair.current, Distribution::kLaplacian, 20.0, 1).noisy;
    CHECK(estimate_flow(noisy, pair.previous, {}).flow == estimate_flow(noisy, pair.previous, {}).flow);
  }

  TEST_CASE("no hidden lookahead: each pixel depends only on earlier pixels") {
    const FramePair pair = shifted_pair(20, 16, 1, 0, 8);
    const Image noisy = degrade_to_snr(pair.current, Distribution::kUniform, 20.0, 3).noisy;
    for (const auto shape : {WindowShape::kCentered, WindowShape::kCausal}) {
      PelRecConfig c;
      c.window_shape = shape;
      const FlowField full = estimate_flow(noisy, pair.previous, c).flow;
      std::mt19937_64 rng(1);
      std::uniform_int_distribution<int> px(0, 19), py(0, 15);
      for (int trial = 0; trial < 40; ++trial) {
        const PixelCoord r{px(rng), py(rng)};
        // Later pixels get garbage; the result must not change.
        FlowField partial(20, 16, {9.0, -9.0});
        for (int y = 0; y < 16; ++y)
          for (int x = 0; x < 20; ++x)
            if (y < r.y || (y == r.y && x < r.x)) partial(x, y) = full(x, y);
        REQUIRE(estimate_pixel(noisy, pair.previous, partial, r, c) == full(r.x, r.y));
      }
    }
  }

  TEST_CASE("literal kurtosis mode runs and keeps gamma above one half") {
    // Raw intensities are all positive, so the uncentered estimator is <= -2.
    const FramePair pair = shifted_pair(24, 24, 1, 0, 9);
    PelRecConfig c;
    c.solver.kurtosis_mode = KurtosisMode::kLiteralIntensity;
    const auto est = estimate_flow(pair.current, pair.previous, c);
    CHECK(est.diagnostics.mean_gamma > 0.5);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(estimate_flow(Image(8, 8), Image(8, 9), {}), InvalidArgument);
    PelRecConfig c;
    c.window_side = 4;
    CHECK_THROWS_AS(estimate_flow(Image(8, 8), Image(8, 8), c), InvalidArgument);
    c = {};
    c.d_max = 0.0;
    CHECK_THROWS_AS(estimate_flow(Image(8, 8), Image(8, 8), c), InvalidArgument);
  }
}

TEST_SUITE("flo") {
  TEST_CASE("write then read is bit-exact") {
    const auto dir = oracle::scratch_dir("flo_roundtrip");
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> dim(1, 20);
    std::uniform_real_distribution<float> v(-50.0f, 50.0f);
    for (int trial = 0; trial < 100; ++trial) {
      FlowField f(dim(rng), dim(rng));
      for (auto& d : f.vectors()) d = {v(rng), v(rng)};
      write_flo(f, dir / "f.flo");
      REQUIRE(read_flo(dir / "f.flo") == f);
    }
  }

  TEST_CASE("golden layout") {
    const auto dir = oracle::scratch_dir("flo_golden");
    FlowField f(2, 1);
    f(0, 0) = {1.0, 2.0};
    f(1, 0) = {3.0, 4.0};
    write_flo(f, dir / "f.flo");
    // 202021.25f = 0x49424854 ("PIEH" in little-endian byte order).
    const std::vector<unsigned char> golden{
        'P', 'I', 'E', 'H', 2, 0, 0, 0, 1, 0, 0, 0,
        0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0x40,
        0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x80, 0x40};
    CHECK(oracle::file_bytes(dir / "f.flo") == golden);
  }

  TEST_CASE("bad sentinel and truncation") {
    const auto dir = oracle::scratch_dir("flo_errors");
    oracle::write_bytes(dir / "zero.flo", std::string(20, '\0'));
    try {
      read_flo(dir / "zero.flo");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.kind() == FormatError::Kind::kBadSentinel);
    }
    oracle::write_bytes(dir / "short.flo", std::string("PIEH\x02\x00\x00\x00\x01\x00\x00\x00\x00\x00", 14));
    try {
      read_flo(dir / "short.flo");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.kind() == FormatError::Kind::kTruncated);
    }
  }
}

TEST_SUITE("flow_to_color") {
  TEST_CASE("zero flow is white") {
    const RgbImage img = flow_to_color(FlowField(5, 3));
    for (auto b : img.rgb) REQUIRE(b == 255);
  }

  TEST_CASE("antiparallel vectors get complementary hues at equal saturation") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    for (int trial = 0; trial < 100; ++trial) {
      const double a = angle(rng);
      FlowField f(2, 1);
      f(0, 0) = {std::cos(a), std::sin(a)};
      f(1, 0) = {-std::cos(a), -std::sin(a)};
      const RgbImage img = flow_to_color(f, 2.0);
      // With full value, complementary channels sum to 2 - s (in 255 units).
      const int r = img.rgb[0] + img.rgb[3];
      const int g = img.rgb[1] + img.rgb[4];
      const int b = img.rgb[2] + img.rgb[5];
      REQUIRE(std::abs(r - g) <= 1);
      REQUIRE(std::abs(g - b) <= 1);
      REQUIRE(std::abs(r - static_cast<int>(std::lround(255 * 1.5))) <= 1);
    }
  }

  TEST_CASE("magnitude at max_mag saturates fully") {
    FlowField f(3, 1);
    f(0, 0) = {2.0, 0.0};  // pure red direction
    f(1, 0) = {10.0, 0.0};  // clamped
    f(2, 0) = {1.0, 0.0};  // half saturation
    const RgbImage img = flow_to_color(f, 2.0);
    CHECK(img.rgb[0] == 255);
    CHECK(img.rgb[1] == 0);
    CHECK(img.rgb[2] == 0);
    CHECK(img.rgb[3] == 255);
    CHECK(img.rgb[4] == 0);
    CHECK(img.rgb[7] == 128);
  }

  TEST_CASE("parallel matches serial") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-4.0, 4.0);
    FlowField f(31, 17);
    for (auto& v : f.vectors()) v = {d(rng), d(rng)};
    CHECK(flow_to_color(f).rgb == flow_to_color_serial(f).rgb);
  }
}
