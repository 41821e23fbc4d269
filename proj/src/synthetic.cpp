#include "mnflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

std::vector<double> gaussian_taps(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double t = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = t;
    total += t;
  }
  for (auto& t : taps) t /= total;
  return taps;
}

}  // namespace

Image textured_frame(int width, int height, std::uint64_t seed, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("texture sigma must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image noise(width, height);
  for (auto& v : noise.pixels()) v = unit(rng);

  const auto taps = gaussian_taps(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  Image horizontal(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        s += taps[static_cast<std::size_t>(k + radius)] * noise(std::clamp(x + k, 0, width - 1), y);
      }
      horizontal(x, y) = s;
    }
  }
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        s += taps[static_cast<std::size_t>(k + radius)] *
             horizontal(x, std::clamp(y + k, 0, height - 1));
      }
      out(x, y) = s;
    }
  }

  const auto [lo, hi] = std::minmax_element(out.pixels().begin(), out.pixels().end());
  const double low = *lo;
  const double range = *hi - *lo;
  for (auto& v : out.pixels()) v = range > 0.0 ? 0.1 + 0.8 * (v - low) / range : 0.5;
  return out;
}

FramePair shifted_pair(int width, int height, int dx, int dy, std::uint64_t seed) {
  Image previous = textured_frame(width, height, seed);
  Image current = shift_image(previous, dx, dy);
  return {std::move(previous), std::move(current)};
}

}  // namespace mnflow
