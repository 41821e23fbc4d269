#pragma once

#include <cstdint>

#include "mnflow/image.hpp"

namespace mnflow {

/// Smooth random texture in [0.1, 0.9]: white noise blurred with a separable
/// Gaussian of the given sigma (pixels), then range-normalized.
Image textured_frame(int width, int height, std::uint64_t seed, double sigma = 1.5);

/// Previous/current pair where the current frame is the previous one
/// translated by (dx, dy) whole pixels.
struct FramePair {
  Image previous;
  Image current;
};

FramePair shifted_pair(int width, int height, int dx, int dy, std::uint64_t seed);

}  // namespace mnflow
