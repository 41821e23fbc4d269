#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mnflow/image.hpp"

namespace mnflow {

/// Interleaved 8-bit RGB raster, written as binary PPM.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height bytes
};

/// Reads a binary P5 file with maxval 255; intensities are scaled to [0,1].
/// Throws FormatError (bad magic, bad header, maxval != 255, truncated
/// payload) or IoError.
Image load_pgm(const std::filesystem::path& path);

/// Writes a P5 file; each value becomes round(clamp(v, 0, 1) * 255) with
/// halves rounded away from zero.
void save_pgm(const Image& image, const std::filesystem::path& path);

/// Byte that save_pgm writes for a given intensity.
std::uint8_t quantize(double value);

void save_ppm(const RgbImage& image, const std::filesystem::path& path);

}  // namespace mnflow
