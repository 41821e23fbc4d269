#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>

#include "mnflow/errors.hpp"
#include "mnflow/pelrec.hpp"

namespace mnflow {

namespace {

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::vector<char>& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

void put_f32(std::vector<char>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

float get_f32(const std::vector<char>& in, std::size_t offset) {
  return std::bit_cast<float>(get_u32(in, offset));
}

std::array<std::uint8_t, 3> hsv_white_value(double hue_deg, double saturation) {
  // V = 1: each channel is 1 - s * k(h), k the standard HSV hexcone ramp.
  auto channel = [&](double n) {
    const double k = std::fmod(n + hue_deg / 60.0, 6.0);
    const double ramp = std::clamp(std::min(k, 4.0 - k), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::round(255.0 * (1.0 - saturation * ramp)));
  };
  return {channel(5.0), channel(3.0), channel(1.0)};
}

double resolve_max_magnitude(const FlowField& flow, double max_mag) {
  if (max_mag > 0.0) return max_mag;
  double largest = 0.0;
  for (const Vec2 d : flow.vectors()) largest = std::max(largest, std::hypot(d.x, d.y));
  return largest;
}

void color_pixel(const FlowField& flow, double max_mag, std::size_t i, RgbImage& out) {
  const Vec2 d = flow.vectors()[i];
  const double mag = std::hypot(d.x, d.y);
  double hue = 0.0;
  double sat = 0.0;
  if (mag > 0.0 && max_mag > 0.0) {
    hue = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
    if (hue < 0.0) hue += 360.0;
    sat = std::min(mag / max_mag, 1.0);
  }
  const auto rgb = hsv_white_value(hue, sat);
  std::copy(rgb.begin(), rgb.end(), out.rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
}

RgbImage blank_like(const FlowField& flow) {
  RgbImage out;
  out.width = flow.width();
  out.height = flow.height();
  out.rgb.assign(3 * flow.size(), 255);
  return out;
}

}  // namespace

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  std::vector<char> bytes;
  bytes.reserve(12 + 8 * flow.size());
  put_f32(bytes, kFloSentinel);
  put_u32(bytes, static_cast<std::uint32_t>(flow.width()));
  put_u32(bytes, static_cast<std::uint32_t>(flow.height()));
  for (const Vec2 d : flow.vectors()) {
    put_f32(bytes, static_cast<float>(d.x));
    put_f32(bytes, static_cast<float>(d.y));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

FlowField read_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<char> bytes{std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>()};
  if (bytes.size() < 12) {
    throw FormatError(FormatError::Kind::kTruncated, path.string() + ": flow header truncated");
  }
  if (get_f32(bytes, 0) != kFloSentinel) {
    throw FormatError(FormatError::Kind::kBadSentinel, path.string() + ": bad flow sentinel");
  }
  const auto width = static_cast<std::int32_t>(get_u32(bytes, 4));
  const auto height = static_cast<std::int32_t>(get_u32(bytes, 8));
  if (width <= 0 || height <= 0) {
    throw FormatError(FormatError::Kind::kBadHeader, path.string() + ": bad flow dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if ((bytes.size() - 12) / 8 < count) {
    throw FormatError(FormatError::Kind::kTruncated, path.string() + ": flow payload truncated");
  }

  FlowField flow(width, height);
  auto vectors = flow.vectors();
  for (std::size_t i = 0; i < count; ++i) {
    vectors[i] = {get_f32(bytes, 12 + 8 * i), get_f32(bytes, 16 + 8 * i)};
  }
  return flow;
}

RgbImage flow_to_color(const FlowField& flow, double max_mag) {
  const double scale = resolve_max_magnitude(flow, max_mag);
  RgbImage out = blank_like(flow);
  const auto n = static_cast<std::ptrdiff_t>(flow.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    color_pixel(flow, scale, static_cast<std::size_t>(i), out);
  }
  return out;
}

RgbImage flow_to_color_serial(const FlowField& flow, double max_mag) {
  const double scale = resolve_max_magnitude(flow, max_mag);
  RgbImage out = blank_like(flow);
  for (std::size_t i = 0; i < flow.size(); ++i) color_pixel(flow, scale, i, out);
  return out;
}

}  // namespace mnflow
