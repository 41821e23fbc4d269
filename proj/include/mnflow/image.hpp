#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mnflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

/// Integer working point (column x, row y).
struct PixelCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Single-channel intensity grid stored row-major. Intensities loaded from
/// 8-bit files live in [0,1]; noisy frames may leave that range.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> pixels() noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Dense displacement field: one (d_x, d_y) per pixel, in pixels.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height, Vec2 fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  const Vec2& operator()(int x, int y) const { return vectors_[index(x, y)]; }
  Vec2& operator()(int x, int y) { return vectors_[index(x, y)]; }

  std::span<const Vec2> vectors() const noexcept { return vectors_; }
  std::span<Vec2> vectors() noexcept { return vectors_; }

  bool matches(const Image& image) const noexcept {
    return width_ == image.width() && height_ == image.height();
  }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Vec2> vectors_;
};

/// Bilinear interpolation of the continuous intensity surface. Coordinates
/// outside the grid are clamped to the border (replicate padding), so the
/// function is total. Integer coordinates return the stored value exactly.
double bilinear_sample(const Image& image, double x, double y);

/// Central difference of the bilinear surface with half-pixel step.
Vec2 spatial_gradient(const Image& image, double x, double y);

/// Displaced frame difference I_k(r) - I_{k-1}(r - d).
double dfd(const Image& frame_k, const Image& frame_km1, PixelCoord r, Vec2 d);

/// Backward warp: out(r) = I_{k-1}(r - d(r)). Parallel over rows.
Image motion_compensate(const Image& frame_km1, const FlowField& flow);

/// Single-threaded reference for motion_compensate.
Image motion_compensate_serial(const Image& frame_km1, const FlowField& flow);

/// Integer translation with border replication: out(x, y) = in(x - dx, y - dy).
Image shift_image(const Image& image, int dx, int dy);

}  // namespace mnflow
