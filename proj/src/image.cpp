#include "mnflow/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

void check_flow(const Image& frame, const FlowField& flow) {
  if (!flow.matches(frame)) {
    throw InvalidArgument("flow field dimensions do not match the frame");
  }
}

double compensated_pixel(const Image& frame, const FlowField& flow, int x, int y) {
  const Vec2 d = flow(x, y);
  return bilinear_sample(frame, x - d.x, y - d.y);
}

}  // namespace

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("image data length does not equal width*height");
  }
}

FlowField::FlowField(int width, int height, Vec2 fill) : width_(width), height_(height) {
  check_dims(width, height);
  vectors_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

double bilinear_sample(const Image& image, double x, double y) {
  const double max_x = image.width() - 1;
  const double max_y = image.height() - 1;
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);

  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, image.width() - 1);
  const int y1 = std::min(y0 + 1, image.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;

  const double top = image(x0, y0) + fx * (image(x1, y0) - image(x0, y0));
  if (fy == 0.0) return top;
  const double bottom = image(x0, y1) + fx * (image(x1, y1) - image(x0, y1));
  return top + fy * (bottom - top);
}

Vec2 spatial_gradient(const Image& image, double x, double y) {
  constexpr double h = 0.5;
  const double gx =
      (bilinear_sample(image, x + h, y) - bilinear_sample(image, x - h, y)) / (2.0 * h);
  const double gy =
      (bilinear_sample(image, x, y + h) - bilinear_sample(image, x, y - h)) / (2.0 * h);
  return {gx, gy};
}

double dfd(const Image& frame_k, const Image& frame_km1, PixelCoord r, Vec2 d) {
  // r may sit outside frame_k when a window straddles the border; the clamped
  // sampler returns the replicated edge value and is exact at integers.
  const double current = bilinear_sample(frame_k, r.x, r.y);
  return current - bilinear_sample(frame_km1, r.x - d.x, r.y - d.y);
}

Image motion_compensate(const Image& frame_km1, const FlowField& flow) {
  check_flow(frame_km1, flow);
  Image out(frame_km1.width(), frame_km1.height());
  const int height = frame_km1.height();
  const int width = frame_km1.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out(x, y) = compensated_pixel(frame_km1, flow, x, y);
    }
  }
  return out;
}

Image motion_compensate_serial(const Image& frame_km1, const FlowField& flow) {
  check_flow(frame_km1, flow);
  Image out(frame_km1.width(), frame_km1.height());
  for (int y = 0; y < frame_km1.height(); ++y) {
    for (int x = 0; x < frame_km1.width(); ++x) {
      out(x, y) = compensated_pixel(frame_km1, flow, x, y);
    }
  }
  return out;
}

Image shift_image(const Image& image, int dx, int dy) {
  Image out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const int sx = std::clamp(x - dx, 0, image.width() - 1);
      const int sy = std::clamp(y - dy, 0, image.height() - 1);
      out(x, y) = image(sx, sy);
    }
  }
  return out;
}

}  // namespace mnflow
