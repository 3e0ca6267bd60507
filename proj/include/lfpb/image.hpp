#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lfpb {

/// Dense 2-D grid stored row-major: element (x, y) lives at y * width + x.
template <typename T>
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  T* row(int y) { return data.data() + static_cast<std::size_t>(y) * width; }
  const T* row(int y) const {
    return data.data() + static_cast<std::size_t>(y) * width;
  }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  template <typename U>
  bool same_shape(const Plane<U>& other) const {
    return width == other.width && height == other.height;
  }

  bool operator==(const Plane&) const = default;
};

/// Single-channel image with samples nominally in [0, 1].
using Image = Plane<float>;
using Mask = Plane<std::uint8_t>;

std::string shape_string(int width, int height);

template <typename A, typename B>
void require_same_shape(const Plane<A>& a, const Plane<B>& b, const char* what);

/// Edge-replicated bilinear sample at real coordinates.
float sample_bilinear(const Image& img, double x, double y);

/// Clamp all samples into [lo, hi].
void clamp_inplace(Image& img, float lo = 0.0f, float hi = 1.0f);

/// Copy of the rectangle [x0, x0 + width) x [y0, y0 + height).
template <typename T>
Plane<T> crop(const Plane<T>& img, int x0, int y0, int width, int height);

}  // namespace lfpb

#include "lfpb/image_impl.hpp"
