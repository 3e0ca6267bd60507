#pragma once

#include <algorithm>

#include "lfpb/error.hpp"

namespace lfpb {

template <typename A, typename B>
void require_same_shape(const Plane<A>& a, const Plane<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DataError(std::string(what) + ": dimension mismatch (" +
                    shape_string(a.width, a.height) + " vs " +
                    shape_string(b.width, b.height) + ")");
  }
}

template <typename T>
Plane<T> crop(const Plane<T>& img, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 0 || height < 0 || x0 + width > img.width ||
      y0 + height > img.height) {
    throw DataError("crop rectangle outside " + shape_string(img.width, img.height));
  }
  Plane<T> out(width, height);
  for (int y = 0; y < height; ++y) {
    std::copy_n(img.row(y0 + y) + x0, width, out.row(y));
  }
  return out;
}

}  // namespace lfpb
