#include "lfpb/image.hpp"

#include <algorithm>
#include <cmath>

namespace lfpb {

std::string shape_string(int width, int height) {
  return std::to_string(width) + "x" + std::to_string(height);
}

float sample_bilinear(const Image& img, double x, double y) {
  const double cx = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;
  const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

void clamp_inplace(Image& img, float lo, float hi) {
  for (float& v : img.data) v = std::clamp(v, lo, hi);
}


}  // namespace lfpb
