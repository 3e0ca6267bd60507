#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "lfpb/image.hpp"

namespace lfpb {

enum class ColorSpace { luma, rgb };

std::string to_string(ColorSpace cs);
ColorSpace color_space_from_string(const std::string& name);

/// A P x Q grid of equally sized views.
///
/// Views are indexed in row-major raster order, i = s * Q + t, where s is the
/// vertical and t the horizontal angular index. All processing happens on
/// the luma plane stored in `views`; for RGB light fields the BT.601 chroma
/// planes ride along in `cb` / `cr` (centered on 0.5).
struct LightField {
  int rows = 0;  // P
  int cols = 0;  // Q
  ColorSpace color_space = ColorSpace::luma;
  std::vector<Image> views;
  std::vector<Image> cb;
  std::vector<Image> cr;

  LightField() = default;
  LightField(int p, int q, int width, int height, ColorSpace cs = ColorSpace::luma);

  int view_count() const { return rows * cols; }
  int width() const { return views.empty() ? 0 : views.front().width; }
  int height() const { return views.empty() ? 0 : views.front().height; }
  bool has_chroma() const { return color_space == ColorSpace::rgb; }

  int index(int s, int t) const { return s * cols + t; }
  int center_index() const { return view_count() / 2; }
  int center_s() const { return center_index() / cols; }
  int center_t() const { return center_index() % cols; }

  Image& view(int s, int t) { return views[index(s, t)]; }
  const Image& view(int s, int t) const { return views[index(s, t)]; }

  /// Throws DataError when the grid or view shapes are inconsistent.
  void validate() const;
};

/// Matrix form of a light field: column i is the vectorized luma of view i.
///
/// Vectorization is column-major over the view, so pixel (x, y) of a view
/// with height Y maps to row x * Y + y.
struct LFMatrix {
  Eigen::MatrixXd data;
  int width = 0;
  int height = 0;
  int rows = 0;  // P
  int cols = 0;  // Q
};

inline Eigen::Index vec_index(int x, int y, int height) {
  return static_cast<Eigen::Index>(x) * height + y;
}

LFMatrix flatten(const LightField& lf);
LightField unflatten(const LFMatrix& mat);

/// Column j of a basis matrix reshaped back to a view-shaped image.
Image column_to_image(const Eigen::Ref<const Eigen::VectorXd>& column, int width,
                      int height);
Eigen::VectorXd image_to_column(const Image& img);

struct Ycc {
  float y, cb, cr;
};
Ycc rgb_to_ycc(float r, float g, float b);
void ycc_to_rgb(const Ycc& ycc, float& r, float& g, float& b);

}  // namespace lfpb
