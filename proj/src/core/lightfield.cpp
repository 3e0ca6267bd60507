#include "lfpb/lightfield.hpp"

#include <algorithm>
#include <cmath>

#include "lfpb/error.hpp"

namespace lfpb {

std::string to_string(ColorSpace cs) { return cs == ColorSpace::rgb ? "rgb" : "luma"; }

ColorSpace color_space_from_string(const std::string& name) {
  if (name == "luma") return ColorSpace::luma;
  if (name == "rgb") return ColorSpace::rgb;
  throw DataError("unknown color space '" + name + "'");
}

LightField::LightField(int p, int q, int width, int height, ColorSpace cs)
    : rows(p), cols(q), color_space(cs) {
  if (p < 1 || q < 1) throw DataError("light field grid must be at least 1x1");
  views.assign(static_cast<std::size_t>(p) * q, Image(width, height));
  if (cs == ColorSpace::rgb) {
    cb.assign(views.size(), Image(width, height, 0.5f));
    cr.assign(views.size(), Image(width, height, 0.5f));
  }
}

void LightField::validate() const {
  if (rows < 1 || cols < 1) throw DataError("light field grid must be at least 1x1");
  if (static_cast<int>(views.size()) != view_count()) {
    throw DataError("light field holds " + std::to_string(views.size()) +
                    " views, grid needs " + std::to_string(view_count()));
  }
  const int w = views.front().width;
  const int h = views.front().height;
  for (int i = 0; i < view_count(); ++i) {
    if (views[i].width != w || views[i].height != h) {
      throw DataError("view (" + std::to_string(i / cols) + "," +
                      std::to_string(i % cols) + ") is " +
                      shape_string(views[i].width, views[i].height) + ", expected " +
                      shape_string(w, h));
    }
  }
  if (has_chroma()) {
    if (cb.size() != views.size() || cr.size() != views.size()) {
      throw DataError("rgb light field is missing chroma planes");
    }
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (!cb[i].same_shape(views[i]) || !cr[i].same_shape(views[i])) {
        throw DataError("chroma plane shape mismatch");
      }
    }
  }
}

LFMatrix flatten(const LightField& lf) {
  lf.validate();
  LFMatrix mat;
  mat.width = lf.width();
  mat.height = lf.height();
  mat.rows = lf.rows;
  mat.cols = lf.cols;
  mat.data.resize(static_cast<Eigen::Index>(mat.width) * mat.height, lf.view_count());
  for (int i = 0; i < lf.view_count(); ++i) {
    mat.data.col(i) = image_to_column(lf.views[i]);
  }
  return mat;
}

LightField unflatten(const LFMatrix& mat) {
  const Eigen::Index m = static_cast<Eigen::Index>(mat.width) * mat.height;
  const int n = mat.rows * mat.cols;
  if (mat.data.cols() != n) {
    throw DataError("unflatten: view count mismatch (" + std::to_string(mat.data.cols()) +
                    " != " + std::to_string(n) + ")");
  }
  if (mat.data.rows() != m) {
    throw DataError("unflatten: pixel count mismatch (" + std::to_string(mat.data.rows()) +
                    " != " + std::to_string(m) + ")");
  }
  LightField lf;
  lf.rows = mat.rows;
  lf.cols = mat.cols;
  lf.views.reserve(n);
  for (int i = 0; i < n; ++i) {
    lf.views.push_back(column_to_image(mat.data.col(i), mat.width, mat.height));
  }
  return lf;
}

Image column_to_image(const Eigen::Ref<const Eigen::VectorXd>& column, int width,
                      int height) {
  Image img(width, height);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      img.at(x, y) = static_cast<float>(column(vec_index(x, y, height)));
    }
  }
  return img;
}

Eigen::VectorXd image_to_column(const Image& img) {
  Eigen::VectorXd col(static_cast<Eigen::Index>(img.width) * img.height);
  for (int x = 0; x < img.width; ++x) {
    for (int y = 0; y < img.height; ++y) {
      col(vec_index(x, y, img.height)) = img.at(x, y);
    }
  }
  return col;
}

// ITU-R BT.601, full range, chroma offset by 0.5.
Ycc rgb_to_ycc(float r, float g, float b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  const double cb = 0.5 + (b - y) / 1.772;
  const double cr = 0.5 + (r - y) / 1.402;
  return {static_cast<float>(y), static_cast<float>(cb), static_cast<float>(cr)};
}

void ycc_to_rgb(const Ycc& ycc, float& r, float& g, float& b) {
  const double y = ycc.y;
  const double cb = ycc.cb - 0.5;
  const double cr = ycc.cr - 0.5;
  const double rr = y + 1.402 * cr;
  const double bb = y + 1.772 * cb;
  const double gg = (y - 0.299 * rr - 0.114 * bb) / 0.587;
  r = static_cast<float>(rr);
  g = static_cast<float>(gg);
  b = static_cast<float>(bb);
}

}  // namespace lfpb
