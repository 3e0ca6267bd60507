#include "lfpb/warp.hpp"

#include <cmath>

#include "lfpb/error.hpp"
#include "lfpb/parallel.hpp"

namespace lfpb {

namespace {
constexpr double kMinSplatWeight = 1e-3;
}

ForwardWarpResult forward_warp(const Image& view, const FlowField& flow) {
  require_same_shape(view, flow.u, "forward_warp");
  const int w = view.width;
  const int h = view.height;
  std::vector<double> value(view.size(), 0.0);
  std::vector<double> weight(view.size(), 0.0);
  auto splat = [&](int x, int y, double wgt, double val) {
    if (wgt <= 0.0 || x < 0 || y < 0 || x >= w || y >= h) return;
    const std::size_t k = static_cast<std::size_t>(y) * w + x;
    value[k] += wgt * val;
    weight[k] += wgt;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!flow.valid.at(x, y)) continue;
      const double tx = x + static_cast<double>(flow.u.at(x, y));
      const double ty = y + static_cast<double>(flow.v.at(x, y));
      if (!std::isfinite(tx) || !std::isfinite(ty)) continue;
      const int x0 = static_cast<int>(std::floor(tx));
      const int y0 = static_cast<int>(std::floor(ty));
      const double fx = tx - x0;
      const double fy = ty - y0;
      const double s = view.at(x, y);
      splat(x0, y0, (1.0 - fx) * (1.0 - fy), s);
      splat(x0 + 1, y0, fx * (1.0 - fy), s);
      splat(x0, y0 + 1, (1.0 - fx) * fy, s);
      splat(x0 + 1, y0 + 1, fx * fy, s);
    }
  }
  ForwardWarpResult out{Image(w, h), WarpMask{Mask(w, h, 0)}};
  for (std::size_t k = 0; k < view.size(); ++k) {
    if (weight[k] >= kMinSplatWeight) {
      out.image.data[k] = static_cast<float>(value[k] / weight[k]);
      out.mask.filled.data[k] = 1;
    }
  }
  return out;
}

InverseWarpResult inverse_warp(const Image& view, const FlowField& flow) {
  require_same_shape(view, flow.u, "inverse_warp");
  InverseWarpResult out{Image(view.width, view.height), Mask(view.width, view.height, 0)};
  const double max_x = view.width - 1;
  const double max_y = view.height - 1;
  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      const double sx = x + static_cast<double>(flow.u.at(x, y));
      const double sy = y + static_cast<double>(flow.v.at(x, y));
      out.image.at(x, y) = sample_bilinear(view, sx, sy);
      out.out_of_frame.at(x, y) = !(sx >= 0.0 && sy >= 0.0 && sx <= max_x && sy <= max_y);
    }
  }
  return out;
}

AlignResult align(const LightField& lf, const FlowSet& flows) {
  lf.validate();
  if (static_cast<int>(flows.flows.size()) != lf.view_count()) {
    throw DataError("align: " + std::to_string(flows.flows.size()) + " flows for " +
                    std::to_string(lf.view_count()) + " views");
  }
  AlignResult out;
  out.aligned = lf;
  out.masks.resize(lf.view_count());
  const Image& center = lf.views[lf.center_index()];
  parallel_for(lf.view_count(), [&](int i) {
    ForwardWarpResult fw = forward_warp(lf.views[i], flows.flows[i]);
    for (std::size_t k = 0; k < fw.image.size(); ++k) {
      if (!fw.mask.filled.data[k]) fw.image.data[k] = center.data[k];
    }
    out.aligned.views[i] = std::move(fw.image);
    out.masks[i] = std::move(fw.mask);
  });
  return out;
}

double view_variance(const std::vector<Image>& views) {
  if (views.size() < 2) throw DataError("view_variance needs at least two views");
  const std::size_t m = views.front().size();
  for (const Image& v : views) require_same_shape(views.front(), v, "view_variance");
  const double n = static_cast<double>(views.size());
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    for (const Image& v : views) sum += 255.0 * v.data[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const Image& v : views) {
      const double d = 255.0 * v.data[k] - mean;
      ss += d * d;
    }
    total += ss / n;
  }
  return total / static_cast<double>(m);
}

double view_variance(const LightField& lf) {
  lf.validate();
  return view_variance(lf.views);
}

}  // namespace lfpb
