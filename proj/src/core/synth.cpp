#include "lfpb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lfpb/error.hpp"

namespace lfpb {

namespace {

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

}  // namespace

Image value_noise(int width, int height, std::uint64_t seed, int octaves,
                  double finest_cell) {
  if (width < 1 || height < 1) throw UsageError("value_noise: empty size");
  std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
  for (int o = 0; o < octaves; ++o) {
    const double cell = finest_cell * std::pow(2.0, o);
    const double amplitude = std::pow(2.0, o);
    const int gw = static_cast<int>(std::ceil(width / cell)) + 2;
    const int gh = static_cast<int>(std::ceil(height / cell)) + 2;
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(o) * 7919ULL + 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
    for (double& v : lattice) v = uni(rng);
    for (int y = 0; y < height; ++y) {
      const double gy = y / cell;
      const int iy = static_cast<int>(gy);
      const double fy = fade(gy - iy);
      for (int x = 0; x < width; ++x) {
        const double gx = x / cell;
        const int ix = static_cast<int>(gx);
        const double fx = fade(gx - ix);
        auto l = [&](int a, int b) { return lattice[static_cast<std::size_t>(b) * gw + a]; };
        const double top = l(ix, iy) + fx * (l(ix + 1, iy) - l(ix, iy));
        const double bot = l(ix, iy + 1) + fx * (l(ix + 1, iy + 1) - l(ix, iy + 1));
        acc[static_cast<std::size_t>(y) * width + x] += amplitude * (top + fy * (bot - top));
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  const double range = std::max(*hi - *lo, 1e-12);
  Image img(width, height);
  for (std::size_t k = 0; k < acc.size(); ++k) {
    img.data[k] = static_cast<float>(0.1 + 0.8 * (acc[k] - *lo) / range);
  }
  return img;
}

namespace {

struct GridGeometry {
  int margin;
  int width;
  int height;
  int sc;
  int tc;
};

GridGeometry geometry(int base_w, int base_h, int rows, int cols, double max_disparity) {
  const int margin = translational_margin(rows, cols, max_disparity);
  const int n = rows * cols;
  const int sc = (n / 2) / cols;
  const int tc = (n / 2) % cols;
  const int w = base_w - 2 * margin;
  const int h = base_h - 2 * margin;
  if (w < 1 || h < 1) {
    throw DataError("synthetic crop exhausts the base image (" + shape_string(base_w, base_h) +
                    " with margin " + std::to_string(margin) + ")");
  }
  return {margin, w, h, sc, tc};
}

}  // namespace

int translational_margin(int rows, int cols, double disparity) {
  if (rows < 1 || cols < 1) throw UsageError("synthetic grid must be at least 1x1");
  const int n = rows * cols;
  const int sc = (n / 2) / cols;
  const int tc = (n / 2) % cols;
  const int reach = std::max({sc, rows - 1 - sc, tc, cols - 1 - tc});
  return static_cast<int>(std::ceil(std::abs(disparity) * reach - 1e-9));
}

SyntheticLightField synth_translational(const Image& base, int rows, int cols,
                                        double disparity) {
  const GridGeometry g = geometry(base.width, base.height, rows, cols, disparity);
  SyntheticLightField out;
  out.lf = LightField(rows, cols, g.width, g.height);
  out.flows.flows.resize(out.lf.view_count());
  for (int s = 0; s < rows; ++s) {
    for (int t = 0; t < cols; ++t) {
      const double dx = disparity * (t - g.tc);
      const double dy = disparity * (s - g.sc);
      Image& view = out.lf.view(s, t);
      FlowField flow = FlowField::uniform(g.width, g.height, static_cast<float>(-dx),
                                          static_cast<float>(-dy));
      for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
          view.at(x, y) = sample_bilinear(base, x + g.margin - dx, y + g.margin - dy);
          const double tx = x - dx;
          const double ty = y - dy;
          flow.valid.at(x, y) =
              tx >= 0.0 && ty >= 0.0 && tx <= g.width - 1 && ty <= g.height - 1;
        }
      }
      out.flows.flows[out.lf.index(s, t)] = std::move(flow);
    }
  }
  return out;
}

SyntheticLightField synth_layered(const LayeredScene& scene, int rows, int cols) {
  require_same_shape(scene.background, scene.foreground, "synth_layered");
  require_same_shape(scene.background, scene.foreground_mask, "synth_layered");
  const double dmax =
      std::max(std::abs(scene.background_disparity), std::abs(scene.foreground_disparity));
  const GridGeometry g =
      geometry(scene.background.width, scene.background.height, rows, cols, dmax);
  Image mask_f(scene.foreground_mask.width, scene.foreground_mask.height);
  for (std::size_t k = 0; k < mask_f.size(); ++k) {
    mask_f.data[k] = scene.foreground_mask.data[k] ? 1.0f : 0.0f;
  }
  auto fg_at = [&](double bx, double by) { return sample_bilinear(mask_f, bx, by) >= 0.5f; };

  SyntheticLightField out;
  out.lf = LightField(rows, cols, g.width, g.height);
  out.flows.flows.resize(out.lf.view_count());
  for (int s = 0; s < rows; ++s) {
    for (int t = 0; t < cols; ++t) {
      const double kx = t - g.tc;
      const double ky = s - g.sc;
      const double gain = 1.0 + scene.shading * (kx / cols + ky / rows);
      Image& view = out.lf.view(s, t);
      FlowField flow(g.width, g.height);
      for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
          const double fx = x + g.margin - scene.foreground_disparity * kx;
          const double fy = y + g.margin - scene.foreground_disparity * ky;
          const bool on_fg = fg_at(fx, fy);
          const double d = on_fg ? scene.foreground_disparity : scene.background_disparity;
          const double u = -d * kx;
          const double v = -d * ky;
          if (on_fg) {
            view.at(x, y) = sample_bilinear(scene.foreground, fx, fy);
          } else {
            const double bx = x + g.margin - scene.background_disparity * kx;
            const double by = y + g.margin - scene.background_disparity * ky;
            view.at(x, y) = std::clamp(
                static_cast<float>(gain * sample_bilinear(scene.background, bx, by)), 0.0f,
                1.0f);
          }
          flow.u.at(x, y) = static_cast<float>(u);
          flow.v.at(x, y) = static_cast<float>(v);
          const double tx = x + u;
          const double ty = y + v;
          bool valid = tx >= 0.0 && ty >= 0.0 && tx <= g.width - 1 && ty <= g.height - 1;
          // A background pixel is hidden in the center view if the foreground
          // covers its target there.
          if (valid && !on_fg) valid = !fg_at(tx + g.margin, ty + g.margin);
          flow.valid.at(x, y) = valid ? 1 : 0;
        }
      }
      out.flows.flows[out.lf.index(s, t)] = std::move(flow);
    }
  }
  return out;
}

LayeredScene make_layered_scene(int width, int height, std::uint64_t seed,
                                double background_disparity, double foreground_disparity,
                                double shading) {
  LayeredScene scene;
  scene.background = value_noise(width, height, seed, 4, 2.0);
  scene.foreground = value_noise(width, height, seed ^ 0xF00DULL, 3, 3.0);
  scene.foreground_mask = Mask(width, height, 0);
  const int x0 = width / 3;
  const int x1 = 2 * width / 3;
  const int y0 = height / 3;
  const int y1 = 2 * height / 3;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) scene.foreground_mask.at(x, y) = 1;
  }
  scene.background_disparity = background_disparity;
  scene.foreground_disparity = foreground_disparity;
  scene.shading = shading;
  return scene;
}

}  // namespace lfpb
