#include "lfpb/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "lfpb/error.hpp"
#include "lfpb/parallel.hpp"

namespace lfpb {

FlowField::FlowField(int width, int height)
    : u(width, height, 0.0f), v(width, height, 0.0f), valid(width, height, 1) {}

FlowField FlowField::uniform(int width, int height, float du, float dv) {
  FlowField f(width, height);
  std::fill(f.u.data.begin(), f.u.data.end(), du);
  std::fill(f.v.data.begin(), f.v.data.end(), dv);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float tx = x + du;
      const float ty = y + dv;
      f.valid.at(x, y) = tx >= 0 && ty >= 0 && tx <= width - 1 && ty <= height - 1;
    }
  }
  return f;
}

namespace {

Image half_size(const Image& img) {
  Image out(img.width / 2, img.height / 2);
  for (int y = 0; y < out.height; ++y) {
    const float* r0 = img.row(2 * y);
    const float* r1 = img.row(2 * y + 1);
    float* dst = out.row(y);
    for (int x = 0; x < out.width; ++x) {
      dst[x] = 0.25f * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
    }
  }
  return out;
}

struct Vec2i {
  int u = 0;
  int v = 0;
};

class BlockGrid {
 public:
  BlockGrid(int width, int height, int block, int stride)
      : block_(block), stride_(stride),
        nx_(std::max(1, (width - block) / stride + 1)),
        ny_(std::max(1, (height - block) / stride + 1)),
        vectors_(static_cast<std::size_t>(nx_) * ny_) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int origin(int k) const { return k * stride_; }
  Vec2i& at(int bx, int by) { return vectors_[static_cast<std::size_t>(by) * nx_ + bx]; }
  const Vec2i& at(int bx, int by) const {
    return vectors_[static_cast<std::size_t>(by) * nx_ + bx];
  }
  // Block whose center is nearest to coordinate c along one axis.
  int nearest(double c, int count) const {
    const int k = static_cast<int>(std::lround((c - 0.5 * block_) / stride_));
    return std::clamp(k, 0, count - 1);
  }

 private:
  int block_;
  int stride_;
  int nx_;
  int ny_;
  std::vector<Vec2i> vectors_;
};

class BlockMatcher {
 public:
  BlockMatcher(const Image& view, const Image& ref, int block)
      : view_(view), ref_(ref), block_(block),
        bw_(std::min(block, view.width)), bh_(std::min(block, view.height)) {}

  bool in_frame(int ox, int oy, int u, int v) const {
    return ox + u >= 0 && oy + v >= 0 && ox + u + bw_ <= ref_.width &&
           oy + v + bh_ <= ref_.height;
  }

  double sad(int ox, int oy, int u, int v) const {
    double acc = 0.0;
    for (int y = 0; y < bh_; ++y) {
      const float* a = view_.row(oy + y) + ox;
      const float* b = ref_.row(oy + y + v) + ox + u;
      float row = 0.0f;
      for (int x = 0; x < bw_; ++x) row += std::abs(a[x] - b[x]);
      acc += row;
    }
    return acc;
  }

  int pixels() const { return bw_ * bh_; }

 private:
  const Image& view_;
  const Image& ref_;
  int block_;
  int bw_;
  int bh_;
};

struct Match {
  Vec2i vec;
  double cost = std::numeric_limits<double>::infinity();
};

Match search(const BlockMatcher& m, int ox, int oy, Vec2i pred, int radius, int bound) {
  Match best;
  best.vec = pred;
  int best_dist = std::numeric_limits<int>::max();
  for (int dv = -radius; dv <= radius; ++dv) {
    for (int du = -radius; du <= radius; ++du) {
      const int u = pred.u + du;
      const int v = pred.v + dv;
      if (std::abs(u) > bound || std::abs(v) > bound) continue;
      if (!m.in_frame(ox, oy, u, v)) continue;
      const double c = m.sad(ox, oy, u, v);
      const int dist = std::abs(du) + std::abs(dv);
      // Ties resolve toward the prediction so flat regions keep it.
      if (c < best.cost || (c == best.cost && dist < best_dist)) {
        best.cost = c;
        best.vec = {u, v};
        best_dist = dist;
      }
    }
  }
  return best;
}

// Vertex offset of the parabola through (-1, cm), (0, c0), (1, cp).
double parabola_offset(double cm, double c0, double cp) {
  const double denom = cm - 2.0 * c0 + cp;
  if (!(denom > 0.0)) return 0.0;
  return std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
}

}  // namespace

BlockMatchingEstimator::BlockMatchingEstimator(BlockMatchingParams params)
    : params_(params) {
  if (!(params_.max_disparity > 0.0)) {
    throw UsageError("max_disparity must be > 0, got " + std::to_string(params_.max_disparity));
  }
  if (params_.block_size < 2 || params_.block_stride < 1 || params_.levels < 1 ||
      params_.refine_radius < 1 || params_.median_size < 1) {
    throw UsageError("invalid block matching parameters");
  }
}

FlowField BlockMatchingEstimator::estimate(const Image& view, const Image& reference) const {
  require_same_shape(view, reference, "estimate flow");
  const BlockMatchingParams& p = params_;

  std::vector<Image> vpyr{view};
  std::vector<Image> rpyr{reference};
  while (static_cast<int>(vpyr.size()) < p.levels && vpyr.back().width / 2 >= 2 * p.block_size &&
         vpyr.back().height / 2 >= 2 * p.block_size) {
    vpyr.push_back(half_size(vpyr.back()));
    rpyr.push_back(half_size(rpyr.back()));
  }
  const int levels = static_cast<int>(vpyr.size());

  std::optional<BlockGrid> coarser;
  std::vector<float> fine_u, fine_v;
  for (int level = levels - 1; level >= 0; --level) {
    const Image& v = vpyr[level];
    const Image& r = rpyr[level];
    const int scale = 1 << level;
    const int bound = static_cast<int>(std::ceil(p.max_disparity / scale));
    BlockGrid grid(v.width, v.height, p.block_size, p.block_stride);
    BlockMatcher matcher(v, r, p.block_size);
    if (level == 0) {
      fine_u.assign(static_cast<std::size_t>(grid.nx()) * grid.ny(), 0.0f);
      fine_v.assign(fine_u.size(), 0.0f);
    }
    for (int by = 0; by < grid.ny(); ++by) {
      for (int bx = 0; bx < grid.nx(); ++bx) {
        const int ox = grid.origin(bx);
        const int oy = grid.origin(by);
        Vec2i pred;
        int radius = bound;
        if (coarser) {
          const double cx = (ox + 0.5 * p.block_size) / 2.0;
          const double cy = (oy + 0.5 * p.block_size) / 2.0;
          const Vec2i& c = coarser->at(coarser->nearest(cx, coarser->nx()),
                                       coarser->nearest(cy, coarser->ny()));
          pred = {2 * c.u, 2 * c.v};
          radius = p.refine_radius;
        }
        const Match best = search(matcher, ox, oy, pred, radius, bound);
        grid.at(bx, by) = best.vec;
        if (level == 0) {
          double su = best.vec.u;
          double sv = best.vec.v;
          // An exact match needs no refinement; SAD curvature there is not
          // parabolic.
          if (p.subpixel && std::isfinite(best.cost) &&
              best.cost > 1e-6 * matcher.pixels()) {
            const int u = best.vec.u;
            const int w = best.vec.v;
            if (matcher.in_frame(ox, oy, u - 1, w) && matcher.in_frame(ox, oy, u + 1, w)) {
              su += parabola_offset(matcher.sad(ox, oy, u - 1, w), best.cost,
                                    matcher.sad(ox, oy, u + 1, w));
            }
            if (matcher.in_frame(ox, oy, u, w - 1) && matcher.in_frame(ox, oy, u, w + 1)) {
              sv += parabola_offset(matcher.sad(ox, oy, u, w - 1), best.cost,
                                    matcher.sad(ox, oy, u, w + 1));
            }
          }
          const std::size_t k = static_cast<std::size_t>(by) * grid.nx() + bx;
          fine_u[k] = static_cast<float>(su);
          fine_v[k] = static_cast<float>(sv);
        }
      }
    }
    coarser.emplace(std::move(grid));
  }

  const BlockGrid& grid = *coarser;
  Image u(view.width, view.height);
  Image v(view.width, view.height);
  for (int y = 0; y < view.height; ++y) {
    const int by = grid.nearest(y + 0.5, grid.ny());
    for (int x = 0; x < view.width; ++x) {
      const int bx = grid.nearest(x + 0.5, grid.nx());
      const std::size_t k = static_cast<std::size_t>(by) * grid.nx() + bx;
      u.at(x, y) = fine_u[k];
      v.at(x, y) = fine_v[k];
    }
  }
  if (p.median_size > 1) {
    u = median_filter(u, p.median_size);
    v = median_filter(v, p.median_size);
  }

  FlowField flow(view.width, view.height);
  const float limit = static_cast<float>(p.max_disparity);
  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      const float fu = std::clamp(u.at(x, y), -limit, limit);
      const float fv = std::clamp(v.at(x, y), -limit, limit);
      flow.u.at(x, y) = fu;
      flow.v.at(x, y) = fv;
      const float tx = x + fu;
      const float ty = y + fv;
      flow.valid.at(x, y) = tx >= 0 && ty >= 0 && tx <= view.width - 1 && ty <= view.height - 1;
    }
  }
  return flow;
}

Image median_filter(const Image& img, int size) {
  if (size <= 1) return img;
  const int r = size / 2;
  Image out(img.width, img.height);
  std::vector<float> window(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      std::size_t k = 0;
      float lo = std::numeric_limits<float>::infinity();
      float hi = -lo;
      for (int dy = -r; dy <= r; ++dy) {
        const float* row = img.row(std::clamp(y + dy, 0, img.height - 1));
        for (int dx = -r; dx <= r; ++dx) {
          const float s = row[std::clamp(x + dx, 0, img.width - 1)];
          window[k++] = s;
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
      }
      if (lo == hi) {
        out.at(x, y) = lo;
        continue;
      }
      auto mid = window.begin() + static_cast<std::ptrdiff_t>(k / 2);
      std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(k));
      out.at(x, y) = *mid;
    }
  }
  return out;
}

FlowSet estimate_flows(const LightField& lf, const FlowEstimator& estimator) {
  lf.validate();
  FlowSet set;
  set.flows.resize(lf.view_count());
  const int c = lf.center_index();
  const Image& center = lf.views[c];
  parallel_for(lf.view_count(), [&](int i) {
    set.flows[i] = i == c ? FlowField(lf.width(), lf.height())
                          : estimator.estimate(lf.views[i], center);
  });
  return set;
}

FlowSet estimate_flows(const LightField& lf, const BlockMatchingParams& params) {
  return estimate_flows(lf, BlockMatchingEstimator(params));
}

namespace {

constexpr char kFlowMagic[4] = {'L', 'F', 'F', 'W'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("flow file truncated");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32_plane(std::ostream& out, const Plane<float>& p) {
  for (float f : p.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
}

void get_f32_plane(std::istream& in, Plane<float>& p) {
  for (float& f : p.data) {
    const std::uint32_t bits = get_u32(in);
    std::memcpy(&f, &bits, 4);
  }
}

}  // namespace

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kFlowMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  put_f32_plane(out, flow.u);
  put_f32_plane(out, flow.v);
  out.write(reinterpret_cast<const char*>(flow.valid.data.data()),
            static_cast<std::streamsize>(flow.valid.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

FlowField read_flow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kFlowMagic, 4) != 0) {
    throw DataError(path.string() + " is not a flow file");
  }
  const std::uint32_t w = get_u32(in);
  const std::uint32_t h = get_u32(in);
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16) {
    throw DataError(path.string() + ": implausible flow dimensions");
  }
  FlowField flow(static_cast<int>(w), static_cast<int>(h));
  get_f32_plane(in, flow.u);
  get_f32_plane(in, flow.v);
  if (!in.read(reinterpret_cast<char*>(flow.valid.data.data()),
               static_cast<std::streamsize>(flow.valid.size()))) {
    throw DataError(path.string() + ": flow file truncated");
  }
  return flow;
}

std::filesystem::path flow_filename(int s, int t) {
  char name[32];
  std::snprintf(name, sizeof name, "flow_%02d_%02d.bin", s, t);
  return name;
}

void write_flow_cache(const std::filesystem::path& dir, const FlowSet& flows, int rows,
                      int cols) {
  if (static_cast<int>(flows.flows.size()) != rows * cols) {
    throw DataError("flow set size does not match the grid");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create flow cache " + dir.string() + ": " + ec.message());
  for (int i = 0; i < rows * cols; ++i) {
    write_flow(dir / flow_filename(i / cols, i % cols), flows.flows[i]);
  }
}

std::optional<FlowSet> read_flow_cache(const std::filesystem::path& dir, int rows, int cols,
                                       int width, int height) {
  FlowSet set;
  for (int i = 0; i < rows * cols; ++i) {
    const auto path = dir / flow_filename(i / cols, i % cols);
    if (!std::filesystem::exists(path)) return std::nullopt;
    FlowField f = read_flow(path);
    if (f.width() != width || f.height() != height) return std::nullopt;
    set.flows.push_back(std::move(f));
  }
  return set;
}

}  // namespace lfpb
