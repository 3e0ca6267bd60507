#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

/// Per-pixel displacement (u, v) that carries pixel (x, y) of a view to
/// (x + u, y + v) in the center view.
struct FlowField {
  Plane<float> u;
  Plane<float> v;
  Mask valid;

  FlowField() = default;
  FlowField(int width, int height);  // zero flow, fully valid

  int width() const { return u.width; }
  int height() const { return u.height; }
  static FlowField uniform(int width, int height, float du, float dv);
  bool operator==(const FlowField&) const = default;
};

struct FlowSet {
  std::vector<FlowField> flows;  // one per view, raster order
  bool operator==(const FlowSet&) const = default;
};

struct BlockMatchingParams {
  double max_disparity = 16.0;  // pixels, on the grid the flows are estimated on
  int block_size = 8;
  int block_stride = 4;
  int levels = 3;
  int refine_radius = 2;  // search radius around the prediction on finer levels
  bool subpixel = true;
  int median_size = 5;
};

/// Estimates the flow that aligns `view` to `reference`.
class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  virtual FlowField estimate(const Image& view, const Image& reference) const = 0;
};

/// Multi-scale SAD block matching with parabolic sub-pixel refinement and a
/// median post-filter.
class BlockMatchingEstimator final : public FlowEstimator {
 public:
  explicit BlockMatchingEstimator(BlockMatchingParams params = {});
  FlowField estimate(const Image& view, const Image& reference) const override;
  const BlockMatchingParams& params() const { return params_; }

 private:
  BlockMatchingParams params_;
};

/// One flow per view targeting the center view. The center entry is the zero
/// flow. Throws UsageError when max_disparity <= 0.
FlowSet estimate_flows(const LightField& lf, const FlowEstimator& estimator);
FlowSet estimate_flows(const LightField& lf, const BlockMatchingParams& params);

Image median_filter(const Image& img, int size);

// Little-endian flow files: magic "LFFW", uint32 width, uint32 height, then
// row-major float32 u, float32 v and uint8 valid planes.
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);
std::filesystem::path flow_filename(int s, int t);

void write_flow_cache(const std::filesystem::path& dir, const FlowSet& flows,
                      int rows, int cols);
/// Returns the cached flows when every file exists and matches the shape.
std::optional<FlowSet> read_flow_cache(const std::filesystem::path& dir, int rows,
                                       int cols, int width, int height);

}  // namespace lfpb
