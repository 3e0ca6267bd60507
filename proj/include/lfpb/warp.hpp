#pragma once

#include <vector>

#include "lfpb/flow.hpp"
#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

/// Pixels of a forward-warped image that received at least one splat.
struct WarpMask {
  Mask filled;
};

struct ForwardWarpResult {
  Image image;  // unfilled pixels are 0
  WarpMask mask;
};

/// Splats every source pixel to (x + u, y + v) with bilinear weights and
/// normalizes by the accumulated weight. Source pixels with an invalid flow
/// are skipped. Targets whose weight stays below a small threshold are left
/// unfilled.
ForwardWarpResult forward_warp(const Image& view, const FlowField& flow);

struct InverseWarpResult {
  Image image;
  Mask out_of_frame;  // sample position fell outside the input
};

/// output(x, y) = bilinear sample of view at (x + u, y + v), edge replicated.
InverseWarpResult inverse_warp(const Image& view, const FlowField& flow);

struct AlignResult {
  LightField aligned;
  std::vector<WarpMask> masks;
};

/// Forward-warps every view to the center view. Unfilled pixels take the
/// collocated center-view pixel; masks keep the true fill state.
AlignResult align(const LightField& lf, const FlowSet& flows);

/// Mean over pixels of the population variance across views, in 8-bit units.
double view_variance(const LightField& lf);
double view_variance(const std::vector<Image>& views);

}  // namespace lfpb
