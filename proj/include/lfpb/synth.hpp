#pragma once

#include <cstdint>

#include "lfpb/flow.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

/// Multi-octave value noise in [0, 1]. The finest octave has a cell size of
/// `finest_cell` pixels; coarser octaves double the cell size and the
/// amplitude.
Image value_noise(int width, int height, std::uint64_t seed, int octaves = 4,
                  double finest_cell = 4.0);

/// Central-crop margin required for a grid shifted by `disparity` per view.
int translational_margin(int rows, int cols, double disparity);

struct SyntheticLightField {
  LightField lf;
  FlowSet flows;  // exact flows aligning every view to the center view
};

/// View (s, t) is `base` translated by (d * (t - t_c), d * (s - s_c)) using
/// bilinear sampling, then centrally cropped by translational_margin() on
/// every side. The center view equals the cropped base exactly.
SyntheticLightField synth_translational(const Image& base, int rows, int cols,
                                        double disparity);

struct LayeredScene {
  Image background;
  Image foreground;
  Mask foreground_mask;  // support of the foreground layer, in base coordinates
  double background_disparity = 1.0;
  double foreground_disparity = 3.0;
  /// Per-view multiplicative shading of the background only:
  /// gain = 1 + shading * ((t - t_c) / Q + (s - s_c) / P).
  double shading = 0.0;
};

/// Two-layer scene with occlusions. Exact flows follow whichever layer is
/// visible in each view; `valid` is cleared where that pixel is occluded in the
/// center view.
SyntheticLightField synth_layered(const LayeredScene& scene, int rows, int cols);

/// Convenience: a textured two-layer scene with a rectangular foreground.
LayeredScene make_layered_scene(int width, int height, std::uint64_t seed,
                                double background_disparity,
                                double foreground_disparity, double shading);

}  // namespace lfpb
