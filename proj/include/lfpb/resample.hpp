#pragma once

#include <cstdint>

#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

/// Catmull-Rom cubic convolution kernel (a = -0.5).
double cubic_kernel(double x);

/// Bicubic magnification by an integer factor.
///
/// Sampling is grid aligned: output pixel j reads the input at j / alpha, so
/// every alpha-th output sample reproduces an input sample exactly. Samples
/// outside the input use edge replication.
Image upsample(const Image& img, int alpha);
LightField upsample(const LightField& lf, int alpha);

enum class BlurKind { none, box, gaussian };
enum class Decimation { bicubic, point };

struct DegradationParams {
  int alpha = 2;
  BlurKind blur = BlurKind::none;
  double blur_sigma = 1.0;  // gaussian only; box uses an alpha x alpha window
  Decimation decimation = Decimation::bicubic;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Largest width/height not exceeding the input that alpha divides.
int crop_to_multiple(int extent, int alpha);

/// Downsample a single view. The view is first cropped (top-left anchored) to
/// a multiple of alpha. Bicubic decimation filters with the Catmull-Rom kernel
/// stretched by alpha, centered on the retained samples x = k * alpha.
Image decimate(const Image& img, const DegradationParams& p);

/// Acquisition model: optional blur, decimation by alpha, additive Gaussian
/// noise, clamp to [0, 1]. Each view draws noise from its own stream derived
/// from (seed, view index) so results do not depend on evaluation order.
LightField degrade(const LightField& lf, const DegradationParams& p);

Image gaussian_blur(const Image& img, double sigma);
Image box_blur(const Image& img, int size);

}  // namespace lfpb
