#include "lfpb/resample.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lfpb/error.hpp"
#include "lfpb/parallel.hpp"

namespace lfpb {

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  int first = 0;  // input index of the first tap (before clamping)
  std::vector<double> weights;
};

// Output j of a grid-aligned magnification reads input position j / alpha.
std::vector<Taps> magnify_taps(int out_size, int alpha) {
  std::vector<Taps> taps(out_size);
  for (int j = 0; j < out_size; ++j) {
    const double pos = static_cast<double>(j) / alpha;
    const int base = static_cast<int>(std::floor(pos));
    taps[j].first = base - 1;
    taps[j].weights.resize(4);
    for (int k = 0; k < 4; ++k) taps[j].weights[k] = cubic_kernel(pos - (base - 1 + k));
  }
  return taps;
}

// Output k of a decimation filters the input around k * alpha with the
// kernel stretched by alpha (antialiasing), normalized to unit DC gain.
std::vector<Taps> decimate_taps(int out_size, int alpha) {
  std::vector<double> w;
  for (int j = -2 * alpha + 1; j <= 2 * alpha - 1; ++j) {
    w.push_back(cubic_kernel(static_cast<double>(j) / alpha));
  }
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  std::vector<Taps> taps(out_size);
  for (int k = 0; k < out_size; ++k) {
    taps[k].first = k * alpha - 2 * alpha + 1;
    taps[k].weights = w;
  }
  return taps;
}

// Applies horizontal then vertical 1-D filter banks with edge replication.
Image separable_resample(const Image& img, const std::vector<Taps>& htaps,
                         const std::vector<Taps>& vtaps) {
  const int out_w = static_cast<int>(htaps.size());
  const int out_h = static_cast<int>(vtaps.size());
  std::vector<double> tmp(static_cast<std::size_t>(out_w) * img.height);
  for (int y = 0; y < img.height; ++y) {
    const float* src = img.row(y);
    for (int j = 0; j < out_w; ++j) {
      const Taps& t = htaps[j];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) {
        const int x = std::clamp(t.first + static_cast<int>(k), 0, img.width - 1);
        acc += t.weights[k] * src[x];
      }
      tmp[static_cast<std::size_t>(y) * out_w + j] = acc;
    }
  }
  Image out(out_w, out_h);
  for (int i = 0; i < out_h; ++i) {
    const Taps& t = vtaps[i];
    float* dst = out.row(i);
    for (int j = 0; j < out_w; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.weights.size(); ++k) {
        const int y = std::clamp(t.first + static_cast<int>(k), 0, img.height - 1);
        acc += t.weights[k] * tmp[static_cast<std::size_t>(y) * out_w + j];
      }
      dst[j] = static_cast<float>(acc);
    }
  }
  return out;
}

std::vector<Taps> kernel_taps(int size, const std::vector<double>& kernel, int offset) {
  std::vector<Taps> taps(size);
  for (int j = 0; j < size; ++j) {
    taps[j].first = j - offset;
    taps[j].weights = kernel;
  }
  return taps;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void add_noise(Image& img, double sigma, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (float& v : img.data) v = static_cast<float>(v + noise(rng));
}

}  // namespace

Image upsample(const Image& img, int alpha) {
  if (alpha < 2) throw UsageError("upsample: alpha must be >= 2, got " + std::to_string(alpha));
  if (img.empty()) throw DataError("upsample: empty image");
  return separable_resample(img, magnify_taps(img.width * alpha, alpha),
                            magnify_taps(img.height * alpha, alpha));
}

LightField upsample(const LightField& lf, int alpha) {
  lf.validate();
  LightField out = lf;
  parallel_for(lf.view_count(), [&](int i) {
    out.views[i] = upsample(lf.views[i], alpha);
    if (lf.has_chroma()) {
      out.cb[i] = upsample(lf.cb[i], alpha);
      out.cr[i] = upsample(lf.cr[i], alpha);
    }
  });
  return out;
}

int crop_to_multiple(int extent, int alpha) { return extent - extent % alpha; }

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return separable_resample(img, kernel_taps(img.width, k, radius),
                            kernel_taps(img.height, k, radius));
}

Image box_blur(const Image& img, int size) {
  if (size <= 1) return img;
  const std::vector<double> k(size, 1.0 / size);
  return separable_resample(img, kernel_taps(img.width, k, (size - 1) / 2),
                            kernel_taps(img.height, k, (size - 1) / 2));
}

Image decimate(const Image& img, const DegradationParams& p) {
  if (p.alpha < 2) throw UsageError("degrade: alpha must be >= 2, got " + std::to_string(p.alpha));
  const int w = crop_to_multiple(img.width, p.alpha);
  const int h = crop_to_multiple(img.height, p.alpha);
  if (w == 0 || h == 0) {
    throw DataError("degrade: view " + shape_string(img.width, img.height) +
                    " smaller than alpha " + std::to_string(p.alpha));
  }
  Image src = (w == img.width && h == img.height) ? img : crop(img, 0, 0, w, h);
  switch (p.blur) {
    case BlurKind::none: break;
    case BlurKind::box: src = box_blur(src, p.alpha); break;
    case BlurKind::gaussian: src = gaussian_blur(src, p.blur_sigma); break;
  }
  const int out_w = w / p.alpha;
  const int out_h = h / p.alpha;
  if (p.decimation == Decimation::point) {
    Image out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) out.at(x, y) = src.at(x * p.alpha, y * p.alpha);
    }
    return out;
  }
  return separable_resample(src, decimate_taps(out_w, p.alpha), decimate_taps(out_h, p.alpha));
}

LightField degrade(const LightField& lf, const DegradationParams& p) {
  if (p.alpha < 2) throw UsageError("degrade: alpha must be >= 2, got " + std::to_string(p.alpha));
  if (p.noise_sigma < 0.0) throw UsageError("degrade: noise sigma must be >= 0");
  lf.validate();
  LightField out = lf;
  parallel_for(lf.view_count(), [&](int i) {
    const std::uint64_t stream = splitmix64(p.seed ^ splitmix64(static_cast<std::uint64_t>(i)));
    auto process = [&](const Image& in, std::uint64_t salt) {
      Image v = decimate(in, p);
      if (p.noise_sigma > 0.0) add_noise(v, p.noise_sigma, splitmix64(stream + salt));
      clamp_inplace(v);
      return v;
    };
    out.views[i] = process(lf.views[i], 0);
    if (lf.has_chroma()) {
      out.cb[i] = process(lf.cb[i], 1);
      out.cr[i] = process(lf.cr[i], 2);
    }
  });
  return out;
}

}  // namespace lfpb
