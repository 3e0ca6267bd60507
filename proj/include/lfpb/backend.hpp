#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "lfpb/image.hpp"

namespace lfpb {

/// Single-image super-resolution backend. The pipeline hands it an image that
/// is already on the target grid (bicubically pre-upsampled) and normalized to
/// [0, 1]; the backend returns a same-sized restored image. `alpha` tells
/// scale-aware backends which magnification produced the input.
class SisrBackend {
 public:
  virtual ~SisrBackend() = default;
  virtual Image restore(const Image& image, int alpha) const = 0;
  virtual std::string name() const = 0;
  virtual bool scale_aware() const { return false; }
};

class IdentityBackend final : public SisrBackend {
 public:
  Image restore(const Image& image, int alpha) const override;
  std::string name() const override { return "identity"; }
};

struct SharpenParams {
  int iterations = 3;
  double sigma_per_scale = 0.35;  // blur model sigma = sigma_per_scale * alpha
  double step = 1.0;
  double gain_clamp = 0.25;  // max |restored - input| per pixel
};

/// Iterative back-projection against a Gaussian blur model whose width grows
/// with the magnification:
///   x <- x + step * (y - G * x), correction clamped to +-gain_clamp.
class SharpenBackend final : public SisrBackend {
 public:
  explicit SharpenBackend(SharpenParams params = {});
  Image restore(const Image& image, int alpha) const override;
  std::string name() const override { return "sharpen"; }
  bool scale_aware() const override { return true; }
  const SharpenParams& params() const { return params_; }

 private:
  SharpenParams params_;
};

/// Subprocess protocol: `<command> [args...] --scale <alpha>`, the image is
/// written to stdin as 16-bit binary PGM and read back from stdout in the same
/// format with identical dimensions. Nonzero exit is a failure.
class ExternalBackend final : public SisrBackend {
 public:
  explicit ExternalBackend(std::vector<std::string> argv,
                           std::chrono::milliseconds timeout = std::chrono::seconds(120));
  Image restore(const Image& image, int alpha) const override;
  std::string name() const override;
  bool scale_aware() const override { return true; }

 private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
};

/// Runs one external backend call. Errors: backend_spawn (command cannot be
/// started), backend_timeout, backend_exit (carries captured stderr),
/// backend_format (stdout is not a PGM), backend_dims (size differs).
Image run_external_backend(const Image& image, int alpha,
                           const std::vector<std::string>& argv,
                           std::chrono::milliseconds timeout);

/// "identity", "sharpen" or "external:<command line>".
std::unique_ptr<SisrBackend> make_backend(const std::string& spec,
                                          std::chrono::milliseconds timeout =
                                              std::chrono::seconds(120));

}  // namespace lfpb
