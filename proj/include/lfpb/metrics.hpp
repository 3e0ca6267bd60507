#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

/// 10 log10(peak^2 / MSE); identical images give +infinity.
double psnr(const Image& a, const Image& b, double peak = 1.0);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

/// Mean SSIM over every fully contained Gaussian window ("valid" placement).
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

struct ViewMetrics {
  int index = 0;
  int s = 0;
  int t = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::vector<ViewMetrics> per_view;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  int border_crop = 0;

  // Diagnostics; filled in by callers that ran the pipeline.
  double variance_before = std::numeric_limits<double>::quiet_NaN();
  double variance_after = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> basis_entropies;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

/// Default border crop: ceil(max_disparity) + alpha.
int default_border_crop(double max_disparity, int alpha);

/// Per-view PSNR/SSIM on luma after removing border_crop pixels from every
/// side. Throws DataError on grid or dimension mismatch.
EvalReport evaluate_lf(const LightField& restored, const LightField& truth,
                       int border_crop);

/// JSON report. +infinity PSNR is written as the string "inf". Stage timings
/// are included only when `with_timings` is set so reports stay reproducible.
std::string report_to_json(const EvalReport& report, bool with_timings);
/// One row per view: index,s,t,psnr_db,ssim.
std::string report_to_csv(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& dir,
                  bool with_timings);

/// Shift-and-add refocusing. Output (x, y) averages view (s, t) sampled at
/// (x + slope * (t - t_c), y + slope * (s - s_c)); samples outside a view are
/// left out of the average.
Image refocus(const LightField& lf, double slope);

/// Variance of the 4-neighbour Laplacian over interior pixels.
double laplacian_variance(const Image& img);

}  // namespace lfpb
