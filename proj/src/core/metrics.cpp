#include "lfpb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "lfpb/error.hpp"
#include "lfpb/parallel.hpp"

namespace lfpb {

double psnr(const Image& a, const Image& b, double peak) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw DataError("psnr: empty images");
  double sse = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a.data[k]) - static_cast<double>(b.data[k]);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(size);
  const double c = 0.5 * (size - 1);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    w[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// "valid" separable correlation of a w x h double field.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimParams& p) {
  require_same_shape(a, b, "ssim");
  if (a.width < p.window || a.height < p.window) {
    throw DataError("ssim: image " + shape_string(a.width, a.height) + " smaller than the " +
                    std::to_string(p.window) + "x" + std::to_string(p.window) + " window");
  }
  const std::size_t m = a.size();
  std::vector<double> xa(m), xb(m), aa(m), bb(m), ab(m);
  for (std::size_t k = 0; k < m; ++k) {
    xa[k] = a.data[k];
    xb[k] = b.data[k];
    aa[k] = xa[k] * xa[k];
    bb[k] = xb[k] * xb[k];
    ab[k] = xa[k] * xb[k];
  }
  const auto w = gaussian_window(p.window, p.sigma);
  const auto mu_a = filter_valid(xa, a.width, a.height, w);
  const auto mu_b = filter_valid(xb, a.width, a.height, w);
  const auto e_aa = filter_valid(aa, a.width, a.height, w);
  const auto e_bb = filter_valid(bb, a.width, a.height, w);
  const auto e_ab = filter_valid(ab, a.width, a.height, w);
  const double c1 = (p.k1 * p.peak) * (p.k1 * p.peak);
  const double c2 = (p.k2 * p.peak) * (p.k2 * p.peak);
  double total = 0.0;
  for (std::size_t k = 0; k < mu_a.size(); ++k) {
    const double ma = mu_a[k];
    const double mb = mu_b[k];
    const double va = e_aa[k] - ma * ma;
    const double vb = e_bb[k] - mb * mb;
    const double cov = e_ab[k] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

int default_border_crop(double max_disparity, int alpha) {
  return static_cast<int>(std::ceil(max_disparity)) + alpha;
}

EvalReport evaluate_lf(const LightField& restored, const LightField& truth, int border_crop) {
  restored.validate();
  truth.validate();
  if (restored.rows != truth.rows || restored.cols != truth.cols) {
    throw DataError("evaluate: angular grids differ (" + std::to_string(restored.rows) + "x" +
                    std::to_string(restored.cols) + " vs " + std::to_string(truth.rows) + "x" +
                    std::to_string(truth.cols) + ")");
  }
  if (restored.width() != truth.width() || restored.height() != truth.height()) {
    throw DataError("evaluate: view size mismatch (" +
                    shape_string(restored.width(), restored.height()) + " vs " +
                    shape_string(truth.width(), truth.height()) + ")");
  }
  if (border_crop < 0) throw UsageError("border crop must be >= 0");
  const int w = restored.width() - 2 * border_crop;
  const int h = restored.height() - 2 * border_crop;
  if (w < 1 || h < 1) {
    throw DataError("evaluate: border crop " + std::to_string(border_crop) + " leaves no pixels");
  }
  EvalReport report;
  report.border_crop = border_crop;
  report.per_view.resize(restored.view_count());
  parallel_for(restored.view_count(), [&](int i) {
    const Image a = crop(restored.views[i], border_crop, border_crop, w, h);
    const Image b = crop(truth.views[i], border_crop, border_crop, w, h);
    report.per_view[i] = {i, i / restored.cols, i % restored.cols, psnr(a, b), ssim(a, b)};
  });
  double sp = 0.0;
  double ss = 0.0;
  for (const auto& v : report.per_view) {
    sp += v.psnr_db;
    ss += v.ssim;
  }
  report.mean_psnr = sp / static_cast<double>(report.per_view.size());
  report.mean_ssim = ss / static_cast<double>(report.per_view.size());
  return report;
}

namespace {

nlohmann::ordered_json number_or_sentinel(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_to_json(const EvalReport& report, bool with_timings) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json views = nlohmann::ordered_json::array();
  for (const auto& v : report.per_view) {
    views.push_back({{"index", v.index},
                     {"s", v.s},
                     {"t", v.t},
                     {"psnr_db", number_or_sentinel(v.psnr_db)},
                     {"ssim", v.ssim}});
  }
  j["per_view"] = views;
  j["aggregate"] = {{"mean_psnr", number_or_sentinel(report.mean_psnr)},
                    {"mean_ssim", report.mean_ssim}};
  j["border_crop"] = report.border_crop;
  nlohmann::ordered_json diag;
  diag["variance_before"] = number_or_sentinel(report.variance_before);
  diag["variance_after"] = number_or_sentinel(report.variance_after);
  diag["basis_entropy"] = report.basis_entropies;
  if (with_timings) {
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [stage, seconds] : report.stage_seconds) t[stage] = seconds;
    diag["wall_clock_seconds"] = t;
  }
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "index,s,t,psnr_db,ssim\n";
  for (const auto& v : report.per_view) {
    out += std::to_string(v.index) + "," + std::to_string(v.s) + "," + std::to_string(v.t) +
           "," + csv_number(v.psnr_db) + "," + csv_number(v.ssim) + "\n";
  }
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir, bool with_timings) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << text;
    if (!out) throw IoError("failed writing " + (dir / name).string());
  };
  write("report.json", report_to_json(report, with_timings));
  write("report.csv", report_to_csv(report));
}

Image refocus(const LightField& lf, double slope) {
  lf.validate();
  if (!std::isfinite(slope)) throw UsageError("refocus slope must be finite");
  const int w = lf.width();
  const int h = lf.height();
  const int sc = lf.center_s();
  const int tc = lf.center_t();
  constexpr double eps = 1e-9;
  Image out(w, h);
  parallel_for(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int s = 0; s < lf.rows; ++s) {
        const double sy = y + slope * (s - sc);
        if (sy < -eps || sy > h - 1 + eps) continue;
        for (int t = 0; t < lf.cols; ++t) {
          const double sx = x + slope * (t - tc);
          if (sx < -eps || sx > w - 1 + eps) continue;
          sum += sample_bilinear(lf.view(s, t), sx, sy);
          ++count;
        }
      }
      out.at(x, y) = static_cast<float>(sum / std::max(count, 1));
    }
  });
  return out;
}

double laplacian_variance(const Image& img) {
  if (img.width < 3 || img.height < 3) throw DataError("laplacian_variance: image too small");
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      const double l = 4.0 * img.at(x, y) - img.at(x - 1, y) - img.at(x + 1, y) -
                       img.at(x, y - 1) - img.at(x, y + 1);
      sum += l;
      sum_sq += l * l;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  return sum_sq / static_cast<double>(n) - mean * mean;
}

}  // namespace lfpb
