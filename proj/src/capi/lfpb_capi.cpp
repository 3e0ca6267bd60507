#include "lfpb/lfpb.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "lfpb/compaction.hpp"
#include "lfpb/error.hpp"
#include "lfpb/io.hpp"
#include "lfpb/metrics.hpp"
#include "lfpb/parallel.hpp"
#include "lfpb/pipeline.hpp"
#include "lfpb/resample.hpp"
#include "lfpb/synth.hpp"
#include "lfpb/warp.hpp"

struct lfpb_lightfield {
  lfpb::LightField lf;
};

struct lfpb_image {
  lfpb::Image img;
};

struct lfpb_config {
  lfpb::PipelineConfig cfg;
};

struct lfpb_result {
  lfpb::PipelineResult res;
  lfpb_lightfield output;
};

struct lfpb_report {
  lfpb::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

lfpb_status status_of(lfpb::ErrorKind kind) {
  switch (kind) {
    case lfpb::ErrorKind::usage: return LFPB_ERR_USAGE;
    case lfpb::ErrorKind::io: return LFPB_ERR_IO;
    case lfpb::ErrorKind::data: return LFPB_ERR_DATA;
    case lfpb::ErrorKind::backend_spawn: return LFPB_ERR_BACKEND_SPAWN;
    case lfpb::ErrorKind::backend_exit: return LFPB_ERR_BACKEND_EXIT;
    case lfpb::ErrorKind::backend_timeout: return LFPB_ERR_BACKEND_TIMEOUT;
    case lfpb::ErrorKind::backend_dims: return LFPB_ERR_BACKEND_DIMS;
    case lfpb::ErrorKind::backend_format: return LFPB_ERR_BACKEND_FORMAT;
  }
  return LFPB_ERR_INTERNAL;
}

template <typename Fn>
lfpb_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LFPB_OK;
  } catch (const lfpb::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LFPB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LFPB_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) throw lfpb::UsageError(std::string(what) + " is null");
}

lfpb_lightfield* wrap(lfpb::LightField lf) { return new lfpb_lightfield{std::move(lf)}; }

}  // namespace

extern "C" {

const char* lfpb_version(void) { return "1.0.0"; }

const char* lfpb_last_error(void) { return g_last_error.c_str(); }

const char* lfpb_status_name(lfpb_status status) {
  switch (status) {
    case LFPB_OK: return "ok";
    case LFPB_ERR_USAGE: return "usage";
    case LFPB_ERR_IO: return "io";
    case LFPB_ERR_DATA: return "data";
    case LFPB_ERR_BACKEND_SPAWN: return "backend_spawn";
    case LFPB_ERR_BACKEND_EXIT: return "backend_exit";
    case LFPB_ERR_BACKEND_TIMEOUT: return "backend_timeout";
    case LFPB_ERR_BACKEND_DIMS: return "backend_dims";
    case LFPB_ERR_BACKEND_FORMAT: return "backend_format";
    case LFPB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void lfpb_set_threads(int threads) { lfpb::set_thread_count(threads); }

lfpb_status lfpb_lightfield_load(const char* dir, lfpb_lightfield** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = wrap(lfpb::load_lightfield(dir));
  });
}

lfpb_status lfpb_lightfield_save(const lfpb_lightfield* lf, const char* dir, int bit_depth) {
  return guarded([&] {
    require(lf, "lightfield");
    require(dir, "dir");
    lfpb::save_lightfield(lf->lf, dir, bit_depth);
  });
}

lfpb_status lfpb_lightfield_info_get(const lfpb_lightfield* lf, lfpb_lightfield_info* out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    *out = {lf->lf.rows, lf->lf.cols, lf->lf.width(), lf->lf.height(),
            lf->lf.has_chroma() ? 1 : 0};
  });
}

lfpb_status lfpb_lightfield_crop(const lfpb_lightfield* lf, int width, int height,
                                 lfpb_lightfield** out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    lfpb::LightField c = lf->lf;
    auto cut = [&](std::vector<lfpb::Image>& planes) {
      for (auto& p : planes) p = lfpb::crop(p, 0, 0, width, height);
    };
    cut(c.views);
    cut(c.cb);
    cut(c.cr);
    *out = wrap(std::move(c));
  });
}

lfpb_status lfpb_lightfield_view(const lfpb_lightfield* lf, int s, int t, lfpb_image** out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    if (s < 0 || t < 0 || s >= lf->lf.rows || t >= lf->lf.cols) {
      throw lfpb::UsageError("view (" + std::to_string(s) + "," + std::to_string(t) +
                             ") outside the angular grid");
    }
    *out = new lfpb_image{lf->lf.view(s, t)};
  });
}

void lfpb_lightfield_free(lfpb_lightfield* lf) { delete lf; }

lfpb_status lfpb_synthesize_scene(const lfpb_scene_params* p, lfpb_lightfield** out) {
  return guarded([&] {
    require(p, "params");
    require(out, "out");
    if (p->rows < 1 || p->cols < 1 || p->width < 1 || p->height < 1) {
      throw lfpb::UsageError("scene dimensions must be positive");
    }
    const double dmax = std::max(std::abs(p->background_disparity),
                                 std::abs(p->foreground_disparity));
    const int m = lfpb::translational_margin(p->rows, p->cols, dmax);
    const lfpb::LayeredScene scene =
        lfpb::make_layered_scene(p->width + 2 * m, p->height + 2 * m, p->seed,
                                 p->background_disparity, p->foreground_disparity, p->shading);
    *out = wrap(lfpb::synth_layered(scene, p->rows, p->cols).lf);
  });
}

lfpb_status lfpb_synthesize_plane(int rows, int cols, int width, int height, uint64_t seed,
                                  double disparity, lfpb_lightfield** out) {
  return guarded([&] {
    require(out, "out");
    if (rows < 1 || cols < 1 || width < 1 || height < 1) {
      throw lfpb::UsageError("plane dimensions must be positive");
    }
    const int m = lfpb::translational_margin(rows, cols, disparity);
    const lfpb::Image base = lfpb::value_noise(width + 2 * m, height + 2 * m, seed, 4, 2.0);
    *out = wrap(lfpb::synth_translational(base, rows, cols, disparity).lf);
  });
}

void lfpb_degrade_params_init(lfpb_degrade_params* p) {
  if (!p) return;
  *p = {2, LFPB_BLUR_NONE, 1.0, LFPB_DECIMATE_BICUBIC, 0.0, 0};
}

lfpb_status lfpb_degrade(const lfpb_lightfield* lf, const lfpb_degrade_params* p,
                         lfpb_lightfield** out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(p, "params");
    require(out, "out");
    lfpb::DegradationParams dp;
    dp.alpha = p->alpha;
    switch (p->blur) {
      case LFPB_BLUR_NONE: dp.blur = lfpb::BlurKind::none; break;
      case LFPB_BLUR_BOX: dp.blur = lfpb::BlurKind::box; break;
      case LFPB_BLUR_GAUSSIAN: dp.blur = lfpb::BlurKind::gaussian; break;
      default: throw lfpb::UsageError("unknown blur kind");
    }
    dp.blur_sigma = p->blur_sigma;
    switch (p->decimation) {
      case LFPB_DECIMATE_BICUBIC: dp.decimation = lfpb::Decimation::bicubic; break;
      case LFPB_DECIMATE_POINT: dp.decimation = lfpb::Decimation::point; break;
      default: throw lfpb::UsageError("unknown decimation kind");
    }
    dp.noise_sigma = p->noise_sigma;
    dp.seed = p->seed;
    *out = wrap(lfpb::degrade(lf->lf, dp));
  });
}

lfpb_status lfpb_upsample(const lfpb_lightfield* lf, int alpha, lfpb_lightfield** out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    if (alpha < 1) throw lfpb::UsageError("alpha must be >= 1");
    *out = wrap(lfpb::upsample(lf->lf, alpha));
  });
}

lfpb_status lfpb_view_variance(const lfpb_lightfield* lf, double* out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    *out = lfpb::view_variance(lf->lf);
  });
}

lfpb_status lfpb_config_create(lfpb_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lfpb_config{};
  });
}

void lfpb_config_free(lfpb_config* cfg) { delete cfg; }

lfpb_status lfpb_config_set_alpha(lfpb_config* cfg, int alpha) {
  return guarded([&] {
    require(cfg, "config");
    if (alpha < 2 || alpha > 4) {
      throw lfpb::UsageError("alpha must be 2, 3 or 4, got " + std::to_string(alpha));
    }
    cfg->cfg.alpha = alpha;
  });
}

lfpb_status lfpb_config_set_backend(lfpb_config* cfg, const char* spec, int timeout_ms) {
  return guarded([&] {
    require(cfg, "config");
    require(spec, "backend spec");
    if (timeout_ms <= 0) throw lfpb::UsageError("backend timeout must be positive");
    cfg->cfg.backend = lfpb::make_backend(spec, std::chrono::milliseconds(timeout_ms));
  });
}

lfpb_status lfpb_config_set_max_disparity(lfpb_config* cfg, double pixels) {
  return guarded([&] {
    require(cfg, "config");
    if (!(pixels > 0.0) || !std::isfinite(pixels)) {
      throw lfpb::UsageError("max disparity must be a positive number");
    }
    cfg->cfg.flow.max_disparity = pixels;
  });
}

lfpb_status lfpb_config_set_flow_cache(lfpb_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg, "config");
    if (dir && *dir) {
      cfg->cfg.flow_cache = std::filesystem::path(dir);
    } else {
      cfg->cfg.flow_cache.reset();
    }
  });
}

lfpb_status lfpb_config_set_crack_fill(lfpb_config* cfg, const char* mode) {
  return guarded([&] {
    require(cfg, "config");
    require(mode, "mode");
    cfg->cfg.crack_fill = lfpb::crack_fill_from_string(mode);
  });
}

lfpb_status lfpb_config_set_consistency_tolerance(lfpb_config* cfg, double tolerance) {
  return guarded([&] {
    require(cfg, "config");
    if (!(tolerance >= 0.0)) throw lfpb::UsageError("tolerance must be >= 0");
    cfg->cfg.consistency_tolerance = tolerance;
  });
}

lfpb_status lfpb_config_set_fallback(lfpb_config* cfg, int enabled) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.fallback_to_identity = enabled != 0;
  });
}

lfpb_status lfpb_superresolve(const lfpb_lightfield* lr, const lfpb_config* cfg,
                              lfpb_result** out) {
  return guarded([&] {
    require(lr, "lightfield");
    require(cfg, "config");
    require(out, "out");
    auto r = std::make_unique<lfpb_result>();
    r->res = lfpb::pb_superresolve(lr->lf, cfg->cfg);
    r->output.lf = std::move(r->res.output);
    *out = r.release();
  });
}

void lfpb_result_free(lfpb_result* result) { delete result; }

const lfpb_lightfield* lfpb_result_output(const lfpb_result* result) {
  return result ? &result->output : nullptr;
}

lfpb_status lfpb_result_diagnostics(const lfpb_result* result, lfpb_diagnostics* out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    const auto& r = result->res;
    long long cracks = 0;
    for (const auto& m : r.crack_masks) {
      for (auto v : m.filled.data) cracks += v ? 0 : 1;
    }
    *out = {r.variance_before,
            r.variance_after,
            r.backend_calls,
            r.flow_cache_hit ? 1 : 0,
            r.backend_fell_back ? 1 : 0,
            cracks,
            static_cast<int>(r.singular_values.size()),
            static_cast<int>(r.timings.size())};
  });
}

lfpb_status lfpb_result_basis(const lfpb_result* result, int index, double* singular_value,
                              double* entropy_bits) {
  return guarded([&] {
    require(result, "result");
    const auto& r = result->res;
    if (index < 0 || index >= r.singular_values.size()) {
      throw lfpb::UsageError("basis index out of range");
    }
    if (singular_value) *singular_value = r.singular_values[index];
    if (entropy_bits) *entropy_bits = r.basis_entropies[index];
  });
}

lfpb_status lfpb_result_stage(const lfpb_result* result, int index, const char** name,
                              double* seconds) {
  return guarded([&] {
    require(result, "result");
    const auto& t = result->res.timings;
    if (index < 0 || index >= static_cast<int>(t.size())) {
      throw lfpb::UsageError("stage index out of range");
    }
    if (name) *name = t[index].stage.c_str();
    if (seconds) *seconds = t[index].seconds;
  });
}

lfpb_status lfpb_edit_propagate(const lfpb_lightfield* lr, const lfpb_config* cfg,
                                lfpb_lightfield** out) {
  return guarded([&] {
    require(lr, "lightfield");
    require(cfg, "config");
    require(out, "out");
    *out = wrap(lfpb::edit_propagate(lr->lf, cfg->cfg));
  });
}

int lfpb_default_border_crop(double max_disparity, int alpha) {
  return lfpb::default_border_crop(max_disparity, alpha);
}

lfpb_status lfpb_evaluate(const lfpb_lightfield* restored, const lfpb_lightfield* truth,
                          int border_crop, lfpb_report** out) {
  return guarded([&] {
    require(restored, "restored");
    require(truth, "truth");
    require(out, "out");
    *out = new lfpb_report{lfpb::evaluate_lf(restored->lf, truth->lf, border_crop)};
  });
}

void lfpb_report_free(lfpb_report* report) { delete report; }

lfpb_status lfpb_report_means(const lfpb_report* report, double* mean_psnr, double* mean_ssim,
                              int* view_count) {
  return guarded([&] {
    require(report, "report");
    if (mean_psnr) *mean_psnr = report->report.mean_psnr;
    if (mean_ssim) *mean_ssim = report->report.mean_ssim;
    if (view_count) *view_count = static_cast<int>(report->report.per_view.size());
  });
}

lfpb_status lfpb_report_view(const lfpb_report* report, int index, lfpb_view_metrics* out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    const auto& v = report->report.per_view;
    if (index < 0 || index >= static_cast<int>(v.size())) {
      throw lfpb::UsageError("view index out of range");
    }
    *out = {v[index].index, v[index].s, v[index].t, v[index].psnr_db, v[index].ssim};
  });
}

lfpb_status lfpb_report_attach(lfpb_report* report, const lfpb_result* result) {
  return guarded([&] {
    require(report, "report");
    require(result, "result");
    auto& rep = report->report;
    const auto& r = result->res;
    rep.variance_before = r.variance_before;
    rep.variance_after = r.variance_after;
    rep.basis_entropies = r.basis_entropies;
    rep.stage_seconds.clear();
    for (const auto& t : r.timings) rep.stage_seconds.emplace_back(t.stage, t.seconds);
  });
}

lfpb_status lfpb_report_write(const lfpb_report* report, const char* dir, int with_timings) {
  return guarded([&] {
    require(report, "report");
    require(dir, "dir");
    lfpb::write_report(report->report, dir, with_timings != 0);
  });
}

lfpb_status lfpb_compaction(const lfpb_lightfield* lf, double max_disparity, const char* out_dir,
                            lfpb_compaction_stats* out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    lfpb::BlockMatchingParams bp;
    bp.max_disparity = max_disparity;
    lfpb::LightField luma;
    luma.rows = lf->lf.rows;
    luma.cols = lf->lf.cols;
    luma.views = lf->lf.views;
    const lfpb::FlowSet flows = lfpb::estimate_flows(luma, bp);
    const lfpb::LightField aligned = lfpb::align(luma, flows).aligned;
    const lfpb::Decomposition du = lfpb::decompose(lfpb::flatten(luma));
    const lfpb::Decomposition da = lfpb::decompose(lfpb::flatten(aligned));
    const auto eu = lfpb::basis_entropies(du);
    const auto ea = lfpb::basis_entropies(da);
    out->basis_count = du.basis_count();
    out->residual_unaligned = lfpb::residual_energy(du);
    out->residual_aligned = lfpb::residual_energy(da);
    out->variance_unaligned = luma.view_count() > 1 ? lfpb::view_variance(luma) : 0.0;
    out->variance_aligned = luma.view_count() > 1 ? lfpb::view_variance(aligned) : 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out->entropy_b1_unaligned = eu.size() > 1 ? eu[1] : nan;
    out->entropy_b1_aligned = ea.size() > 1 ? ea[1] : nan;
    if (out_dir && *out_dir) {
      const std::filesystem::path dir(out_dir);
      lfpb::export_basis_images(da, dir);
      std::ofstream table(dir / "entropy.csv");
      if (!table) throw lfpb::IoError("cannot write " + (dir / "entropy.csv").string());
      table << "layout";
      for (std::size_t j = 0; j < eu.size(); ++j) table << ",B" << j;
      table << "\n";
      auto row = [&](const char* name, const std::vector<double>& e) {
        table << name;
        char buf[32];
        for (double v : e) {
          std::snprintf(buf, sizeof buf, "%.6f", v);
          table << "," << buf;
        }
        table << "\n";
      };
      row("unaligned", eu);
      row("aligned", ea);
      if (!table) throw lfpb::IoError("failed writing " + (dir / "entropy.csv").string());
    }
  });
}

lfpb_status lfpb_refocus(const lfpb_lightfield* lf, double slope, lfpb_image** out) {
  return guarded([&] {
    require(lf, "lightfield");
    require(out, "out");
    *out = new lfpb_image{lfpb::refocus(lf->lf, slope)};
  });
}

void lfpb_image_free(lfpb_image* image) { delete image; }

lfpb_status lfpb_image_size(const lfpb_image* image, int* width, int* height) {
  return guarded([&] {
    require(image, "image");
    if (width) *width = image->img.width;
    if (height) *height = image->img.height;
  });
}

lfpb_status lfpb_image_save_png(const lfpb_image* image, const char* path, int bit_depth) {
  return guarded([&] {
    require(image, "image");
    require(path, "path");
    lfpb::Image clamped = image->img;
    lfpb::clamp_inplace(clamped);
    lfpb::write_png(path, clamped, bit_depth);
  });
}

lfpb_status lfpb_image_sharpness(const lfpb_image* image, double* out) {
  return guarded([&] {
    require(image, "image");
    require(out, "out");
    *out = lfpb::laplacian_variance(image->img);
  });
}

lfpb_status lfpb_image_psnr(const lfpb_image* a, const lfpb_image* b, int border_crop,
                            double* out) {
  return guarded([&] {
    require(a, "image");
    require(b, "image");
    require(out, "out");
    lfpb::require_same_shape(a->img, b->img, "psnr");
    const int w = a->img.width - 2 * border_crop;
    const int h = a->img.height - 2 * border_crop;
    if (border_crop < 0 || w < 1 || h < 1) throw lfpb::UsageError("invalid border crop");
    *out = lfpb::psnr(lfpb::crop(a->img, border_crop, border_crop, w, h),
                      lfpb::crop(b->img, border_crop, border_crop, w, h));
  });
}

}  // extern "C"
