/* Principal-basis light field super-resolution: C interface.
 *
 * Every function returns an lfpb_status. On failure the message of the most
 * recent error on the calling thread is available from lfpb_last_error().
 * Objects returned through out-parameters are owned by the caller and must be
 * released with the matching *_free function. */
#ifndef LFPB_H
#define LFPB_H

#include <stdint.h>

#if defined(_WIN32)
#define LFPB_API __declspec(dllexport)
#else
#define LFPB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lfpb_status {
  LFPB_OK = 0,
  LFPB_ERR_USAGE = 1,
  LFPB_ERR_IO = 2,
  LFPB_ERR_DATA = 3,
  LFPB_ERR_BACKEND_SPAWN = 4,
  LFPB_ERR_BACKEND_EXIT = 5,
  LFPB_ERR_BACKEND_TIMEOUT = 6,
  LFPB_ERR_BACKEND_DIMS = 7,
  LFPB_ERR_BACKEND_FORMAT = 8,
  LFPB_ERR_INTERNAL = 9
} lfpb_status;

typedef struct lfpb_lightfield lfpb_lightfield;
typedef struct lfpb_image lfpb_image;
typedef struct lfpb_config lfpb_config;
typedef struct lfpb_result lfpb_result;
typedef struct lfpb_report lfpb_report;

LFPB_API const char* lfpb_version(void);
LFPB_API const char* lfpb_last_error(void);
LFPB_API const char* lfpb_status_name(lfpb_status status);
/* 0 selects the hardware concurrency. */
LFPB_API void lfpb_set_threads(int threads);

/* ---- light fields ---- */

typedef struct lfpb_lightfield_info {
  int rows;   /* angular rows (P) */
  int cols;   /* angular columns (Q) */
  int width;  /* view width in pixels */
  int height;
  int rgb;    /* 1 when chroma planes are carried */
} lfpb_lightfield_info;

LFPB_API lfpb_status lfpb_lightfield_load(const char* dir, lfpb_lightfield** out);
LFPB_API lfpb_status lfpb_lightfield_save(const lfpb_lightfield* lf, const char* dir,
                                          int bit_depth);
LFPB_API lfpb_status lfpb_lightfield_info_get(const lfpb_lightfield* lf,
                                              lfpb_lightfield_info* out);
/* Top-left anchored crop of every view. */
LFPB_API lfpb_status lfpb_lightfield_crop(const lfpb_lightfield* lf, int width, int height,
                                          lfpb_lightfield** out);
LFPB_API lfpb_status lfpb_lightfield_view(const lfpb_lightfield* lf, int s, int t,
                                          lfpb_image** out);
LFPB_API void lfpb_lightfield_free(lfpb_lightfield* lf);

typedef struct lfpb_scene_params {
  int rows;
  int cols;
  int width;
  int height;
  uint64_t seed;
  double background_disparity;
  double foreground_disparity;
  double shading;
} lfpb_scene_params;

/* Textured two-layer scene with occlusions. */
LFPB_API lfpb_status lfpb_synthesize_scene(const lfpb_scene_params* params,
                                           lfpb_lightfield** out);
/* Textured plane translated by `disparity` pixels per view step. */
LFPB_API lfpb_status lfpb_synthesize_plane(int rows, int cols, int width, int height,
                                           uint64_t seed, double disparity,
                                           lfpb_lightfield** out);

typedef enum lfpb_blur { LFPB_BLUR_NONE = 0, LFPB_BLUR_BOX = 1, LFPB_BLUR_GAUSSIAN = 2 } lfpb_blur;
typedef enum lfpb_decimation { LFPB_DECIMATE_BICUBIC = 0, LFPB_DECIMATE_POINT = 1 } lfpb_decimation;

typedef struct lfpb_degrade_params {
  int alpha;
  lfpb_blur blur;
  double blur_sigma;
  lfpb_decimation decimation;
  double noise_sigma;
  uint64_t seed;
} lfpb_degrade_params;

LFPB_API void lfpb_degrade_params_init(lfpb_degrade_params* params);
LFPB_API lfpb_status lfpb_degrade(const lfpb_lightfield* lf, const lfpb_degrade_params* params,
                                  lfpb_lightfield** out);
LFPB_API lfpb_status lfpb_upsample(const lfpb_lightfield* lf, int alpha, lfpb_lightfield** out);
/* Mean per-pixel variance across views, 8-bit units. */
LFPB_API lfpb_status lfpb_view_variance(const lfpb_lightfield* lf, double* out);

/* ---- pipeline ---- */

LFPB_API lfpb_status lfpb_config_create(lfpb_config** out);
LFPB_API void lfpb_config_free(lfpb_config* cfg);
LFPB_API lfpb_status lfpb_config_set_alpha(lfpb_config* cfg, int alpha);
/* "identity", "sharpen" or "external:<command> [args]". */
LFPB_API lfpb_status lfpb_config_set_backend(lfpb_config* cfg, const char* spec,
                                             int timeout_ms);
LFPB_API lfpb_status lfpb_config_set_max_disparity(lfpb_config* cfg, double pixels);
/* NULL disables the cache. */
LFPB_API lfpb_status lfpb_config_set_flow_cache(lfpb_config* cfg, const char* dir);
/* "collocated_lr", "inverse_warp" or "none". */
LFPB_API lfpb_status lfpb_config_set_crack_fill(lfpb_config* cfg, const char* mode);
LFPB_API lfpb_status lfpb_config_set_consistency_tolerance(lfpb_config* cfg, double tolerance);
LFPB_API lfpb_status lfpb_config_set_fallback(lfpb_config* cfg, int enabled);

typedef struct lfpb_diagnostics {
  double variance_before;
  double variance_after;
  int backend_calls;
  int flow_cache_hit;
  int backend_fell_back;
  long long crack_pixels; /* pixels replaced by the crack fill */
  int basis_count;
  int stage_count;
} lfpb_diagnostics;

LFPB_API lfpb_status lfpb_superresolve(const lfpb_lightfield* lr, const lfpb_config* cfg,
                                       lfpb_result** out);
LFPB_API void lfpb_result_free(lfpb_result* result);
/* Borrowed; valid until the result is freed. */
LFPB_API const lfpb_lightfield* lfpb_result_output(const lfpb_result* result);
LFPB_API lfpb_status lfpb_result_diagnostics(const lfpb_result* result, lfpb_diagnostics* out);
LFPB_API lfpb_status lfpb_result_basis(const lfpb_result* result, int index,
                                       double* singular_value, double* entropy_bits);
LFPB_API lfpb_status lfpb_result_stage(const lfpb_result* result, int index, const char** name,
                                       double* seconds);

LFPB_API lfpb_status lfpb_edit_propagate(const lfpb_lightfield* lr, const lfpb_config* cfg,
                                         lfpb_lightfield** out);

/* ---- evaluation ---- */

typedef struct lfpb_view_metrics {
  int index;
  int s;
  int t;
  double psnr_db; /* +inf for identical views */
  double ssim;
} lfpb_view_metrics;

LFPB_API int lfpb_default_border_crop(double max_disparity, int alpha);
LFPB_API lfpb_status lfpb_evaluate(const lfpb_lightfield* restored, const lfpb_lightfield* truth,
                                   int border_crop, lfpb_report** out);
LFPB_API void lfpb_report_free(lfpb_report* report);
LFPB_API lfpb_status lfpb_report_means(const lfpb_report* report, double* mean_psnr,
                                       double* mean_ssim, int* view_count);
LFPB_API lfpb_status lfpb_report_view(const lfpb_report* report, int index,
                                      lfpb_view_metrics* out);
/* Copies variances, basis entropies and stage timings into the report. */
LFPB_API lfpb_status lfpb_report_attach(lfpb_report* report, const lfpb_result* result);
/* Writes report.json and report.csv. */
LFPB_API lfpb_status lfpb_report_write(const lfpb_report* report, const char* dir,
                                       int with_timings);

typedef struct lfpb_compaction_stats {
  int basis_count;
  double residual_unaligned; /* sum of squared singular values past the first */
  double residual_aligned;
  double variance_unaligned;
  double variance_aligned;
  double entropy_b1_unaligned;
  double entropy_b1_aligned;
} lfpb_compaction_stats;

/* Decomposes the light field before and after alignment to the center view.
 * When out_dir is set, writes the aligned basis images, decomposition.txt and
 * an entropy table (entropy.csv: one row per layout, one column per basis). */
LFPB_API lfpb_status lfpb_compaction(const lfpb_lightfield* lf, double max_disparity,
                                     const char* out_dir, lfpb_compaction_stats* out);

/* ---- images ---- */

LFPB_API lfpb_status lfpb_refocus(const lfpb_lightfield* lf, double slope, lfpb_image** out);
LFPB_API void lfpb_image_free(lfpb_image* image);
LFPB_API lfpb_status lfpb_image_size(const lfpb_image* image, int* width, int* height);
LFPB_API lfpb_status lfpb_image_save_png(const lfpb_image* image, const char* path,
                                         int bit_depth);
/* Variance of the 4-neighbour Laplacian. */
LFPB_API lfpb_status lfpb_image_sharpness(const lfpb_image* image, double* out);
LFPB_API lfpb_status lfpb_image_psnr(const lfpb_image* a, const lfpb_image* b,
                                     int border_crop, double* out);

#ifdef __cplusplus
}
#endif

#endif /* LFPB_H */
