// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfpb/backend.hpp"
#include "lfpb/compaction.hpp"
#include "lfpb/error.hpp"
#include "lfpb/io.hpp"
#include "lfpb/metrics.hpp"
#include "lfpb/pipeline.hpp"
#include "lfpb/resample.hpp"
#include "lfpb/synth.hpp"
#include "lfpb/warp.hpp"

namespace fs = std::filesystem;
using namespace lfpb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a sub-check; the criterion fails if any sub-check fails.
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Eigen::MatrixXd gaussian_matrix(int m, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd mat(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) mat(i, j) = dist(rng);
  return mat;
}

LFMatrix as_lf_matrix(const Eigen::MatrixXd& data) {
  LFMatrix mat;
  mat.data = data;
  mat.width = 1;
  mat.height = static_cast<int>(data.rows());
  mat.rows = 1;
  mat.cols = static_cast<int>(data.cols());
  return mat;
}

// Truncates every view to a multiple of alpha so the degraded light field
// upsamples back onto the same grid.
LightField crop_for(const LightField& lf, int alpha) {
  LightField out = lf;
  const int w = crop_to_multiple(lf.width(), alpha);
  const int h = crop_to_multiple(lf.height(), alpha);
  for (auto& v : out.views) v = crop(v, 0, 0, w, h);
  return out;
}

LightField degrade_clean(const LightField& hr, int alpha, std::uint64_t seed) {
  DegradationParams dp;
  dp.alpha = alpha;
  dp.seed = seed;
  return degrade(hr, dp);
}

// ---------------------------------------------------------------------------

Outcome svd_round_trip() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> rows(64, 4096);
  std::uniform_int_distribution<int> cols(4, 81);
  double worst_rec = 0.0;
  double worst_diag = 0.0;
  auto measure = [&](const LFMatrix& mat) {
    const Decomposition d = decompose(mat);
    const double rec = (mat.data - reconstruct(d).data).norm() / mat.data.norm();
    Eigen::MatrixXd btb = d.basis.transpose() * d.basis;
    const double scale = btb.diagonal().maxCoeff();
    btb.diagonal().setZero();
    worst_rec = std::max(worst_rec, rec);
    worst_diag = std::max(worst_diag, btb.cwiseAbs().maxCoeff() / scale);
  };
  for (int trial = 0; trial < 50; ++trial) measure(as_lf_matrix(gaussian_matrix(rows(rng), cols(rng), rng)));
  const SyntheticLightField s = synth_layered(make_layered_scene(120, 100, 3, 1.0, 3.0, 0.2), 9, 9);
  measure(flatten(s.lf));
  const double secs = seconds_since(t0);
  o.check(worst_rec < 1e-9, "reconstruction " + fmt("%.2e", worst_rec));
  o.check(worst_diag < 1e-9, "B^T B off-diagonal " + fmt("%.2e", worst_diag));
  o.check(secs < 30.0, "runtime " + fmt("%.1f s", secs));
  o.note("max rel error " + fmt("%.2e", worst_rec) + ", max off-diagonal " + fmt("%.2e", worst_diag) +
         ", " + fmt("%.1f s", secs));
  return o;
}

// Singular values as square roots of the eigenvalues of M^T M, found with
// cyclic Jacobi rotations on the Gram matrix.
std::vector<double> gram_jacobi_singular_values(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.cols());
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < m.rows(); ++k) g[i][j] += m(k, i) * m(k, j);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += g[p][q] * g[p][q];
    if (off < 1e-300) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (g[p][q] == 0.0) continue;
        const double theta = (g[q][q] - g[p][p]) / (2.0 * g[p][q]);
        const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double gkp = g[k][p];
          const double gkq = g[k][q];
          g[k][p] = c * gkp - s * gkq;
          g[k][q] = s * gkp + c * gkq;
        }
        for (int k = 0; k < n; ++k) {
          const double gpk = g[p][k];
          const double gqk = g[q][k];
          g[p][k] = c * gpk - s * gqk;
          g[q][k] = s * gpk + c * gqk;
        }
      }
    }
  }
  std::vector<double> sv(n);
  for (int i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, g[i][i]));
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

Outcome svd_oracle() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const int m = n + static_cast<int>(rng() % (13 - n));
    const Eigen::MatrixXd mat = gaussian_matrix(m, n, rng);
    const std::vector<double> expect = gram_jacobi_singular_values(mat);
    const Decomposition d = decompose(as_lf_matrix(mat));
    for (int j = 0; j < n; ++j) {
      worst = std::max(worst, std::fabs(d.singular_values(j) - expect[j]) / expect[j]);
    }
  }
  o.check(worst < 1e-8, "relative error " + fmt("%.2e", worst));
  o.note("max relative error " + fmt("%.2e", worst));
  return o;
}

struct TranslationalCase {
  int grid;
  double d;
  SyntheticLightField s;
};

std::vector<TranslationalCase> translational_cases() {
  std::vector<TranslationalCase> out;
  std::uint64_t seed = 10;
  for (int grid : {3, 9}) {
    for (double d : {0.5, 1.0, 2.0}) {
      out.push_back({grid, d, synth_translational(value_noise(128, 112, ++seed, 4, 3.0), grid, grid, d)});
    }
  }
  return out;
}

std::string case_name(const TranslationalCase& c) {
  return std::to_string(c.grid) + "x" + std::to_string(c.grid) + " d=" + fmt("%.1f", c.d);
}

Outcome alignment_collapse(const std::vector<TranslationalCase>& cases) {
  Outcome o;
  const auto t0 = Clock::now();
  BlockMatchingParams bm;
  for (const auto& c : cases) {
    const double before = view_variance(c.s.lf);
    const double exact = view_variance(align(c.s.lf, c.s.flows).aligned);
    const double estimated = view_variance(align(c.s.lf, estimate_flows(c.s.lf, bm)).aligned);
    const std::string name = case_name(c);
    o.check(exact < 1e-10, name + " exact-flow variance " + fmt("%.3g", exact));
    o.check(before >= 4.0 * estimated, name + " block-matching reduction " + fmt("%.2fx", before / estimated));
    o.note(name + ": exact " + fmt("%.3g", exact) + ", reduction " + fmt("%.1fx", before / estimated));
  }
  const double secs = seconds_since(t0);
  o.check(secs < 120.0, "runtime " + fmt("%.1f s", secs));
  o.note(fmt("%.1f s", secs));
  return o;
}

Outcome energy_compaction(const std::vector<TranslationalCase>& cases) {
  Outcome o;
  std::vector<std::pair<std::string, LightField>> fields;
  for (const auto& c : cases) fields.emplace_back(case_name(c), c.s.lf);
  fields.emplace_back("layered 5x5", synth_layered(make_layered_scene(140, 120, 5, 1.0, 3.0, 0.0), 5, 5).lf);
  if (const char* real = std::getenv("LFPB_REAL_LF")) {
    fields.emplace_back(std::string("real ") + real, load_lightfield(real));
  } else {
    o.note("no real light field supplied (set LFPB_REAL_LF)");
  }
  for (const auto& [name, lf] : fields) {
    const Decomposition plain = decompose(flatten(lf));
    const AlignResult al = align(lf, estimate_flows(lf, BlockMatchingParams{}));
    const Decomposition aligned = decompose(flatten(al.aligned));
    const double e0 = basis_entropies(plain)[1];
    const double e1 = basis_entropies(aligned)[1];
    o.check(residual_energy(aligned) < residual_energy(plain), name + " residual energy");
    o.check(e1 < e0, name + " B1 entropy " + fmt("%.3f -> %.3f", e0, e1));
    o.note(name + ": residual " + fmt("%.4g -> %.4g", residual_energy(plain), residual_energy(aligned)) +
           ", B1 entropy " + fmt("%.2f -> %.2f", e0, e1));
  }
  return o;
}

struct PlaneCase {
  int alpha;
  std::uint64_t seed;
  LightField hr;
  LightField lr;
  EvalReport bicubic;
};

int border_for(int alpha) { return default_border_crop(16.0, alpha); }

PlaneCase plane_case(int alpha, std::uint64_t seed) {
  PlaneCase c;
  c.alpha = alpha;
  c.seed = seed;
  c.hr = crop_for(synth_translational(value_noise(120, 120, seed, 4, 2.0), 5, 5, 1.0).lf, alpha);
  c.lr = degrade_clean(c.hr, alpha, seed);
  c.bicubic = evaluate_lf(upsample(c.lr, alpha), c.hr, border_for(alpha));
  return c;
}

Outcome no_harm() {
  Outcome o;
  double worst = 0.0;
  for (int alpha : {2, 3, 4}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const PlaneCase c = plane_case(alpha, seed);
      PipelineConfig cfg;
      cfg.alpha = alpha;
      const EvalReport r = evaluate_lf(pb_superresolve(c.lr, cfg).output, c.hr, border_for(alpha));
      const double delta = r.mean_psnr - c.bicubic.mean_psnr;
      if (std::fabs(delta) > std::fabs(worst)) worst = delta;
      o.check(std::fabs(delta) <= 0.2, "alpha " + std::to_string(alpha) + " seed " + std::to_string(seed) +
                                           " delta " + fmt("%+.3f dB", delta));
    }
  }
  o.note("largest |identity - bicubic| " + fmt("%+.3f dB", worst) + " over 15 runs");
  return o;
}

Outcome pipeline_gain() {
  Outcome o;
  double worst_share = 1.0;
  for (int alpha : {2, 3}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const PlaneCase c = plane_case(alpha, seed);
      PipelineConfig cfg;
      cfg.alpha = alpha;
      cfg.backend = std::make_shared<SharpenBackend>();
      const EvalReport r = evaluate_lf(pb_superresolve(c.lr, cfg).output, c.hr, border_for(alpha));
      int better = 0;
      for (std::size_t i = 0; i < r.per_view.size(); ++i) {
        better += r.per_view[i].psnr_db >= c.bicubic.per_view[i].psnr_db + 0.1;
      }
      const double share = static_cast<double>(better) / r.per_view.size();
      worst_share = std::min(worst_share, share);
      o.check(share >= 0.7, "alpha " + std::to_string(alpha) + " seed " + std::to_string(seed) + " " +
                                std::to_string(better) + "/" + std::to_string(r.per_view.size()) + " views");
      if (alpha == 3 && seed == 1) {
        o.note("alpha 3 seed 1: bicubic " + fmt("%.2f", c.bicubic.mean_psnr) + " dB, PB " +
               fmt("%.2f dB", r.mean_psnr));
      }
    }
  }
  o.note("lowest share of views gaining >= 0.1 dB " + fmt("%.0f%%", 100.0 * worst_share));
  return o;
}

struct LayeredCase {
  int alpha;
  std::uint64_t seed;
  LightField hr;
  LightField lr;
};

std::vector<LayeredCase> layered_cases() {
  std::vector<LayeredCase> out;
  for (int alpha : {2, 3}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      LayeredCase c;
      c.alpha = alpha;
      c.seed = seed;
      c.hr = crop_for(synth_layered(make_layered_scene(132, 132, seed, 1.0, 3.0, 0.5), 5, 5).lf, alpha);
      c.lr = degrade_clean(c.hr, alpha, seed);
      out.push_back(std::move(c));
    }
  }
  return out;
}

Outcome edit_propagation(const std::vector<LayeredCase>& cases) {
  Outcome o;
  for (const auto& c : cases) {
    PipelineConfig cfg;
    cfg.alpha = c.alpha;
    cfg.backend = std::make_shared<SharpenBackend>();
    const int crop_px = border_for(c.alpha);
    const PipelineResult pb = pb_superresolve(c.lr, cfg);
    const EvalReport rp = evaluate_lf(pb.output, c.hr, crop_px);
    const EvalReport re = evaluate_lf(edit_propagate(c.lr, cfg, &pb.flows), c.hr, crop_px);
    const int center = c.hr.center_index();
    double pb_rest = 0.0;
    double ep_rest = 0.0;
    for (int i = 0; i < c.hr.view_count(); ++i) {
      if (i == center) continue;
      pb_rest += rp.per_view[i].psnr_db / (c.hr.view_count() - 1);
      ep_rest += re.per_view[i].psnr_db / (c.hr.view_count() - 1);
    }
    const std::string name = "alpha " + std::to_string(c.alpha) + " seed " + std::to_string(c.seed);
    o.check(ep_rest < pb_rest, name + " non-center EP " + fmt("%.2f vs PB %.2f", ep_rest, pb_rest));
    o.check(re.per_view[center].psnr_db >= rp.per_view[center].psnr_db,
            name + " center EP " + fmt("%.2f vs PB %.2f", re.per_view[center].psnr_db, rp.per_view[center].psnr_db));
    if (c.seed == 1) {
      o.note(name + ": non-center EP " + fmt("%.2f", ep_rest) + " < PB " + fmt("%.2f", pb_rest) + ", center EP " +
             fmt("%.2f", re.per_view[center].psnr_db) + " >= PB " + fmt("%.2f", rp.per_view[center].psnr_db));
    }
  }
  return o;
}

Outcome crack_filling(const std::vector<LayeredCase>& cases) {
  Outcome o;
  int views_ok = 0;
  int views = 0;
  long long cracks = 0;
  for (const auto& c : cases) {
    PipelineConfig cfg;
    cfg.alpha = c.alpha;
    cfg.backend = std::make_shared<SharpenBackend>();
    const int crop_px = border_for(c.alpha);
    const PipelineResult coll = pb_superresolve(c.lr, cfg);
    cfg.crack_fill = CrackFill::inverse_warp;
    const PipelineResult inpaint = pb_superresolve(c.lr, cfg, &coll.flows);
    const LightField up = upsample(c.lr, c.alpha);

    // An unfilled pixel is one outside the trusted mask that did not receive
    // its collocated fallback, or any non-finite value.
    long long unfilled = 0;
    for (int i = 0; i < up.view_count(); ++i) {
      for (std::size_t k = 0; k < up.views[i].size(); ++k) {
        const float v = coll.output.views[i].data[k];
        if (!std::isfinite(v)) ++unfilled;
        if (!coll.crack_masks[i].filled.data[k]) {
          ++cracks;
          if (v != std::clamp(up.views[i].data[k], 0.0f, 1.0f)) ++unfilled;
        }
        if (!std::isfinite(inpaint.output.views[i].data[k])) ++unfilled;
      }
    }
    const std::string name = "alpha " + std::to_string(c.alpha) + " seed " + std::to_string(c.seed);
    o.check(unfilled == 0, name + " " + std::to_string(unfilled) + " unfilled pixels");
    const EvalReport rc = evaluate_lf(coll.output, c.hr, crop_px);
    const EvalReport ri = evaluate_lf(inpaint.output, c.hr, crop_px);
    for (std::size_t i = 0; i < rc.per_view.size(); ++i) {
      ++views;
      if (rc.per_view[i].psnr_db >= ri.per_view[i].psnr_db) {
        ++views_ok;
      } else {
        o.check(false, name + " view " + std::to_string(i) +
                           fmt(" collocated %.3f < inverse_warp %.3f", rc.per_view[i].psnr_db, ri.per_view[i].psnr_db));
      }
    }
  }
  o.note(std::to_string(cracks) + " crack pixels filled; collocated >= inverse_warp on " +
         std::to_string(views_ok) + "/" + std::to_string(views) + " views");
  return o;
}

Outcome refocus_sweep() {
  Outcome o;
  const SyntheticLightField s = synth_translational(value_noise(140, 140, 9, 4, 3.0), 5, 5, 1.5);
  double best_slope = -1.0;
  double best = -1.0;
  for (int k = 0; k <= 60; ++k) {
    const double slope = 0.05 * k;
    const double sharp = laplacian_variance(refocus(s.lf, slope));
    if (sharp > best) {
      best = sharp;
      best_slope = slope;
    }
  }
  o.check(std::fabs(best_slope - 1.5) <= 0.05 + 1e-9, "sharpest slope " + fmt("%.2f", best_slope));
  const Image focused = refocus(s.lf, 1.5);
  const Image& base = s.lf.views[s.lf.center_index()];
  const int m = 8;
  const double db = psnr(crop(focused, m, m, base.width - 2 * m, base.height - 2 * m),
                         crop(base, m, m, base.width - 2 * m, base.height - 2 * m));
  o.check(db > 40.0, "interior PSNR " + fmt("%.2f dB", db));
  o.note("sharpest slope " + fmt("%.2f", best_slope) + ", interior PSNR at true slope " + fmt("%.2f dB", db));
  return o;
}

double psnr_oracle(const Image& a, const Image& b) {
  double sse = 0.0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) sse += std::pow(double(a.at(x, y)) - double(b.at(x, y)), 2);
  return 10.0 * std::log10(1.0 / (sse / (a.width * a.height)));
}

double ssim_oracle(const Image& a, const Image& b) {
  constexpr int n = 11;
  double g[n][n];
  double total = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) total += g[j][i] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
  const double c1 = 1e-4;
  const double c2 = 9e-4;
  double sum = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + n <= a.height; ++y0) {
    for (int x0 = 0; x0 + n <= a.width; ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double w = g[j][i] / total;
          const double va = a.at(x0 + i, y0 + j);
          const double vb = b.at(x0 + i, y0 + j);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      const double va = saa - ma * ma;
      const double vb = sbb - mb * mb;
      const double cov = sab - ma * mb;
      sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return sum / windows;
}

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> side(11, 32);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  double worst_psnr = 0.0;
  double worst_ssim = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int w = side(rng);
    const int h = side(rng);
    Image a(w, h);
    Image b(w, h);
    for (std::size_t k = 0; k < a.size(); ++k) {
      a.data[k] = unit(rng);
      b.data[k] = std::clamp(a.data[k] + noise(rng), 0.0f, 1.0f);
    }
    worst_psnr = std::max(worst_psnr, std::fabs(psnr(a, b) - psnr_oracle(a, b)));
    worst_ssim = std::max(worst_ssim, std::fabs(ssim(a, b) - ssim_oracle(a, b)));
  }
  o.check(worst_psnr < 1e-9, "psnr deviation " + fmt("%.2e", worst_psnr));
  o.check(worst_ssim < 1e-9, "ssim deviation " + fmt("%.2e", worst_ssim));
  o.note("max deviation psnr " + fmt("%.2e", worst_psnr) + ", ssim " + fmt("%.2e", worst_ssim));
  return o;
}

Outcome backend_protocol() {
  Outcome o;
  Image img = value_noise(37, 23, 4);
  for (float& v : img.data) v = std::round(v * 65535.0f) / 65535.0f;
  const Image out = run_external_backend(img, 3, {LFPB_PASSTHROUGH}, std::chrono::seconds(30));
  o.check(encode_pgm16(out) == encode_pgm16(img), "pass-through PGM bytes differ");
  const std::string scripts = std::string(LFPB_TEST_DATA_DIR) + "/backends/";
  auto kind_of = [&](const std::string& script) -> std::string {
    try {
      run_external_backend(img, 2, {scripts + script}, std::chrono::seconds(30));
    } catch (const BackendError& e) {
      switch (e.kind()) {
        case ErrorKind::backend_dims: return "backend_dims";
        case ErrorKind::backend_exit: return "backend_exit";
        default: return "other backend error";
      }
    }
    return "no error";
  };
  const std::string dims = kind_of("wrong_size.sh");
  const std::string exit = kind_of("fail_exit.sh");
  o.check(dims == "backend_dims", "wrong-size gave " + dims);
  o.check(exit == "backend_exit", "nonzero exit gave " + exit);
  o.note("pass-through bit-exact; wrong size -> " + dims + ", nonzero exit -> " + exit);
  return o;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out.emplace_back(fs::relative(e.path(), root).string(),
                     std::string(std::istreambuf_iterator<char>(in), {}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("lfpb_acceptance_demo_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cli = LFPB_CLI_PATH;
  const int rc1 = run_command(cli + " demo --seed 7 --output " + (root / "a").string() + " >/dev/null 2>&1");
  const int rc2 = run_command(cli + " demo --seed 7 --output " + (root / "b").string() + " >/dev/null 2>&1");
  o.check(rc1 == 0 && rc2 == 0, "demo exit codes " + std::to_string(rc1) + "," + std::to_string(rc2));
  const auto a = tree(root / "a");
  const auto b = tree(root / "b");
  o.check(!a.empty() && a == b, "output trees differ");
  o.note(std::to_string(a.size()) + " files compared");
  fs::remove_all(root);
  return o;
}

Outcome performance() {
  Outcome o;
  // Output resolution is fixed at 624x432 for every alpha.
  const int width = 624;
  const int height = 432;
  const SyntheticLightField s = synth_layered(make_layered_scene(width + 40, height + 40, 7, 1.0, 3.0, 0.2), 9, 9);
  LightField hr = s.lf;
  for (auto& v : hr.views) v = crop(v, 0, 0, width, height);
  std::vector<double> totals;
  for (int alpha : {2, 3, 4}) {
    const LightField lr = degrade_clean(hr, alpha, 0);
    PipelineConfig cfg;
    cfg.alpha = alpha;
    cfg.backend = std::make_shared<SharpenBackend>();
    const auto t0 = Clock::now();
    const PipelineResult r = pb_superresolve(lr, cfg);
    const double secs = seconds_since(t0);
    EvalReport report = evaluate_lf(r.output, hr, border_for(alpha));
    for (const auto& st : r.timings) report.stage_seconds.emplace_back(st.stage, st.seconds);
    const auto j = nlohmann::json::parse(report_to_json(report, true));
    const auto& wall = j["diagnostics"]["wall_clock_seconds"];
    o.check(wall.is_object() && wall.size() == r.timings.size(), "alpha " + std::to_string(alpha) + " stage timings missing");
    o.check(secs < 300.0, "alpha " + std::to_string(alpha) + " runtime " + fmt("%.1f s", secs));
    totals.push_back(secs);
    o.note("alpha " + std::to_string(alpha) + " (" + std::to_string(lr.width()) + "x" + std::to_string(lr.height()) +
           " -> " + std::to_string(width) + "x" + std::to_string(height) + ") " + fmt("%.1f s", secs));
  }
  double mean = 0.0;
  for (double t : totals) mean += t / totals.size();
  for (double t : totals) o.check(std::fabs(t - mean) <= 0.2 * mean, "runtime " + fmt("%.1f s vs mean %.1f s", t, mean));
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, name, seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "svd round trip", svd_round_trip);
  report(2, "svd oracle equivalence", svd_oracle);
  const std::vector<TranslationalCase> translational = translational_cases();
  report(3, "alignment collapse", [&] { return alignment_collapse(translational); });
  report(4, "energy compaction", [&] { return energy_compaction(translational); });
  report(5, "identity backend no-harm", no_harm);
  report(6, "sharpen backend gain", pipeline_gain);
  const std::vector<LayeredCase> layered = layered_cases();
  report(7, "edit propagation comparison", [&] { return edit_propagation(layered); });
  report(8, "crack filling", [&] { return crack_filling(layered); });
  report(9, "refocus sweep", refocus_sweep);
  report(10, "metric oracles", metric_oracles);
  report(11, "external backend protocol", backend_protocol);
  report(12, "determinism", determinism);
  report(13, "performance", performance);

  std::printf("%d/13 criteria passed\n", 13 - failures);
  return failures == 0 ? 0 : 1;
}
