#include "lfpb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "lfpb/error.hpp"
#include "lfpb/parallel.hpp"
#include "lfpb/resample.hpp"

namespace lfpb {

std::string to_string(CrackFill mode) {
  switch (mode) {
    case CrackFill::collocated_lr: return "collocated_lr";
    case CrackFill::inverse_warp: return "inverse_warp";
    case CrackFill::none: return "none";
  }
  return "none";
}

CrackFill crack_fill_from_string(const std::string& name) {
  if (name == "collocated_lr") return CrackFill::collocated_lr;
  if (name == "inverse_warp") return CrackFill::inverse_warp;
  if (name == "none") return CrackFill::none;
  throw UsageError("unknown crack fill mode '" + name +
                   "' (collocated_lr, inverse_warp, none)");
}

void PipelineConfig::validate() const {
  if (alpha < 2 || alpha > 4) {
    throw UsageError("alpha must be 2, 3 or 4, got " + std::to_string(alpha));
  }
  if (!backend) throw UsageError("pipeline has no backend");
  if (!(flow.max_disparity > 0.0)) throw UsageError("max_disparity must be > 0");
  if (!(consistency_tolerance >= 0.0)) throw UsageError("consistency tolerance must be >= 0");
}

Image restore_principal(const Image& b0, const SisrBackend& backend, int alpha) {
  const auto [lo_it, hi_it] = std::minmax_element(b0.data.begin(), b0.data.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  if (!(range > 0.0)) return b0;
  Image normalized(b0.width, b0.height);
  for (std::size_t k = 0; k < b0.size(); ++k) {
    normalized.data[k] = static_cast<float>((b0.data[k] - lo) / range);
  }
  Image restored = backend.restore(normalized, alpha);
  if (!restored.same_shape(normalized)) {
    throw BackendError(ErrorKind::backend_dims,
                       "backend dim mismatch (got " + shape_string(restored.width, restored.height) +
                           ", want " + shape_string(b0.width, b0.height) + ")");
  }
  // Applied as a correction so an unchanged image maps back bit-exactly.
  Image out(b0.width, b0.height);
  for (std::size_t k = 0; k < b0.size(); ++k) {
    if (restored.data[k] == normalized.data[k]) {
      out.data[k] = b0.data[k];
      continue;
    }
    const double r = std::clamp(static_cast<double>(restored.data[k]), 0.0, 1.0);
    out.data[k] = static_cast<float>(b0.data[k] + (r - normalized.data[k]) * range);
  }
  return out;
}

Decomposition replace_principal(const Decomposition& d, const Image& restored_b0) {
  if (restored_b0.width != d.width || restored_b0.height != d.height) {
    throw DataError("restored principal basis has the wrong shape");
  }
  Decomposition out = d;
  const Image original = d.basis_image(0);
  for (int x = 0; x < d.width; ++x) {
    for (int y = 0; y < d.height; ++y) {
      const double delta =
          static_cast<double>(restored_b0.at(x, y)) - static_cast<double>(original.at(x, y));
      if (delta != 0.0) out.basis(vec_index(x, y, d.height), 0) += delta;
    }
  }
  return out;
}

Image fill_cracks(const Image& view, const WarpMask& mask, const Image& fallback) {
  require_same_shape(view, mask.filled, "fill_cracks");
  require_same_shape(view, fallback, "fill_cracks");
  Image out = view;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!mask.filled.data[k]) out.data[k] = fallback.data[k];
  }
  return out;
}

Image inpaint_from_neighbors(const Image& view, const WarpMask& mask) {
  require_same_shape(view, mask.filled, "inpaint_from_neighbors");
  Image out = view;
  Mask known = mask.filled;
  std::vector<std::pair<int, float>> updates;
  for (;;) {
    updates.clear();
    bool any_unknown = false;
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        if (known.at(x, y)) continue;
        any_unknown = true;
        double sum = 0.0;
        int count = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if ((dx || dy) && out.contains(nx, ny) && known.at(nx, ny)) {
              sum += out.at(nx, ny);
              ++count;
            }
          }
        }
        if (count > 0) {
          updates.emplace_back(y * out.width + x, static_cast<float>(sum / count));
        }
      }
    }
    if (!any_unknown || updates.empty()) break;
    for (const auto& [k, v] : updates) {
      out.data[k] = v;
      known.data[k] = 1;
    }
  }
  return out;
}

FlowField invert_flow(const FlowField& flow) {
  Image neg_u(flow.width(), flow.height());
  Image neg_v(flow.width(), flow.height());
  for (std::size_t k = 0; k < neg_u.size(); ++k) {
    neg_u.data[k] = -flow.u.data[k];
    neg_v.data[k] = -flow.v.data[k];
  }
  ForwardWarpResult wu = forward_warp(neg_u, flow);
  ForwardWarpResult wv = forward_warp(neg_v, flow);
  FlowField out;
  out.u = std::move(wu.image);
  out.v = std::move(wv.image);
  out.valid = std::move(wu.mask.filled);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink), start_(Clock::now()) {}
  void lap(const char* stage) {
    const auto now = Clock::now();
    sink_.push_back({stage, std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  std::vector<StageTiming>& sink_;
  Clock::time_point start_;
};

LightField luma_only(const LightField& lf) {
  LightField out;
  out.rows = lf.rows;
  out.cols = lf.cols;
  out.views = lf.views;
  return out;
}

void check_flows(const FlowSet& flows, const LightField& lf) {
  if (static_cast<int>(flows.flows.size()) != lf.view_count()) {
    throw DataError("flow set has " + std::to_string(flows.flows.size()) + " entries for " +
                    std::to_string(lf.view_count()) + " views");
  }
  for (int i = 0; i < lf.view_count(); ++i) {
    if (flows.flows[i].width() != lf.width() || flows.flows[i].height() != lf.height()) {
      throw DataError("flow for view " + std::to_string(i) + " is " +
                      shape_string(flows.flows[i].width(), flows.flows[i].height()) +
                      ", views are " + shape_string(lf.width(), lf.height()));
    }
  }
}

FlowSet obtain_flows(const LightField& up, const PipelineConfig& cfg, const FlowSet* given,
                     bool& cache_hit) {
  cache_hit = false;
  if (given) {
    check_flows(*given, up);
    return *given;
  }
  if (cfg.flow_cache) {
    if (auto cached = read_flow_cache(*cfg.flow_cache, up.rows, up.cols, up.width(), up.height())) {
      cache_hit = true;
      return std::move(*cached);
    }
  }
  FlowSet flows = estimate_flows(up, cfg.flow);
  if (cfg.flow_cache) write_flow_cache(*cfg.flow_cache, flows, up.rows, up.cols);
  return flows;
}

// A reconstructed pixel is trusted when its aligned-frame source lies in frame,
// every bilinear tap there was filled by the forward warp, and the plain
// forward/inverse round trip of the input reproduces the input.
Mask trusted_pixels(const Image& input, const Image& aligned, const WarpMask& fill,
                    const FlowField& flow, double tolerance) {
  const InverseWarpResult round_trip = inverse_warp(aligned, flow);
  Mask trusted(input.width, input.height, 0);
  for (int y = 0; y < input.height; ++y) {
    for (int x = 0; x < input.width; ++x) {
      if (round_trip.out_of_frame.at(x, y)) continue;
      const double sx = x + static_cast<double>(flow.u.at(x, y));
      const double sy = y + static_cast<double>(flow.v.at(x, y));
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const bool nx = sx > x0 && x0 + 1 < input.width;
      const bool ny = sy > y0 && y0 + 1 < input.height;
      bool ok = fill.filled.at(x0, y0) && (!nx || fill.filled.at(x0 + 1, y0)) &&
                (!ny || fill.filled.at(x0, y0 + 1)) &&
                (!nx || !ny || fill.filled.at(x0 + 1, y0 + 1));
      ok = ok && std::abs(round_trip.image.at(x, y) - input.at(x, y)) <= tolerance;
      trusted.at(x, y) = ok ? 1 : 0;
    }
  }
  return trusted;
}

}  // namespace

PipelineResult pb_superresolve(const LightField& lr, const PipelineConfig& cfg,
                               const FlowSet* flows) {
  cfg.validate();
  lr.validate();
  PipelineResult result;
  StageClock clock(result.timings);

  const LightField up = upsample(lr, cfg.alpha);
  const LightField up_luma = luma_only(up);
  clock.lap("upsample");

  result.flows = obtain_flows(up_luma, cfg, flows, result.flow_cache_hit);
  clock.lap("flow");

  const int n = up.view_count();
  if (n >= 2) result.variance_before = view_variance(up_luma);
  AlignResult al = align(up_luma, result.flows);
  if (n >= 2) result.variance_after = view_variance(al.aligned);
  clock.lap("align");

  Decomposition d = decompose(flatten(al.aligned));
  result.singular_values = d.singular_values;
  result.coefficients = d.coefficients;
  result.basis_entropies = basis_entropies(d);
  result.principal_basis = d.basis_image(0);
  clock.lap("decompose");

  try {
    ++result.backend_calls;
    result.restored_principal = restore_principal(result.principal_basis, *cfg.backend, cfg.alpha);
  } catch (const BackendError& e) {
    if (!cfg.fallback_to_identity) throw;
    std::cerr << "lfpb: backend failed (" << e.what() << "), falling back to identity\n";
    result.restored_principal = result.principal_basis;
    result.backend_fell_back = true;
  }
  clock.lap("restore");

  const LightField restored_aligned =
      unflatten(reconstruct(replace_principal(d, result.restored_principal)));
  d = Decomposition{};
  clock.lap("reconstruct");

  result.output = up;
  result.crack_masks.resize(n);
  parallel_for(n, [&](int i) {
    const FlowField& flow = result.flows.flows[i];
    Image view = inverse_warp(restored_aligned.views[i], flow).image;
    WarpMask mask{trusted_pixels(up.views[i], al.aligned.views[i], al.masks[i], flow,
                                 cfg.consistency_tolerance)};
    switch (cfg.crack_fill) {
      case CrackFill::collocated_lr: view = fill_cracks(view, mask, up.views[i]); break;
      case CrackFill::inverse_warp: view = inpaint_from_neighbors(view, mask); break;
      case CrackFill::none: break;
    }
    clamp_inplace(view);
    result.output.views[i] = std::move(view);
    result.crack_masks[i] = std::move(mask);
  });
  clock.lap("warp_back");
  return result;
}

LightField edit_propagate(const LightField& lr, const PipelineConfig& cfg, const FlowSet* flows) {
  cfg.validate();
  lr.validate();
  const LightField up = upsample(lr, cfg.alpha);
  bool cache_hit = false;
  const FlowSet fs = obtain_flows(luma_only(up), cfg, flows, cache_hit);
  const int c = up.center_index();
  Image center = cfg.backend->restore(up.views[c], cfg.alpha);
  require_same_shape(center, up.views[c], "edit_propagate backend output");
  clamp_inplace(center);
  LightField out = up;
  parallel_for(up.view_count(), [&](int i) {
    if (i == c) {
      out.views[i] = center;
      return;
    }
    const ForwardWarpResult fw = forward_warp(center, invert_flow(fs.flows[i]));
    out.views[i] = fill_cracks(fw.image, fw.mask, up.views[i]);
  });
  return out;
}

}  // namespace lfpb
