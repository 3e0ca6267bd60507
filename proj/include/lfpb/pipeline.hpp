#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfpb/backend.hpp"
#include "lfpb/compaction.hpp"
#include "lfpb/flow.hpp"
#include "lfpb/lightfield.hpp"
#include "lfpb/warp.hpp"

namespace lfpb {

enum class CrackFill { collocated_lr, inverse_warp, none };

std::string to_string(CrackFill mode);
CrackFill crack_fill_from_string(const std::string& name);

struct PipelineConfig {
  int alpha = 2;
  std::shared_ptr<const SisrBackend> backend = std::make_shared<IdentityBackend>();
  BlockMatchingParams flow;
  CrackFill crack_fill = CrackFill::collocated_lr;
  /// A reconstructed pixel is trusted only if warping the pre-upsampled view
  /// to the center and back reproduces it within this tolerance.
  double consistency_tolerance = 0.02;
  std::optional<std::filesystem::path> flow_cache;
  /// Retry with the identity backend when the configured backend fails.
  bool fallback_to_identity = false;

  /// Throws UsageError unless alpha is in {2, 3, 4} and a backend is set.
  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  LightField output;
  FlowSet flows;
  std::vector<WarpMask> crack_masks;  // filled = trusted reconstruction
  Image principal_basis;
  Image restored_principal;
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd singular_values;
  std::vector<double> basis_entropies;
  double variance_before = 0.0;
  double variance_after = 0.0;
  std::vector<StageTiming> timings;
  int backend_calls = 0;
  bool flow_cache_hit = false;
  bool backend_fell_back = false;
};

/// Restores a principal basis: affinely map to [0, 1], run the backend, clamp,
/// map back to the original range.
Image restore_principal(const Image& b0, const SisrBackend& backend, int alpha);

/// Copy of `d` with basis column 0 replaced by the restored principal basis.
/// All other columns are copied untouched.
Decomposition replace_principal(const Decomposition& d, const Image& restored_b0);

/// Pixels with mask.filled stay; the rest come from the collocated fallback.
Image fill_cracks(const Image& view, const WarpMask& mask, const Image& fallback);

/// Fills unmasked pixels from their filled neighbours, peeling the holes
/// layer by layer.
Image inpaint_from_neighbors(const Image& view, const WarpMask& mask);

/// Principal-basis super-resolution of a low-resolution light field. When
/// `flows` is given, flow estimation (and the flow cache) is skipped.
PipelineResult pb_superresolve(const LightField& lr, const PipelineConfig& cfg,
                               const FlowSet* flows = nullptr);

/// Baseline: restore only the center view, forward-warp it to every view
/// through inverted flows, fill holes from the upsampled low-resolution views.
LightField edit_propagate(const LightField& lr, const PipelineConfig& cfg,
                          const FlowSet* flows = nullptr);

/// Center-to-view flow obtained by splatting the negated view-to-center flow.
/// Pixels no splat reached are invalid.
FlowField invert_flow(const FlowField& flow);

}  // namespace lfpb
