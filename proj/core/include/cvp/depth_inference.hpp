#pragma once

#include <string>
#include <vector>

#include "cvp/camera.hpp"
#include "cvp/cost_volume.hpp"
#include "cvp/depth_map.hpp"
#include "cvp/image.hpp"

namespace cvp {

struct PipelineConfig {
  int levels = -1;  // top pyramid level L; -1 selects by coarsest-size rule
  int coarse_planes = 96;
  int refine_planes = 8;  // must be even
  double sample_offset_px = 0.5;
  double range_offset_px = 2.0;
  double tau = 0.01;
  int n_views = 5;  // reference + (n_views-1) sources
  int threads = 0;  // 0 = hardware concurrency
  std::string descriptor = "classic16";

  /// Epipolar half-range handed to depth_search_range; scales with the
  /// per-hypothesis pixel interval setting (0.5 px is the neutral point).
  double effective_search_offset() const {
    return range_offset_px * (sample_offset_px / 0.5);
  }
};

/// L = max(1, floor(log2(min(W,H)/64))), placing the coarsest level near
/// the 80x64 operating point.
int auto_levels(int width, int height);

struct VolumeStats {
  int level = 0;
  int hypotheses_per_pixel = 0;
  size_t allocated_cells = 0;
  double mean_delta = 0.0;  // mean per-pixel hypothesis spacing
};

struct InferenceResult {
  std::vector<DepthMap> levels;  // indexed by level, [0] is finest
  std::vector<VolumeStats> stats;
};

/// Expected depth under the absolute-hypothesis probability volume.
DepthMap soft_argmax_coarse(const ProbabilityVolume& p);

/// Upsampled base depth plus expected residual, clamped to the scene
/// depth range.
DepthMap soft_argmax_residual(const ProbabilityVolume& p, const DepthMap& d_up);

/// Catmull-Rom bicubic upsampling of the depth field; a pixel is valid
/// only when all contributing taps are valid.
DepthMap upsample_depth(const DepthMap& d, int out_width, int out_height);

/// Coarse-to-fine driver: full sweep at the top level, then residual
/// refinement down to level 0. images[0]/cams[0] is the reference view.
InferenceResult infer_depth(const std::vector<Image>& images,
                            const std::vector<CameraView>& cams,
                            const PipelineConfig& config);

struct L1Report {
  std::vector<double> per_level;  // indexed like the input lists
  double total = 0.0;
};

/// Mean absolute depth difference over the ground-truth valid mask,
/// per level and summed.
L1Report l1_error(const std::vector<DepthMap>& est,
                  const std::vector<DepthMap>& gt);

}  // namespace cvp
