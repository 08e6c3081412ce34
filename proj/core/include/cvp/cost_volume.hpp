#pragma once

#include <cstdint>
#include <vector>

#include "cvp/camera.hpp"
#include "cvp/depth_map.hpp"
#include "cvp/error.hpp"
#include "cvp/pyramid.hpp"

namespace cvp {

inline constexpr float kSentinelCost = 1e9f;

/// Depth hypotheses indexing a cost volume. Absolute sets sample the
/// scene range uniformly; residual sets are per-pixel offsets around an
/// upsampled base depth.
struct HypothesisSet {
  enum class Kind { absolute, residual };
  Kind kind = Kind::absolute;
  int count = 0;  // M
  int width = 0;
  int height = 0;

  // absolute: d_m = d_min + m*(d_max-d_min)/M
  double d_min = 0.0;
  double d_max = 0.0;

  // residual: depth = base(p) + m*delta(p), m in {-M/2 .. M/2-1}
  std::vector<float> base;
  std::vector<float> delta;

  static HypothesisSet uniform(double d_min, double d_max, int M, int w, int h);

  double absolute_depth(int m) const {
    return d_min + m * (d_max - d_min) / count;
  }
  /// Hypothesis depth at pixel (x,y), index m counted from 0.
  double depth_at(int x, int y, int m) const {
    if (kind == Kind::absolute) return absolute_depth(m);
    const size_t i = size_t(y) * width + x;
    return base[i] + double(m - count / 2) * delta[i];
  }
};

struct CostVolume {
  int width = 0;
  int height = 0;
  int level = 0;
  HypothesisSet hypotheses;
  std::vector<float> costs;          // (y*W + x)*M + m
  std::vector<uint8_t> valid_views;  // same layout

  CostVolume() = default;
  CostVolume(int w, int h, int l, HypothesisSet hyp)
      : width(w),
        height(h),
        level(l),
        hypotheses(std::move(hyp)),
        costs(size_t(w) * h * hypotheses.count, kSentinelCost),
        valid_views(size_t(w) * h * hypotheses.count, 0) {}

  int hypotheses_per_pixel() const { return hypotheses.count; }
  size_t allocated_cells() const { return costs.size(); }
  size_t cell(int x, int y, int m) const {
    return (size_t(y) * width + x) * hypotheses.count + m;
  }
};

struct ProbabilityVolume {
  int width = 0;
  int height = 0;
  int level = 0;
  HypothesisSet hypotheses;
  std::vector<float> probs;       // (y*W + x)*M + m, rows sum to 1
  std::vector<uint8_t> low_conf;  // per pixel: all hypotheses were sentinel

  size_t cell(int x, int y, int m) const {
    return (size_t(y) * width + x) * hypotheses.count + m;
  }
};

/// Mean squared deviation from the valid-view mean feature, averaged over
/// channels. Fewer than 2 valid views yields kSentinelCost.
double variance_cost(const float* features, const uint8_t* valid, int n_views,
                     int channels, int* valid_count = nullptr);

/// Full uniform plane sweep at one pyramid level via plane-induced
/// homographies. Feature maps must already be at `level` resolution.
CostVolume build_coarse_volume(const FeatureMap& ref_feat,
                               const std::vector<FeatureMap>& src_feats,
                               const CameraView& ref,
                               const std::vector<CameraView>& srcs, int M,
                               int level, int threads = 0);

/// Per-pixel partial volume over M residual hypotheses around the
/// upsampled depth map. search_offset_px is the epipolar half-range used
/// to derive the per-pixel search range s_p (delta = s_p / M).
CostVolume build_partial_volume(const FeatureMap& ref_feat,
                                const std::vector<FeatureMap>& src_feats,
                                const CameraView& ref,
                                const std::vector<CameraView>& srcs,
                                const DepthMap& d_up, int M, int level,
                                double search_offset_px = 2.0,
                                int threads = 0);

/// Two 3x3 spatial box passes per hypothesis slice, then a [.25 .5 .25]
/// filter along the hypothesis axis. Sentinel entries are skipped and
/// stay sentinel.
CostVolume aggregate(const CostVolume& cv, int threads = 0);

/// Softmax of -cost/tau per pixel; sentinel hypotheses get probability 0.
/// All-sentinel pixels become uniform and are flagged low-confidence.
ProbabilityVolume to_probability(const CostVolume& cv, double tau = 1.0,
                                 int threads = 0);

}  // namespace cvp
