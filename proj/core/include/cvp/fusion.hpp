#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cvp/camera.hpp"
#include "cvp/depth_map.hpp"
#include "cvp/error.hpp"
#include "cvp/image.hpp"

namespace cvp {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::array<uint8_t, 3>> colors;  // empty or same size as points

  size_t size() const { return points.size(); }
  bool has_colors() const { return !colors.empty(); }
};

struct FusionConfig {
  double conf_min = 0.8;
  double reproj_px_max = 1.0;
  double rel_depth_max = 0.01;
  int min_consistent_views = 3;
  int threads = 0;
};

struct CloudMetrics {
  double accuracy = 0.0;
  double completeness = 0.0;
  double overall = 0.0;
};

/// Keep pixels that pass the confidence gate and round-trip consistently
/// (reprojection error and relative depth) into enough other views.
std::vector<DepthMap> consistency_filter(const std::vector<DepthMap>& depths,
                                         const std::vector<CameraView>& cams,
                                         const FusionConfig& cfg);

/// Back-project surviving pixels and merge mutually consistent matches by
/// averaging depth along the reference ray. Colors, when images are
/// given, come from the reference image of each point.
PointCloud fuse(const std::vector<DepthMap>& filtered,
                const std::vector<CameraView>& cams,
                const std::vector<ColorImage>* images = nullptr,
                const FusionConfig& cfg = {});

/// Accuracy = mean est->gt nearest-neighbor distance (capped outliers
/// excluded); completeness = the transpose; overall = their average.
CloudMetrics cloud_metrics(const PointCloud& est, const PointCloud& gt,
                           double dist_cap = 20.0, int threads = 0);

/// Exact nearest-neighbor distances via a kd-tree (identical to brute
/// force); exposed for the metric oracle tests.
std::vector<double> nn_distances(const std::vector<Vec3>& queries,
                                 const std::vector<Vec3>& targets,
                                 int threads = 0);

}  // namespace cvp
