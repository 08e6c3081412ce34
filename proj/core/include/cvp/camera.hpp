#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cvp/error.hpp"

namespace cvp {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Pinhole camera with world-to-camera pose: x_cam = R * X + t.
struct CameraView {
  Mat3 K = Mat3::Identity();
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  int width = 0;
  int height = 0;
  double d_min = 0.0;
  double d_max = 0.0;

  Vec3 center() const { return -R.transpose() * t; }
  /// Viewing direction (camera +z axis) in world coordinates.
  Vec3 principal_axis() const { return R.row(2).transpose(); }

  /// Camera with intrinsics and image size scaled to pyramid level l.
  CameraView at_level(int level) const;

  /// Throws if R is not a proper rotation, the depth range is empty, or K
  /// is not upper-triangular with positive focals.
  void validate(double tol = 1e-9) const;
};

/// Fronto-parallel sweep plane: normal is the reference principal axis.
struct SweepPlane {
  double depth = 0.0;
  Vec3 normal = Vec3::UnitZ();
};

struct Projection {
  Vec2 pixel = Vec2::Zero();
  double lambda = 0.0;
  bool valid = false;
};

struct DepthRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Scale focal lengths, skew and principal point by 1/2^level.
Mat3 scale_intrinsics(const Mat3& K, int level);

/// Plane-induced homography mapping reference pixels to source pixels at
/// the given pyramid level, defined up to scale.
Mat3 homography(const CameraView& ref, const CameraView& src,
                const SweepPlane& plane, int level);

/// World point on the visual ray of `pixel` at camera-frame depth `depth`.
Vec3 backproject(const CameraView& cam, const Vec2& pixel, double depth);

/// Projection of a world point; invalid when behind the camera or more
/// than `border` pixels outside the image.
Projection project(const CameraView& cam, const Vec3& point,
                   double border = 0.0, double eps_depth = 1e-12);

/// Mean depth increment at mid-range depth that moves the source-view
/// projection by offset_px along the epipolar line, averaged over a 5x5
/// reference-pixel grid and all source views.
double depth_interval_for_offset(const CameraView& ref,
                                 const std::vector<CameraView>& srcs,
                                 int level, double offset_px);

/// Per-pixel depth search range from the +-offset_px epipolar rule
/// (closest point between displaced source rays and the reference ray).
/// Empty on degenerate geometry; caller falls back to the mean interval.
std::optional<DepthRange> depth_search_range(const CameraView& ref,
                                             const CameraView& src,
                                             const Vec2& pixel,
                                             double d_current, int level,
                                             double offset_px = 2.0,
                                             double eps_epipole = 2.0);

Vec2 dehomogenize(const Vec3& h);

}  // namespace cvp
