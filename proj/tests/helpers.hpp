#pragma once

#include <random>

#include "cvp/camera.hpp"
#include "cvp/synth.hpp"

namespace cvp::test {

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Random plausible camera looking roughly at the origin area.
inline CameraView random_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CameraView cam;
  cam.width = 640;
  cam.height = 480;
  cam.K = Mat3::Identity();
  cam.K(0, 0) = 400.0 + 400.0 * u(rng);
  cam.K(1, 1) = cam.K(0, 0) * (0.95 + 0.1 * u(rng));
  cam.K(0, 2) = 300.0 + 40.0 * u(rng);
  cam.K(1, 2) = 220.0 + 40.0 * u(rng);
  cam.d_min = 2.0;
  cam.d_max = 50.0;

  const Vec3 c(4.0 * (u(rng) - 0.5), 4.0 * (u(rng) - 0.5),
               -8.0 - 4.0 * u(rng));
  // Look at a jittered point near the origin.
  const Vec3 target(u(rng) - 0.5, u(rng) - 0.5, 0.0);
  const Vec3 z = (target - c).normalized();
  Vec3 up(0.1 * (u(rng) - 0.5), 1.0, 0.1 * (u(rng) - 0.5));
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  cam.R.row(0) = x.transpose();
  cam.R.row(1) = y.transpose();
  cam.R.row(2) = z.transpose();
  cam.t = -cam.R * c;
  return cam;
}

/// Axis-aligned stereo pair: identity reference, source shifted by
/// `baseline` along +x, shared intrinsics. Disparity = f*b/d.
inline std::pair<CameraView, CameraView> rectified_pair(double focal,
                                                        double baseline,
                                                        double d_min = 1.0,
                                                        double d_max = 100.0) {
  CameraView ref;
  ref.K = Mat3::Identity();
  ref.K(0, 0) = ref.K(1, 1) = focal;
  ref.K(0, 2) = 320.0;
  ref.K(1, 2) = 240.0;
  ref.width = 640;
  ref.height = 480;
  ref.d_min = d_min;
  ref.d_max = d_max;
  CameraView src = ref;
  src.t = Vec3(-baseline, 0.0, 0.0);  // center at (baseline, 0, 0)
  return {ref, src};
}

}  // namespace cvp::test
