#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cvp/camera.hpp"
#include "cvp/depth_map.hpp"
#include "cvp/image.hpp"

namespace cvp {

/// Deterministic synthetic scene with analytically known depth, textured
/// by seeded 3-D value noise. Oracle source for rendered-scene tests.
struct SceneSpec {
  enum class Kind { plane, sphere, heightfield };
  Kind kind = Kind::plane;

  // plane: anchor point + unit normal (world frame)
  Vec3 plane_point = Vec3::Zero();
  Vec3 plane_normal = Vec3::UnitZ();

  // sphere
  Vec3 sphere_center = Vec3::Zero();
  double sphere_radius = 1.0;

  // heightfield: z = amplitude * noise2(x, y) around the z=0 plane
  double heightfield_amplitude = 0.5;

  uint64_t seed = 1;
  int texture_octaves = 4;
  double texture_frequency = 1.5;  // lattice cells per scene unit

  /// Fronto-parallel plane at camera-frame depth d of `ref`.
  static SceneSpec plane_for(const CameraView& ref, double depth,
                             uint64_t seed = 1);
  static SceneSpec sphere(const Vec3& center, double radius,
                          uint64_t seed = 1);
  static SceneSpec heightfield(uint64_t seed, double amplitude);
};

/// Seeded 3-D value noise in [0,1], bit-reproducible.
double scene_texture(const SceneSpec& spec, const Vec3& point);

/// Ray-cast the scene into the camera. Throws NoIntersection when no
/// pixel hits the surface.
std::pair<Image, DepthMap> render(const SceneSpec& spec, const CameraView& cam,
                                  int threads = 0);

struct RingOptions {
  double standoff = 10.0;  // distance from ring plane to target
  int width = 160;
  int height = 128;
  double focal = 160.0;
  double d_min_factor = 0.5;  // d_min = standoff * factor
  double d_max_factor = 1.8;
};

/// Cameras on a circle of the given radius, all looking at `target`.
std::vector<CameraView> make_camera_ring(int count, double radius,
                                         const Vec3& target,
                                         const RingOptions& opt = {});

}  // namespace cvp
