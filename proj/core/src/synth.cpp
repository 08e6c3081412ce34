#include "cvp/synth.hpp"

#include <atomic>
#include <cmath>

#include "cvp/error.hpp"
#include "cvp/parallel.hpp"

namespace cvp {

SceneSpec SceneSpec::plane_for(const CameraView& ref, double depth,
                               uint64_t seed) {
  SceneSpec s;
  s.kind = Kind::plane;
  s.plane_normal = ref.principal_axis();
  s.plane_point = ref.center() + depth * s.plane_normal;
  s.seed = seed;
  return s;
}

SceneSpec SceneSpec::sphere(const Vec3& center, double radius, uint64_t seed) {
  SceneSpec s;
  s.kind = Kind::sphere;
  s.sphere_center = center;
  s.sphere_radius = radius;
  s.seed = seed;
  return s;
}

SceneSpec SceneSpec::heightfield(uint64_t seed, double amplitude) {
  SceneSpec s;
  s.kind = Kind::heightfield;
  s.heightfield_amplitude = amplitude;
  s.seed = seed;
  return s;
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice_value(uint64_t seed, int64_t ix, int64_t iy, int64_t iz) {
  uint64_t h = seed;
  h = splitmix64(h ^ uint64_t(ix) * 0x8da6b343ULL);
  h = splitmix64(h ^ uint64_t(iy) * 0xd8163841ULL);
  h = splitmix64(h ^ uint64_t(iz) * 0xcb1ab31fULL);
  return double(h >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(uint64_t seed, const Vec3& p) {
  const int64_t ix = int64_t(std::floor(p.x()));
  const int64_t iy = int64_t(std::floor(p.y()));
  const int64_t iz = int64_t(std::floor(p.z()));
  const double tx = smoothstep(p.x() - double(ix));
  const double ty = smoothstep(p.y() - double(iy));
  const double tz = smoothstep(p.z() - double(iz));
  double c[2][2][2];
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx)
        c[dz][dy][dx] = lattice_value(seed, ix + dx, iy + dy, iz + dz);
  const auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
  double v = 0.0;
  {
    const double x00 = lerp(c[0][0][0], c[0][0][1], tx);
    const double x01 = lerp(c[0][1][0], c[0][1][1], tx);
    const double x10 = lerp(c[1][0][0], c[1][0][1], tx);
    const double x11 = lerp(c[1][1][0], c[1][1][1], tx);
    v = lerp(lerp(x00, x01, ty), lerp(x10, x11, ty), tz);
  }
  return v;
}

}  // namespace

double scene_texture(const SceneSpec& spec, const Vec3& point) {
  double sum = 0.0, amp = 1.0, norm = 0.0;
  double freq = spec.texture_frequency;
  for (int o = 0; o < spec.texture_octaves; ++o) {
    sum += amp * value_noise(spec.seed + uint64_t(o) * 0x9e37ULL, point * freq);
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

namespace {

double noise2(const SceneSpec& spec, double x, double y) {
  // 2-D slice of the lattice for the heightfield surface.
  return value_noise(spec.seed ^ 0xfeedULL,
                     Vec3(x * 0.35, y * 0.35, 0.25)) -
         0.5;
}

// Intersection depth s (reference z-depth parameter) along X(s) = c + s*u,
// where u is the unnormalized ray with unit camera-frame z component.
bool intersect(const SceneSpec& spec, const Vec3& c, const Vec3& u,
               double s_min, double s_max, double* s_out) {
  switch (spec.kind) {
    case SceneSpec::Kind::plane: {
      const double denom = spec.plane_normal.dot(u);
      if (std::abs(denom) < 1e-15) return false;
      const double s = spec.plane_normal.dot(spec.plane_point - c) / denom;
      if (s < s_min || s > s_max) return false;
      *s_out = s;
      return true;
    }
    case SceneSpec::Kind::sphere: {
      const Vec3 oc = c - spec.sphere_center;
      const double a = u.dot(u);
      const double b = 2.0 * oc.dot(u);
      const double cc = oc.dot(oc) - spec.sphere_radius * spec.sphere_radius;
      const double disc = b * b - 4.0 * a * cc;
      if (disc < 0.0) return false;
      const double sq = std::sqrt(disc);
      const double s1 = (-b - sq) / (2.0 * a);
      const double s2 = (-b + sq) / (2.0 * a);
      const double s = s1 >= s_min ? s1 : s2;
      if (s < s_min || s > s_max) return false;
      *s_out = s;
      return true;
    }
    case SceneSpec::Kind::heightfield: {
      const auto f = [&](double s) {
        const Vec3 p = c + s * u;
        return p.z() -
               spec.heightfield_amplitude * noise2(spec, p.x(), p.y());
      };
      const double step =
          std::max(spec.heightfield_amplitude * 0.25, (s_max - s_min) / 512.0);
      double s_prev = s_min;
      double f_prev = f(s_prev);
      for (double s = s_min + step; s <= s_max + step; s += step) {
        const double sc = std::min(s, s_max);
        const double fc = f(sc);
        if (f_prev * fc <= 0.0) {
          double lo = s_prev, hi = sc;
          double flo = f_prev;
          for (int i = 0; i < 48; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (flo * fm <= 0.0) {
              hi = mid;
            } else {
              lo = mid;
              flo = fm;
            }
          }
          *s_out = 0.5 * (lo + hi);
          return true;
        }
        s_prev = sc;
        f_prev = fc;
        if (sc >= s_max) break;
      }
      return false;
    }
  }
  return false;
}

}  // namespace

std::pair<Image, DepthMap> render(const SceneSpec& spec, const CameraView& cam,
                                  int threads) {
  Image img(cam.width, cam.height);
  DepthMap depth(cam.width, cam.height, 0);
  const Vec3 c = cam.center();
  const Mat3 Kinv = cam.K.inverse();
  const Mat3 Rt = cam.R.transpose();
  std::atomic<long> hits{0};

  parallel_for(0, cam.height, threads, [&](int y) {
    long row_hits = 0;
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 u = Rt * (Kinv * Vec3(x, y, 1.0));
      double s = 0.0;
      if (intersect(spec, c, u, cam.d_min, cam.d_max, &s)) {
        const Vec3 X = c + s * u;
        img.at(x, y) = float(scene_texture(spec, X));
        const size_t i = depth.idx(x, y);
        depth.depth[i] = float(s);
        depth.valid[i] = 1;
        depth.confidence[i] = 1.f;
        ++row_hits;
      }
    }
    hits += row_hits;
  });
  if (hits.load() == 0)
    throw NoIntersection("camera frustum does not intersect the scene");
  return {std::move(img), std::move(depth)};
}

std::vector<CameraView> make_camera_ring(int count, double radius,
                                         const Vec3& target,
                                         const RingOptions& opt) {
  std::vector<CameraView> cams;
  cams.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double theta = 2.0 * M_PI * i / count;
    const Vec3 c = target + Vec3(radius * std::cos(theta),
                                 radius * std::sin(theta), -opt.standoff);
    const Vec3 z = (target - c).normalized();
    Vec3 up(0.0, 1.0, 0.0);
    const Vec3 x = up.cross(z).normalized();
    const Vec3 y = z.cross(x);

    CameraView cam;
    cam.R.row(0) = x.transpose();
    cam.R.row(1) = y.transpose();
    cam.R.row(2) = z.transpose();
    cam.t = -cam.R * c;
    cam.width = opt.width;
    cam.height = opt.height;
    cam.K = Mat3::Identity();
    cam.K(0, 0) = opt.focal;
    cam.K(1, 1) = opt.focal;
    cam.K(0, 2) = (opt.width - 1) / 2.0;
    cam.K(1, 2) = (opt.height - 1) / 2.0;
    cam.d_min = opt.standoff * opt.d_min_factor;
    cam.d_max = opt.standoff * opt.d_max_factor;
    cams.push_back(cam);
  }
  return cams;
}

}  // namespace cvp
