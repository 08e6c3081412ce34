#include "cvp/camera.hpp"

#include <cmath>

namespace cvp {

Vec2 dehomogenize(const Vec3& h) { return h.head<2>() / h.z(); }

namespace {

int halved(int v, int level) {
  for (int l = 0; l < level; ++l) v = (v + 1) / 2;
  return v;
}

}  // namespace

CameraView CameraView::at_level(int level) const {
  CameraView out = *this;
  out.K = scale_intrinsics(K, level);
  out.width = halved(width, level);
  out.height = halved(height, level);
  return out;
}

void CameraView::validate(double tol) const {
  const Mat3 rtr = R.transpose() * R;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > tol ||
      std::abs(R.determinant() - 1.0) > tol)
    throw NonOrthonormalRotation("rotation is not orthonormal with det +1");
  if (!(d_min > 0.0 && d_min < d_max))
    throw Error("invalid depth range: require 0 < d_min < d_max");
  if (!(K(0, 0) > 0.0 && K(1, 1) > 0.0) || std::abs(K(1, 0)) > tol ||
      std::abs(K(2, 0)) > tol || std::abs(K(2, 1)) > tol ||
      std::abs(K(2, 2) - 1.0) > tol)
    throw Error("intrinsics must be upper-triangular with positive focals");
}

Mat3 scale_intrinsics(const Mat3& K, int level) {
  const double s = std::ldexp(1.0, -level);  // 1/2^level
  Mat3 out = K;
  out.row(0) *= s;
  out.row(1) *= s;
  return out;
}

Mat3 homography(const CameraView& ref, const CameraView& src,
                const SweepPlane& plane, int level) {
  if (!(plane.depth > 0.0)) throw DegenerateDepth("sweep plane depth <= 0");
  const Mat3 Kr = scale_intrinsics(ref.K, level);
  const Mat3 Ks = scale_intrinsics(src.K, level);
  const Mat3 R_rel = src.R * ref.R.transpose();
  const Vec3 t_rel = src.t - R_rel * ref.t;
  // Plane in the reference camera frame: n_c^T x = d.
  const Vec3 n_c = ref.R * plane.normal;
  return Ks * (R_rel + t_rel * n_c.transpose() / plane.depth) * Kr.inverse();
}

Vec3 backproject(const CameraView& cam, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) throw DegenerateDepth("backprojection depth <= 0");
  const Vec3 ray = cam.K.inverse() * pixel.homogeneous();
  return cam.R.transpose() * (ray * depth - cam.t);
}

Projection project(const CameraView& cam, const Vec3& point, double border,
                   double eps_depth) {
  Projection p;
  const Vec3 x_cam = cam.R * point + cam.t;
  p.lambda = x_cam.z();
  if (!(p.lambda > eps_depth)) return p;
  p.pixel = dehomogenize(cam.K * x_cam);
  p.valid = p.pixel.x() >= -border && p.pixel.x() <= cam.width - 1 + border &&
            p.pixel.y() >= -border && p.pixel.y() <= cam.height - 1 + border;
  return p;
}

namespace {

// Homogeneous source pixel along the reference ray of x is affine in depth:
// h(d) = a*d + b, with lambda_src = a.z*d + b.z.
struct EpipolarLine {
  Vec3 a;
  Vec3 b;
};

EpipolarLine epipolar_line(const CameraView& ref, const CameraView& src,
                           const Vec2& pixel) {
  EpipolarLine e;
  const Vec3 ray = ref.K.inverse() * pixel.homogeneous();
  e.a = src.K * (src.R * (ref.R.transpose() * ray));
  e.b = src.K * (src.t - src.R * (ref.R.transpose() * ref.t));
  return e;
}

}  // namespace

double depth_interval_for_offset(const CameraView& ref,
                                 const std::vector<CameraView>& srcs,
                                 int level, double offset_px) {
  const CameraView ref_l = ref.at_level(level);
  const double d_mid = 0.5 * (ref.d_min + ref.d_max);
  constexpr int kGrid = 5;
  constexpr double kMinSlope = 1e-12;  // px per unit depth

  double sum = 0.0;
  int count = 0;
  for (const CameraView& src : srcs) {
    const CameraView src_l = src.at_level(level);
    for (int gy = 0; gy < kGrid; ++gy) {
      for (int gx = 0; gx < kGrid; ++gx) {
        const Vec2 px((gx + 0.5) / kGrid * (ref_l.width - 1),
                      (gy + 0.5) / kGrid * (ref_l.height - 1));
        const auto e = epipolar_line(ref_l, src_l, px);
        const double lam = e.a.z() * d_mid + e.b.z();
        if (!(lam > 0.0)) continue;
        // Pixel displacement between d and d+dd is
        //   dd * kappa / (lambda(d) * lambda(d+dd)),
        // kappa = |a_xy*b_z - a_z*b_xy|; solving for dd at offset_px is
        // linear.
        const Vec2 cross = e.a.head<2>() * e.b.z() - e.b.head<2>() * e.a.z();
        const double kappa = cross.norm();
        if (kappa / (lam * lam) < kMinSlope) continue;
        const double denom = kappa - offset_px * e.a.z() * lam;
        if (!(denom > 0.0)) continue;
        sum += offset_px * lam * lam / denom;
        ++count;
      }
    }
  }
  if (count == 0)
    throw DegenerateGeometry(
        "no pixel/view pair has usable epipolar displacement");
  return sum / count;
}

std::optional<DepthRange> depth_search_range(const CameraView& ref,
                                             const CameraView& src,
                                             const Vec2& pixel,
                                             double d_current, int level,
                                             double offset_px,
                                             double eps_epipole) {
  if (!(d_current > 0.0)) return std::nullopt;
  const CameraView ref_l = ref.at_level(level);
  const CameraView src_l = src.at_level(level);

  const auto e = epipolar_line(ref_l, src_l, pixel);
  const double lam = e.a.z() * d_current + e.b.z();
  if (!(lam > 0.0)) return std::nullopt;
  const Vec2 p_src = (e.a.head<2>() * d_current + e.b.head<2>()) / lam;
  if (!(p_src.x() >= 0 && p_src.x() <= src_l.width - 1 && p_src.y() >= 0 &&
        p_src.y() <= src_l.height - 1))
    return std::nullopt;

  // Pure rotation: no baseline, depth is unobservable.
  if ((src.center() - ref.center()).norm() < 1e-12) return std::nullopt;

  // Epipole proximity check.
  const Projection epi = project(src_l, ref.center(), /*border=*/1e9);
  if (epi.lambda > 1e-12 && (p_src - epi.pixel).norm() < eps_epipole)
    return std::nullopt;

  // Local epipolar direction: d(projection)/d(depth) at d_current.
  const Vec2 deriv =
      (e.a.head<2>() * e.b.z() - e.b.head<2>() * e.a.z()) / (lam * lam);
  if (deriv.norm() < 1e-12) return std::nullopt;
  const Vec2 dir = deriv.normalized();

  // Reference ray X(s) = c_ref + s*u; the parameter s equals the
  // reference-frame depth because (K^-1 x~).z == 1.
  const Vec3 u = ref_l.R.transpose() * (ref_l.K.inverse() * pixel.homogeneous());
  const Vec3 c_ref = ref.center();
  const Vec3 c_src = src.center();

  double depths[2];
  for (int s = 0; s < 2; ++s) {
    const Vec2 q = p_src + (s == 0 ? -offset_px : offset_px) * dir;
    const Vec3 w = src_l.R.transpose() * (src_l.K.inverse() * q.homogeneous());
    // Closest point of skew lines, parameter on the reference ray.
    const Vec3 w0 = c_ref - c_src;
    const double aa = u.dot(u), bb = u.dot(w), cc = w.dot(w);
    const double dd = u.dot(w0), ee = w.dot(w0);
    const double denom = aa * cc - bb * bb;
    if (std::abs(denom) < 1e-18) return std::nullopt;
    depths[s] = (bb * ee - cc * dd) / denom;
  }
  DepthRange r{std::min(depths[0], depths[1]), std::max(depths[0], depths[1])};
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) return std::nullopt;
  r.lo = std::clamp(r.lo, ref.d_min, ref.d_max);
  r.hi = std::clamp(r.hi, ref.d_min, ref.d_max);
  return r;
}

}  // namespace cvp
