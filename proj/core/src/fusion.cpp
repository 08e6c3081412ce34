#include "cvp/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cvp/parallel.hpp"

namespace cvp {

namespace {

// Round-trip check of (pixel, depth) in view v against view w's depth map.
// On success returns the depth of the matched point along v's visual ray.
std::optional<double> cross_check(const CameraView& cam_v, const Vec2& pixel,
                                  double d, const CameraView& cam_w,
                                  const DepthMap& depth_w,
                                  const FusionConfig& cfg) {
  const Vec3 X = backproject(cam_v, pixel, d);
  const Projection pr = project(cam_w, X);
  if (!pr.valid) return std::nullopt;
  const int qx = int(std::lround(pr.pixel.x()));
  const int qy = int(std::lround(pr.pixel.y()));
  if (qx < 0 || qx >= depth_w.width || qy < 0 || qy >= depth_w.height)
    return std::nullopt;
  if (!depth_w.ok(qx, qy)) return std::nullopt;
  const double dw = depth_w.d(qx, qy);
  if (!(dw > 0.0)) return std::nullopt;
  const Vec3 Y = backproject(cam_w, Vec2(qx, qy), dw);
  const Projection back = project(cam_v, Y, /*border=*/cfg.reproj_px_max + 1);
  if (!(back.lambda > 0.0)) return std::nullopt;
  if ((back.pixel - pixel).norm() >= cfg.reproj_px_max) return std::nullopt;
  if (std::abs(back.lambda - d) / d >= cfg.rel_depth_max) return std::nullopt;
  return back.lambda;
}

}  // namespace

std::vector<DepthMap> consistency_filter(const std::vector<DepthMap>& depths,
                                         const std::vector<CameraView>& cams,
                                         const FusionConfig& cfg) {
  if (depths.size() != cams.size()) throw Error("view count mismatch");
  const int n = int(depths.size());
  std::vector<DepthMap> out(depths.begin(), depths.end());

  parallel_for(0, n, cfg.threads, [&](int v) {
    const DepthMap& dm = depths[v];
    for (int y = 0; y < dm.height; ++y)
      for (int x = 0; x < dm.width; ++x) {
        const size_t i = dm.idx(x, y);
        bool keep = false;
        if (dm.valid[i] && dm.confidence[i] >= cfg.conf_min &&
            dm.depth[i] > 0.f) {
          int consistent = 0;
          for (int w = 0; w < n && consistent < cfg.min_consistent_views - 1;
               ++w) {
            if (w == v) continue;
            if (cross_check(cams[v], Vec2(x, y), dm.depth[i], cams[w],
                            depths[w], cfg))
              ++consistent;
          }
          keep = consistent >= cfg.min_consistent_views - 1;
        }
        out[v].valid[i] = keep ? 1 : 0;
      }
  });
  return out;
}

PointCloud fuse(const std::vector<DepthMap>& filtered,
                const std::vector<CameraView>& cams,
                const std::vector<ColorImage>* images,
                const FusionConfig& cfg) {
  const int n = int(filtered.size());
  PointCloud cloud;
  const bool with_colors = images && !images->empty();

  std::vector<std::vector<uint8_t>> consumed(n);
  for (int v = 0; v < n; ++v)
    consumed[v].assign(filtered[v].depth.size(), 0);

  for (int v = 0; v < n; ++v) {
    const DepthMap& dm = filtered[v];
    for (int y = 0; y < dm.height; ++y)
      for (int x = 0; x < dm.width; ++x) {
        const size_t i = dm.idx(x, y);
        if (!dm.valid[i] || consumed[v][i]) continue;
        consumed[v][i] = 1;
        const Vec2 pixel(x, y);
        const double d = dm.depth[i];

        // Average matched depths along this view's visual ray so the
        // fused point reprojects exactly onto its source pixel.
        double depth_sum = d;
        int depth_n = 1;
        for (int w = v + 1; w < n; ++w) {
          const Vec3 X = backproject(cams[v], pixel, d);
          const Projection pr = project(cams[w], X);
          if (!pr.valid) continue;
          const int qx = int(std::lround(pr.pixel.x()));
          const int qy = int(std::lround(pr.pixel.y()));
          if (qx < 0 || qx >= filtered[w].width || qy < 0 ||
              qy >= filtered[w].height)
            continue;
          const size_t j = filtered[w].idx(qx, qy);
          if (!filtered[w].valid[j] || consumed[w][j]) continue;
          const auto lam = cross_check(cams[v], pixel, d, cams[w], filtered[w],
                                       cfg);
          if (!lam) continue;
          depth_sum += *lam;
          ++depth_n;
          consumed[w][j] = 1;
        }
        cloud.points.push_back(
            backproject(cams[v], pixel, depth_sum / depth_n));
        if (with_colors) {
          const ColorImage& img = (*images)[v];
          std::array<uint8_t, 3> c{128, 128, 128};
          if (x < img.width() && y < img.height()) {
            const uint8_t* p = img.px(x, y);
            c = {p[0], p[1], p[2]};
          }
          cloud.colors.push_back(c);
        }
      }
  }
  return cloud;
}

namespace {

// Exact nearest neighbor via a median-split kd-tree.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts) {
    index_.resize(pts.size());
    std::iota(index_.begin(), index_.end(), 0u);
    if (!pts.empty()) root_ = build(0, index_.size(), 0);
  }

  double nearest_sq(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, 0, best);
    return best;
  }

 private:
  struct Node {
    uint32_t point = 0;
    int left = -1;
    int right = -1;
  };

  int build(size_t lo, size_t hi, int axis) {
    if (lo >= hi) return -1;
    const size_t mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid,
                     index_.begin() + hi, [&](uint32_t a, uint32_t b) {
                       return pts_[a][axis] < pts_[b][axis];
                     });
    Node node;
    node.point = index_[mid];
    const int id = int(nodes_.size());
    nodes_.push_back(node);
    const int next = (axis + 1) % 3;
    nodes_[id].left = build(lo, mid, next);
    nodes_[id].right = build(mid + 1, hi, next);
    return id;
  }

  void search(int id, const Vec3& q, int axis, double& best) const {
    if (id < 0) return;
    const Node& node = nodes_[id];
    const Vec3& p = pts_[node.point];
    best = std::min(best, (p - q).squaredNorm());
    const double diff = q[axis] - p[axis];
    const int next = (axis + 1) % 3;
    search(diff < 0 ? node.left : node.right, q, next, best);
    if (diff * diff < best)
      search(diff < 0 ? node.right : node.left, q, next, best);
  }

  const std::vector<Vec3>& pts_;
  std::vector<uint32_t> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace

std::vector<double> nn_distances(const std::vector<Vec3>& queries,
                                 const std::vector<Vec3>& targets,
                                 int threads) {
  const KdTree tree(targets);
  std::vector<double> out(queries.size());
  parallel_for(0, int(queries.size()), threads, [&](int i) {
    out[i] = std::sqrt(tree.nearest_sq(queries[i]));
  });
  return out;
}

namespace {

double capped_mean(const std::vector<double>& d, double cap) {
  double sum = 0.0;
  size_t n = 0;
  for (const double v : d)
    if (v <= cap) {
      sum += v;
      ++n;
    }
  return n ? sum / double(n) : cap;
}

}  // namespace

CloudMetrics cloud_metrics(const PointCloud& est, const PointCloud& gt,
                           double dist_cap, int threads) {
  if (est.points.empty() || gt.points.empty())
    throw EmptyCloud("cloud_metrics requires non-empty clouds");
  CloudMetrics m;
  m.accuracy = capped_mean(nn_distances(est.points, gt.points, threads),
                           dist_cap);
  m.completeness = capped_mean(nn_distances(gt.points, est.points, threads),
                               dist_cap);
  m.overall = 0.5 * (m.accuracy + m.completeness);
  return m;
}

}  // namespace cvp
