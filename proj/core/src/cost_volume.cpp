#include "cvp/cost_volume.hpp"

#include <algorithm>
#include <cmath>

#include "cvp/parallel.hpp"

namespace cvp {

HypothesisSet HypothesisSet::uniform(double d_min, double d_max, int M, int w,
                                     int h) {
  HypothesisSet hs;
  hs.kind = Kind::absolute;
  hs.count = M;
  hs.width = w;
  hs.height = h;
  hs.d_min = d_min;
  hs.d_max = d_max;
  return hs;
}

double variance_cost(const float* features, const uint8_t* valid, int n_views,
                     int channels, int* valid_count) {
  int n_valid = 0;
  for (int i = 0; i < n_views; ++i) n_valid += valid[i] ? 1 : 0;
  if (valid_count) *valid_count = n_valid;
  if (n_valid < 2) return kSentinelCost;

  double total = 0.0;
  for (int c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n_views; ++i)
      if (valid[i]) mean += features[size_t(i) * channels + c];
    mean /= n_valid;
    double dev = 0.0;
    for (int i = 0; i < n_views; ++i)
      if (valid[i]) {
        const double d = features[size_t(i) * channels + c] - mean;
        dev += d * d;
      }
    total += dev / n_valid;
  }
  return total / channels;
}

CostVolume build_coarse_volume(const FeatureMap& ref_feat,
                               const std::vector<FeatureMap>& src_feats,
                               const CameraView& ref,
                               const std::vector<CameraView>& srcs, int M,
                               int level, int threads) {
  const int w = ref_feat.width(), h = ref_feat.height();
  const int F = ref_feat.channels();
  const int n_views = 1 + int(src_feats.size());
  CostVolume cv(w, h, level,
                HypothesisSet::uniform(ref.d_min, ref.d_max, M, w, h));

  parallel_for(0, M, threads, [&](int m) {
    const double d = cv.hypotheses.absolute_depth(m);
    SweepPlane plane{d, ref.principal_axis()};
    std::vector<Mat3> H(srcs.size());
    for (size_t i = 0; i < srcs.size(); ++i)
      H[i] = homography(ref, srcs[i], plane, level);

    std::vector<float> feats(size_t(n_views) * F);
    std::vector<uint8_t> valid(n_views);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::copy_n(ref_feat.px(x, y), F, feats.data());
        valid[0] = 1;
        for (size_t i = 0; i < srcs.size(); ++i) {
          const Vec3 hp = H[i] * Vec3(x, y, 1.0);
          bool ok = hp.z() > 1e-12;
          if (ok)
            ok = sample_feature(src_feats[i], hp.x() / hp.z(), hp.y() / hp.z(),
                                feats.data() + size_t(i + 1) * F);
          else
            std::fill_n(feats.data() + size_t(i + 1) * F, F, 0.f);
          valid[i + 1] = ok ? 1 : 0;
        }
        int n_valid = 0;
        const double c = variance_cost(feats.data(), valid.data(), n_views, F,
                                       &n_valid);
        const size_t cell = cv.cell(x, y, m);
        cv.costs[cell] = float(c);
        cv.valid_views[cell] = uint8_t(n_valid);
      }
    }
  });
  return cv;
}

CostVolume build_partial_volume(const FeatureMap& ref_feat,
                                const std::vector<FeatureMap>& src_feats,
                                const CameraView& ref,
                                const std::vector<CameraView>& srcs,
                                const DepthMap& d_up, int M, int level,
                                double search_offset_px, int threads) {
  const int w = ref_feat.width(), h = ref_feat.height();
  const int F = ref_feat.channels();
  const int n_views = 1 + int(src_feats.size());

  HypothesisSet hs;
  hs.kind = HypothesisSet::Kind::residual;
  hs.count = M;
  hs.width = w;
  hs.height = h;
  hs.d_min = ref.d_min;
  hs.d_max = ref.d_max;
  hs.base.assign(size_t(w) * h, 0.f);
  hs.delta.assign(size_t(w) * h, 0.f);
  CostVolume cv(w, h, level, std::move(hs));

  // Global mean interval, used when the per-pixel epipolar range is
  // degenerate. The per-hypothesis offset is the full search span split
  // over M hypotheses.
  double fallback_delta;
  try {
    fallback_delta =
        depth_interval_for_offset(ref, srcs, level, 2.0 * search_offset_px / M);
  } catch (const DegenerateGeometry&) {
    fallback_delta = (ref.d_max - ref.d_min) / (8.0 * M);
  }

  const CameraView ref_l = ref.at_level(level);
  std::vector<CameraView> srcs_l;
  srcs_l.reserve(srcs.size());
  for (const auto& s : srcs) srcs_l.push_back(s.at_level(level));

  parallel_for(0, h, threads, [&](int y) {
    std::vector<float> feats(size_t(n_views) * F);
    std::vector<uint8_t> valid(n_views);
    for (int x = 0; x < w; ++x) {
      const size_t pi = size_t(y) * w + x;
      if (!d_up.valid[pi] || !(d_up.depth[pi] > 0.f)) continue;  // stays sentinel
      const double d_p = d_up.depth[pi];
      const Vec2 px(x, y);

      double delta = fallback_delta;
      if (const auto r =
              depth_search_range(ref, srcs[0], px, d_p, level, search_offset_px);
          r && r->hi - r->lo > 0.0)
        delta = (r->hi - r->lo) / M;
      cv.hypotheses.base[pi] = float(d_p);
      cv.hypotheses.delta[pi] = float(delta);

      for (int m = 0; m < M; ++m) {
        const double d = d_p + double(m - M / 2) * delta;
        const size_t cell = cv.cell(x, y, m);
        if (!(d > 0.0)) continue;  // stays sentinel
        const Vec3 X = backproject(ref_l, px, d);
        std::copy_n(ref_feat.px(x, y), F, feats.data());
        valid[0] = 1;
        for (size_t i = 0; i < srcs.size(); ++i) {
          const Projection pr = project(srcs_l[i], X);
          bool ok = pr.valid;
          if (ok)
            ok = sample_feature(src_feats[i], pr.pixel.x(), pr.pixel.y(),
                                feats.data() + size_t(i + 1) * F);
          else
            std::fill_n(feats.data() + size_t(i + 1) * F, F, 0.f);
          valid[i + 1] = ok ? 1 : 0;
        }
        int n_valid = 0;
        const double c = variance_cost(feats.data(), valid.data(), n_views, F,
                                       &n_valid);
        cv.costs[cell] = float(c);
        cv.valid_views[cell] = uint8_t(n_valid);
      }
    }
  });
  return cv;
}

namespace {

void box3_pass(const CostVolume& geom, const std::vector<float>& in,
               std::vector<float>& out, int m) {
  const int w = geom.width, h = geom.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t cell = geom.cell(x, y, m);
      if (in[cell] >= kSentinelCost) {
        out[cell] = in[cell];
        continue;
      }
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          const float v = in[geom.cell(xx, yy, m)];
          if (v >= kSentinelCost) continue;
          sum += v;
          ++n;
        }
      }
      out[cell] = float(sum / n);
    }
  }
}

}  // namespace

CostVolume aggregate(const CostVolume& cv, int threads) {
  CostVolume out = cv;
  const int M = cv.hypotheses.count;

  std::vector<float> tmp(cv.costs.size());
  parallel_for(0, M, threads, [&](int m) {
    box3_pass(cv, cv.costs, tmp, m);
    box3_pass(cv, tmp, out.costs, m);
  });

  // [.25 .5 .25] along the hypothesis axis, clamped indices, sentinel
  // taps skipped with weight renormalization.
  std::vector<float> spatial = out.costs;
  parallel_for(0, cv.height, threads, [&](int y) {
    for (int x = 0; x < cv.width; ++x) {
      for (int m = 0; m < M; ++m) {
        const size_t cell = cv.cell(x, y, m);
        if (spatial[cell] >= kSentinelCost) continue;
        static constexpr double kw[3] = {0.25, 0.5, 0.25};
        double sum = 0.0, wsum = 0.0;
        for (int i = -1; i <= 1; ++i) {
          const int mm = std::clamp(m + i, 0, M - 1);
          const float v = spatial[cv.cell(x, y, mm)];
          if (v >= kSentinelCost) continue;
          sum += kw[i + 1] * v;
          wsum += kw[i + 1];
        }
        out.costs[cell] = float(sum / wsum);
      }
    }
  });
  return out;
}

ProbabilityVolume to_probability(const CostVolume& cv, double tau,
                                 int threads) {
  if (!(tau > 0.0)) throw InvalidTemperature("temperature must be > 0");
  const int M = cv.hypotheses.count;
  ProbabilityVolume pv;
  pv.width = cv.width;
  pv.height = cv.height;
  pv.level = cv.level;
  pv.hypotheses = cv.hypotheses;
  pv.probs.assign(cv.costs.size(), 0.f);
  pv.low_conf.assign(size_t(cv.width) * cv.height, 0);

  parallel_for(0, cv.height, threads, [&](int y) {
    for (int x = 0; x < cv.width; ++x) {
      double c_min = kSentinelCost;
      for (int m = 0; m < M; ++m)
        c_min = std::min(c_min, double(cv.costs[cv.cell(x, y, m)]));
      if (c_min >= kSentinelCost) {
        for (int m = 0; m < M; ++m) pv.probs[pv.cell(x, y, m)] = 1.f / M;
        pv.low_conf[size_t(y) * cv.width + x] = 1;
        continue;
      }
      double z = 0.0;
      for (int m = 0; m < M; ++m) {
        const float c = cv.costs[cv.cell(x, y, m)];
        if (c >= kSentinelCost) continue;
        z += std::exp(-(double(c) - c_min) / tau);
      }
      for (int m = 0; m < M; ++m) {
        const float c = cv.costs[cv.cell(x, y, m)];
        pv.probs[pv.cell(x, y, m)] =
            c >= kSentinelCost ? 0.f
                               : float(std::exp(-(double(c) - c_min) / tau) / z);
      }
    }
  });
  return pv;
}

}  // namespace cvp
