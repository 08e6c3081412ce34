#include "cvp/depth_inference.hpp"

#include <algorithm>
#include <cmath>

#include "cvp/parallel.hpp"
#include "cvp/pyramid.hpp"

namespace cvp {

int auto_levels(int width, int height) {
  const int m = std::min(width, height);
  int l = 0;
  while ((m >> (l + 1)) >= 64) ++l;
  return std::max(1, l);
}

namespace {

// Sum of 4 consecutive probabilities around the argmax.
float window_confidence(const ProbabilityVolume& p, int x, int y) {
  const int M = p.hypotheses.count;
  int best = 0;
  float pb = -1.f;
  for (int m = 0; m < M; ++m) {
    const float v = p.probs[p.cell(x, y, m)];
    if (v > pb) {
      pb = v;
      best = m;
    }
  }
  const int win = std::min(4, M);
  const int start = std::clamp(best - 1, 0, M - win);
  float s = 0.f;
  for (int m = start; m < start + win; ++m) s += p.probs[p.cell(x, y, m)];
  return std::min(s, 1.f);
}

}  // namespace

DepthMap soft_argmax_coarse(const ProbabilityVolume& p) {
  DepthMap d(p.width, p.height, p.level);
  const int M = p.hypotheses.count;
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      double e = 0.0;
      for (int m = 0; m < M; ++m)
        e += p.hypotheses.absolute_depth(m) * double(p.probs[p.cell(x, y, m)]);
      const size_t i = d.idx(x, y);
      d.depth[i] = float(e);
      d.confidence[i] = window_confidence(p, x, y);
      d.valid[i] = p.low_conf[i] ? 0 : 1;
    }
  return d;
}

DepthMap soft_argmax_residual(const ProbabilityVolume& p,
                              const DepthMap& d_up) {
  DepthMap d(p.width, p.height, p.level);
  const int M = p.hypotheses.count;
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      const size_t i = d.idx(x, y);
      if (!d_up.valid[i] || p.low_conf[i]) {
        d.depth[i] = d_up.depth[i];
        d.confidence[i] = 0.f;
        d.valid[i] = 0;
        continue;
      }
      const double delta = p.hypotheses.delta[i];
      double r = 0.0;
      for (int m = 0; m < M; ++m)
        r += double(m - M / 2) * delta * double(p.probs[p.cell(x, y, m)]);
      const double v = std::clamp(double(d_up.depth[i]) + r,
                                  p.hypotheses.d_min, p.hypotheses.d_max);
      d.depth[i] = float(v);
      d.confidence[i] = window_confidence(p, x, y);
      d.valid[i] = 1;
    }
  return d;
}

namespace {

// Catmull-Rom in difference form: exact for constant inputs.
double catmull_rom(double v0, double v1, double v2, double v3, double t) {
  const double a = 0.5 * (v2 - v0);
  const double b = v0 - 2.5 * v1 + 2.0 * v2 - 0.5 * v3;
  const double c = -0.5 * v0 + 1.5 * v1 - 1.5 * v2 + 0.5 * v3;
  return v1 + t * (a + t * (b + t * c));
}

}  // namespace

DepthMap upsample_depth(const DepthMap& d, int out_width, int out_height) {
  DepthMap out(out_width, out_height, std::max(0, d.level - 1));
  const double sx = double(d.width) / out_width;
  const double sy = double(d.height) / out_height;
  const auto clampi = [](int v, int lo, int hi) {
    return std::min(std::max(v, lo), hi);
  };
  for (int y = 0; y < out_height; ++y) {
    const double ys = (y + 0.5) * sy - 0.5;
    const int y1 = clampi(int(std::floor(ys)), 0, d.height - 1);
    const double ty = std::clamp(ys - y1, 0.0, 1.0);
    for (int x = 0; x < out_width; ++x) {
      const double xs = (x + 0.5) * sx - 0.5;
      const int x1 = clampi(int(std::floor(xs)), 0, d.width - 1);
      const double tx = std::clamp(xs - x1, 0.0, 1.0);

      double rows[4];
      bool all_valid = true;
      for (int j = 0; j < 4; ++j) {
        const int yy = clampi(y1 + j - 1, 0, d.height - 1);
        double v[4];
        for (int i = 0; i < 4; ++i) {
          const int xx = clampi(x1 + i - 1, 0, d.width - 1);
          v[i] = d.depth[d.idx(xx, yy)];
          all_valid = all_valid && d.valid[d.idx(xx, yy)];
        }
        rows[j] = catmull_rom(v[0], v[1], v[2], v[3], tx);
      }
      const double val = catmull_rom(rows[0], rows[1], rows[2], rows[3], ty);
      const size_t i = out.idx(x, y);
      out.depth[i] = float(val);
      out.valid[i] = all_valid && val > 0.0 ? 1 : 0;

      // Bilinear confidence.
      const int xc0 = clampi(x1, 0, d.width - 1);
      const int xc1 = clampi(x1 + 1, 0, d.width - 1);
      const int yc0 = clampi(y1, 0, d.height - 1);
      const int yc1 = clampi(y1 + 1, 0, d.height - 1);
      out.confidence[i] = float(
          (1 - tx) * (1 - ty) * d.confidence[d.idx(xc0, yc0)] +
          tx * (1 - ty) * d.confidence[d.idx(xc1, yc0)] +
          (1 - tx) * ty * d.confidence[d.idx(xc0, yc1)] +
          tx * ty * d.confidence[d.idx(xc1, yc1)]);
    }
  }
  return out;
}

InferenceResult infer_depth(const std::vector<Image>& images,
                            const std::vector<CameraView>& cams,
                            const PipelineConfig& config) {
  if (images.size() < 2 || images.size() != cams.size())
    throw Error("infer_depth requires >= 2 views with matching cameras");
  const CameraView& ref = cams[0];
  const int L = config.levels >= 0
                    ? config.levels
                    : auto_levels(images[0].width(), images[0].height());

  const int n = int(images.size());
  std::vector<ImagePyramid> pyrs(n);
  parallel_for(0, n, config.threads,
               [&](int i) { pyrs[i] = build_pyramid(images[i], L); });

  // features[view][level]
  std::vector<std::vector<FeatureMap>> features(n);
  for (int i = 0; i < n; ++i) features[i].resize(L + 1);
  parallel_for(0, n * (L + 1), config.threads, [&](int k) {
    const int i = k / (L + 1), l = k % (L + 1);
    features[i][l] = extract_features(pyrs[i].levels[l]);
  });

  std::vector<CameraView> src_cams(cams.begin() + 1, cams.end());
  const auto src_feats_at = [&](int l) {
    std::vector<FeatureMap> out;
    out.reserve(n - 1);
    for (int i = 1; i < n; ++i) out.push_back(features[i][l]);
    return out;
  };

  InferenceResult res;
  res.levels.resize(L + 1);
  res.stats.resize(L + 1);

  const auto record = [&](const CostVolume& cv) {
    VolumeStats st;
    st.level = cv.level;
    st.hypotheses_per_pixel = cv.hypotheses_per_pixel();
    st.allocated_cells = cv.allocated_cells();
    if (cv.hypotheses.kind == HypothesisSet::Kind::absolute) {
      st.mean_delta =
          (cv.hypotheses.d_max - cv.hypotheses.d_min) / cv.hypotheses.count;
    } else {
      double s = 0.0;
      size_t c = 0;
      for (const float v : cv.hypotheses.delta)
        if (v > 0.f) {
          s += v;
          ++c;
        }
      st.mean_delta = c ? s / c : 0.0;
    }
    res.stats[cv.level] = st;
  };

  {
    CostVolume cv = build_coarse_volume(features[0][L], src_feats_at(L), ref,
                                        src_cams, config.coarse_planes, L,
                                        config.threads);
    record(cv);
    cv = aggregate(cv, config.threads);
    res.levels[L] =
        soft_argmax_coarse(to_probability(cv, config.tau, config.threads));
  }

  for (int l = L - 1; l >= 0; --l) {
    const FeatureMap& rf = features[0][l];
    DepthMap d_up = upsample_depth(res.levels[l + 1], rf.width(), rf.height());
    d_up.level = l;
    CostVolume cv = build_partial_volume(
        rf, src_feats_at(l), ref, src_cams, d_up, config.refine_planes, l,
        config.effective_search_offset(), config.threads);
    record(cv);
    cv = aggregate(cv, config.threads);
    res.levels[l] = soft_argmax_residual(
        to_probability(cv, config.tau, config.threads), d_up);
  }
  return res;
}

L1Report l1_error(const std::vector<DepthMap>& est,
                  const std::vector<DepthMap>& gt) {
  if (est.size() != gt.size()) throw Error("level count mismatch");
  L1Report rep;
  for (size_t l = 0; l < est.size(); ++l) {
    const DepthMap& e = est[l];
    const DepthMap& g = gt[l];
    if (e.width != g.width || e.height != g.height)
      throw Error("resolution mismatch at level " + std::to_string(l));
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < g.depth.size(); ++i)
      if (g.valid[i]) {
        sum += std::abs(double(g.depth[i]) - double(e.depth[i]));
        ++n;
      }
    if (n == 0)
      throw EmptyMask("no valid ground-truth pixels at level " +
                      std::to_string(l));
    rep.per_level.push_back(sum / double(n));
    rep.total += rep.per_level.back();
  }
  return rep;
}

}  // namespace cvp
