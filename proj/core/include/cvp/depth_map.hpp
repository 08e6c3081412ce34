#pragma once

#include <cstdint>
#include <vector>

namespace cvp {

/// Per-pixel depth with validity mask and confidence in [0,1].
struct DepthMap {
  int width = 0;
  int height = 0;
  int level = 0;
  std::vector<float> depth;       // scene units
  std::vector<uint8_t> valid;     // 0/1
  std::vector<float> confidence;  // [0,1]

  DepthMap() = default;
  DepthMap(int w, int h, int l = 0)
      : width(w),
        height(h),
        level(l),
        depth(size_t(w) * h, 0.f),
        valid(size_t(w) * h, 0),
        confidence(size_t(w) * h, 0.f) {}

  size_t idx(int x, int y) const { return size_t(y) * width + x; }
  float d(int x, int y) const { return depth[idx(x, y)]; }
  bool ok(int x, int y) const { return valid[idx(x, y)] != 0; }
};

}  // namespace cvp
