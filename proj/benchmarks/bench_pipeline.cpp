#include <benchmark/benchmark.h>

#include "cvp/cost_volume.hpp"
#include "cvp/depth_inference.hpp"
#include "cvp/synth.hpp"

using namespace cvp;

namespace {

struct Fixture {
  std::vector<CameraView> cams;
  std::vector<Image> images;
  std::vector<FeatureMap> feats;

  explicit Fixture(int width, int height) {
    cams = make_camera_ring(5, 2.0, Vec3::Zero(),
                            {.width = width, .height = height,
                             .focal = double(width)});
    const SceneSpec scene = SceneSpec::heightfield(9, 0.6);
    for (const auto& c : cams) {
      images.push_back(render(scene, c).first);
      feats.push_back(extract_features(images.back()));
    }
  }

  std::vector<CameraView> srcs() const {
    return {cams.begin() + 1, cams.end()};
  }
  std::vector<FeatureMap> src_feats() const {
    return {feats.begin() + 1, feats.end()};
  }
};

const Fixture& fixture() {
  static const Fixture f(160, 128);
  return f;
}

}  // namespace

static void BM_FeatureExtraction(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(extract_features(f.images[0]));
}
BENCHMARK(BM_FeatureExtraction)->Unit(benchmark::kMillisecond);

static void BM_CoarseVolume(benchmark::State& state) {
  const Fixture& f = fixture();
  const int M = int(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(build_coarse_volume(f.feats[0], f.src_feats(),
                                                 f.cams[0], f.srcs(), M, 0));
}
BENCHMARK(BM_CoarseVolume)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);

static void BM_PartialVolume(benchmark::State& state) {
  const Fixture& f = fixture();
  DepthMap d_up(160, 128, 0);
  for (size_t i = 0; i < d_up.depth.size(); ++i) {
    d_up.depth[i] = 10.f;
    d_up.valid[i] = 1;
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(build_partial_volume(
        f.feats[0], f.src_feats(), f.cams[0], f.srcs(), d_up, 8, 0));
}
BENCHMARK(BM_PartialVolume)->Unit(benchmark::kMillisecond);

static void BM_Aggregate(benchmark::State& state) {
  const Fixture& f = fixture();
  const CostVolume cv = build_coarse_volume(f.feats[0], f.src_feats(),
                                            f.cams[0], f.srcs(), 32, 0);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(cv));
}
BENCHMARK(BM_Aggregate)->Unit(benchmark::kMillisecond);

static void BM_FullPipeline(benchmark::State& state) {
  const Fixture& f = fixture();
  PipelineConfig cfg;
  cfg.levels = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(infer_depth(f.images, f.cams, cfg));
}
BENCHMARK(BM_FullPipeline)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
