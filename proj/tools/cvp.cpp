#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "cvp/depth_inference.hpp"
#include "cvp/fusion.hpp"
#include "cvp/io.hpp"
#include "cvp/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cvp;

namespace {

std::string view_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08d", id);
  return buf;
}

struct LoadedViews {
  std::vector<cvp::Image> images;
  std::vector<cvp::CameraView> cams;
  std::vector<int> ids;  // ids[0] == ref
};

LoadedViews load_views(const cvp::Dataset& ds, int ref, int n_views) {
  LoadedViews v;
  v.ids.push_back(ref);
  for (const int s : ds.select_sources(ref, n_views)) v.ids.push_back(s);
  for (const int id : v.ids) {
    cvp::Image img = ds.image_gray(id);
    cvp::CameraView cam = ds.camera(id);
    cam.width = img.width();
    cam.height = img.height();
    cam.validate(1e-6);
    v.images.push_back(std::move(img));
    v.cams.push_back(cam);
  }
  return v;
}

cvp::DepthMap confidence_as_map(const cvp::DepthMap& d) {
  cvp::DepthMap c = d;
  c.depth = d.confidence;
  for (auto& v : c.valid) v = 1;  // confidence is defined everywhere
  return c;
}

int cmd_depth(const std::string& dataset_dir, int ref,
              const cvp::PipelineConfig& cfg, const std::string& out_dir,
              bool as_json) {
  const cvp::Dataset ds = open_dataset(dataset_dir);
  const LoadedViews v = load_views(ds, ref, cfg.n_views);
  const cvp::InferenceResult res = infer_depth(v.images, v.cams, cfg);

  fs::create_directories(out_dir);
  const std::string stem = view_name(ref);
  write_pfm(res.levels[0], fs::path(out_dir) / (stem + ".pfm"));
  write_pfm(confidence_as_map(res.levels[0]),
            fs::path(out_dir) / (stem + "_conf.pfm"));
  for (size_t l = 1; l < res.levels.size(); ++l)
    write_pfm(res.levels[l], fs::path(out_dir) /
                                 (stem + "_level" + std::to_string(l) + ".pfm"));

  json meta;
  meta["ref"] = ref;
  meta["views"] = v.ids;
  meta["descriptor"] = cfg.descriptor;
  meta["tau"] = cfg.tau;
  meta["sample_offset_px"] = cfg.sample_offset_px;
  meta["range_offset_px"] = cfg.range_offset_px;
  for (const auto& st : res.stats)
    meta["levels"].push_back({{"level", st.level},
                              {"hypotheses_per_pixel", st.hypotheses_per_pixel},
                              {"allocated_cells", st.allocated_cells},
                              {"mean_delta", st.mean_delta}});
  std::ofstream(fs::path(out_dir) / (stem + "_meta.json")) << meta.dump(2)
                                                           << "\n";
  if (as_json)
    std::cout << meta.dump() << "\n";
  else
    std::cout << "wrote depth map for view " << ref << " ("
              << res.levels.size() << " levels) to " << out_dir << "\n";
  return 0;
}

int cmd_fuse(const std::string& dataset_dir, const std::string& depth_dir,
             const cvp::FusionConfig& fcfg, const std::string& out_path,
             bool as_json) {
  const cvp::Dataset ds = open_dataset(dataset_dir);
  std::vector<cvp::DepthMap> depths;
  std::vector<cvp::CameraView> cams;
  std::vector<cvp::ColorImage> colors;
  for (int id = 0; id < ds.num_views(); ++id) {
    const fs::path dp = fs::path(depth_dir) / (view_name(id) + ".pfm");
    if (!fs::exists(dp)) continue;
    cvp::DepthMap d = read_pfm(dp);
    const fs::path cp = fs::path(depth_dir) / (view_name(id) + "_conf.pfm");
    if (fs::exists(cp)) {
      const cvp::DepthMap c = read_pfm(cp);
      if (c.width == d.width && c.height == d.height) d.confidence = c.depth;
    }
    cvp::CameraView cam = ds.camera(id);
    cam.width = d.width;
    cam.height = d.height;
    depths.push_back(std::move(d));
    cams.push_back(cam);
    auto rgb = load_image_rgb(ds.image_paths[id]);
    if (rgb) {
      colors.push_back(std::move(*rgb));
    } else {
      const cvp::Image g = ds.image_gray(id);
      cvp::ColorImage ci(g.width(), g.height());
      for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
          const auto v = uint8_t(std::clamp(int(g.at(x, y) * 255.f), 0, 255));
          ci.px(x, y)[0] = ci.px(x, y)[1] = ci.px(x, y)[2] = v;
        }
      colors.push_back(std::move(ci));
    }
  }
  if (depths.empty()) throw cvp::Error("no depth maps found in " + depth_dir);

  const auto filtered = consistency_filter(depths, cams, fcfg);
  const cvp::PointCloud cloud = fuse(filtered, cams, &colors, fcfg);
  write_ply(cloud, out_path);
  if (as_json) {
    const json j = {{"points", cloud.size()}, {"output", out_path}};
    std::cout << j.dump() << "\n";
  } else
    std::cout << "fused " << cloud.size() << " points to " << out_path << "\n";
  return 0;
}

int cmd_eval_cloud(const std::string& est, const std::string& gt, double cap,
                   bool as_json) {
  const auto m = cloud_metrics(read_ply(est), read_ply(gt), cap);
  if (as_json) {
    const json j = {{"accuracy", m.accuracy},
                    {"completeness", m.completeness},
                    {"overall", m.overall}};
    std::cout << j.dump() << "\n";
  } else
    std::printf("accuracy %.6f completeness %.6f overall %.6f\n", m.accuracy,
                m.completeness, m.overall);
  return 0;
}

int cmd_eval_depth(const std::string& est_dir, const std::string& gt_dir,
                   bool as_json) {
  std::vector<fs::path> est_files;
  for (const auto& e : fs::directory_iterator(est_dir))
    if (e.path().extension() == ".pfm" &&
        e.path().stem().string().find("_conf") == std::string::npos)
      est_files.push_back(e.path());
  std::sort(est_files.begin(), est_files.end());
  if (est_files.empty()) throw cvp::Error("no PFM maps in " + est_dir);

  std::vector<cvp::DepthMap> est, gt;
  std::vector<fs::path> used;
  for (const auto& p : est_files) {
    const fs::path g = fs::path(gt_dir) / p.filename();
    if (!fs::exists(g)) continue;  // e.g. coarse levels without stored GT
    est.push_back(read_pfm(p));
    gt.push_back(read_pfm(g));
    used.push_back(p);
  }
  est_files = used;
  if (est_files.empty())
    throw cvp::Error("no matching PFM maps between " + est_dir + " and " +
                     gt_dir);
  const cvp::L1Report rep = l1_error(est, gt);
  if (as_json) {
    json j = {{"total", rep.total}};
    for (size_t i = 0; i < rep.per_level.size(); ++i)
      j["maps"].push_back(
          {{"file", est_files[i].filename()}, {"l1", rep.per_level[i]}});
    std::cout << j.dump() << "\n";
  } else {
    for (size_t i = 0; i < rep.per_level.size(); ++i)
      std::printf("%s  L1 %.9g\n", est_files[i].filename().c_str(),
                  rep.per_level[i]);
    std::printf("total %.9g\n", rep.total);
  }
  return 0;
}

int cmd_synth(const std::string& scene, uint64_t seed, int n_cams,
              const std::string& out_dir, int width, int height, double radius,
              double standoff, bool as_json) {
  cvp::RingOptions opt;
  opt.width = width;
  opt.height = height;
  opt.focal = double(width);
  opt.standoff = standoff;
  const auto cams = make_camera_ring(n_cams, radius, cvp::Vec3::Zero(), opt);

  cvp::SceneSpec spec;
  if (scene == "plane") {
    spec = cvp::SceneSpec::plane_for(cams[0], standoff, seed);
  } else if (scene == "sphere") {
    spec = cvp::SceneSpec::sphere(cvp::Vec3::Zero(), 0.25 * standoff, seed);
  } else if (scene == "heightfield") {
    spec = cvp::SceneSpec::heightfield(seed, 0.05 * standoff);
  } else {
    throw cvp::Error("unknown scene kind: " + scene);
  }

  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "cams");
  fs::create_directories(fs::path(out_dir) / "depths");
  for (int i = 0; i < n_cams; ++i) {
    const auto [img, depth] = render(spec, cams[i]);
    save_pgm16(img, fs::path(out_dir) / "images" / (view_name(i) + ".pgm"));
    save_camera(cams[i], fs::path(out_dir) / "cams" / (view_name(i) + "_cam.txt"));
    write_pfm(depth, fs::path(out_dir) / "depths" / (view_name(i) + ".pfm"));
  }
  // Pair list ranked by camera-center distance.
  std::ofstream pair(fs::path(out_dir) / "pair.txt");
  pair << n_cams << "\n";
  for (int i = 0; i < n_cams; ++i) {
    std::vector<std::pair<double, int>> by_dist;
    for (int j = 0; j < n_cams; ++j)
      if (j != i)
        by_dist.emplace_back((cams[j].center() - cams[i].center()).norm(), j);
    std::sort(by_dist.begin(), by_dist.end());
    pair << i << "\n" << by_dist.size();
    for (const auto& [d, j] : by_dist) pair << " " << j << " " << 1.0 / (1 + d);
    pair << "\n";
  }
  const json j = {{"scene", scene}, {"seed", seed}, {"cameras", n_cams},
                  {"out", out_dir}};
  if (as_json)
    std::cout << j.dump() << "\n";
  else
    std::cout << "wrote " << n_cams << " " << scene << " views to " << out_dir
              << "\n";
  return 0;
}

int cmd_sweep_info(const std::string& dataset_dir, int ref, int n_views,
                   double sample_offset, double range_offset, bool as_json) {
  const cvp::Dataset ds = open_dataset(dataset_dir);
  const LoadedViews v = load_views(ds, ref, n_views);
  const cvp::CameraView& cam = v.cams[0];
  const std::vector<cvp::CameraView> srcs(v.cams.begin() + 1, v.cams.end());
  const int L = cvp::auto_levels(cam.width, cam.height);

  const double dd = depth_interval_for_offset(cam, srcs, L, sample_offset);
  const int M = int(std::ceil((cam.d_max - cam.d_min) / dd));

  // Search-range statistics over a pixel grid at level 0, mid depth.
  const double d_mid = 0.5 * (cam.d_min + cam.d_max);
  double s_min = 1e300, s_max = 0.0, s_sum = 0.0;
  int n = 0;
  for (int gy = 0; gy < 9; ++gy)
    for (int gx = 0; gx < 9; ++gx) {
      const cvp::Vec2 px((gx + 0.5) / 9.0 * (cam.width - 1),
                         (gy + 0.5) / 9.0 * (cam.height - 1));
      const auto r =
          depth_search_range(cam, srcs[0], px, d_mid, 0, range_offset);
      if (!r) continue;
      const double s = r->hi - r->lo;
      s_min = std::min(s_min, s);
      s_max = std::max(s_max, s);
      s_sum += s;
      ++n;
    }
  const json j = {{"ref", ref},
                  {"level", L},
                  {"mean_interval", dd},
                  {"derived_coarse_planes", M},
                  {"search_range",
                   {{"sampled", n},
                    {"mean", n ? s_sum / n : 0.0},
                    {"min", n ? s_min : 0.0},
                    {"max", s_max}}}};
  if (as_json) {
    std::cout << j.dump() << "\n";
  } else {
    std::printf("level %d mean-interval %.9g derived-M %d\n", L, dd, M);
    if (n)
      std::printf("s_p over %d pixels: mean %.9g min %.9g max %.9g\n", n,
                  s_sum / n, s_min, s_max);
    else
      std::printf("s_p: no non-degenerate samples\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-to-fine plane-sweep multi-view stereo"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable JSON output");

  // depth
  auto* depth = app.add_subcommand("depth", "infer a depth map pyramid");
  std::string dataset_dir, out_dir;
  int ref = 0;
  cvp::PipelineConfig cfg;
  depth->add_option("--dataset", dataset_dir)->required();
  depth->add_option("--ref", ref)->required();
  depth->add_option("--views", cfg.n_views);
  depth->add_option("--levels", cfg.levels);
  depth->add_option("--coarse-planes", cfg.coarse_planes);
  depth->add_option("--refine-planes", cfg.refine_planes);
  depth->add_option("--sample-offset", cfg.sample_offset_px);
  depth->add_option("--range-offset", cfg.range_offset_px);
  depth->add_option("--tau", cfg.tau);
  depth->add_option("--threads", cfg.threads);
  depth->add_option("--out", out_dir)->required();

  // fuse
  auto* fuse = app.add_subcommand("fuse", "fuse depth maps to a point cloud");
  std::string depth_dir, ply_out;
  cvp::FusionConfig fcfg;
  fuse->add_option("--dataset", dataset_dir)->required();
  fuse->add_option("--depths", depth_dir)->required();
  fuse->add_option("--conf", fcfg.conf_min);
  fuse->add_option("--reproj-px", fcfg.reproj_px_max);
  fuse->add_option("--rel-depth", fcfg.rel_depth_max);
  fuse->add_option("--min-views", fcfg.min_consistent_views);
  fuse->add_option("--threads", fcfg.threads);
  fuse->add_option("--out", ply_out)->required();

  // eval-cloud
  auto* evalc = app.add_subcommand("eval-cloud", "compare two point clouds");
  std::string est_path, gt_path;
  double cap = 20.0;
  evalc->add_option("--est", est_path)->required();
  evalc->add_option("--gt", gt_path)->required();
  evalc->add_option("--cap", cap);

  // eval-depth
  auto* evald = app.add_subcommand("eval-depth", "mean L1 depth error");
  std::string est_dir, gt_dir;
  evald->add_option("--est", est_dir)->required();
  evald->add_option("--gt", gt_dir)->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string scene = "plane";
  uint64_t seed = 1;
  int n_cams = 5, width = 160, height = 128;
  double radius = 0.6, standoff = 10.0;
  synth->add_option("--scene", scene)
      ->check(CLI::IsMember({"plane", "sphere", "heightfield"}));
  synth->add_option("--seed", seed);
  synth->add_option("--cameras", n_cams);
  synth->add_option("--width", width);
  synth->add_option("--height", height);
  synth->add_option("--radius", radius);
  synth->add_option("--standoff", standoff);
  synth->add_option("--out", out_dir)->required();

  // sweep-info
  auto* sweep = app.add_subcommand("sweep-info", "depth sampling diagnostics");
  sweep->add_option("--dataset", dataset_dir)->required();
  sweep->add_option("--ref", ref)->required();
  sweep->add_option("--views", cfg.n_views);
  sweep->add_option("--sample-offset", cfg.sample_offset_px);
  sweep->add_option("--range-offset", cfg.range_offset_px);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (*depth) return cmd_depth(dataset_dir, ref, cfg, out_dir, as_json);
    if (*fuse) return cmd_fuse(dataset_dir, depth_dir, fcfg, ply_out, as_json);
    if (*evalc) return cmd_eval_cloud(est_path, gt_path, cap, as_json);
    if (*evald) return cmd_eval_depth(est_dir, gt_dir, as_json);
    if (*synth)
      return cmd_synth(scene, seed, n_cams, out_dir, width, height, radius,
                       standoff, as_json);
    if (*sweep)
      return cmd_sweep_info(dataset_dir, ref, cfg.n_views, cfg.sample_offset_px,
                            cfg.range_offset_px, as_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
