#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvp/camera.hpp"
#include "cvp/cost_volume.hpp"
#include "cvp/depth_map.hpp"
#include "cvp/error.hpp"
#include "cvp/fusion.hpp"
#include "cvp/image.hpp"

namespace cvp {

// ---------------------------------------------------------------------------
// Camera text files (extrinsic 4x4, intrinsic 3x3, depth line).

/// Parses: "extrinsic", 4 rows of the world-to-camera [R|t; 0 0 0 1],
/// blank line, "intrinsic", 3 rows, blank line, then "d_min interval
/// [count [d_max]]". d_max defaults to d_min + interval*count with count
/// defaulting to 192.
CameraView load_camera(const std::filesystem::path& path);
void save_camera(const CameraView& cam, const std::filesystem::path& path,
                 double interval_count = 192);

// ---------------------------------------------------------------------------
// PFM depth maps ("Pf" grayscale, negative scale = little-endian,
// bottom-up rows). Invalid pixels are stored as NaN.

DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const DepthMap& map, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// PLY point clouds (binary little-endian, float32 x/y/z, optional uchar
// RGB).

PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// PNM rasters: binary PGM (8/16-bit grayscale) and PPM (8-bit RGB).

/// Loads a PGM/PPM file as grayscale floats in [0,1] (Rec. 601 for RGB).
Image load_image_gray(const std::filesystem::path& path);
std::optional<ColorImage> load_image_rgb(const std::filesystem::path& path);
void save_pgm16(const Image& img, const std::filesystem::path& path);
void save_ppm(const ColorImage& img, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset (MVSNet-style layout): images/ cams/ pair.txt, optional gt
// depths/.

struct Dataset {
  std::filesystem::path root;
  std::vector<std::filesystem::path> image_paths;
  std::vector<std::filesystem::path> camera_paths;
  std::vector<std::filesystem::path> depth_paths;  // empty if absent
  std::vector<std::vector<int>> pairs;             // ranked source ids per view

  int num_views() const { return int(image_paths.size()); }
  CameraView camera(int id) const { return load_camera(camera_paths[id]); }
  Image image_gray(int id) const { return load_image_gray(image_paths[id]); }

  /// Top-(n-1) ranked sources from the pair list; nearest optical
  /// centers when no pair list exists.
  std::vector<int> select_sources(int ref_id, int n_views) const;
};

Dataset open_dataset(const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Raw volume dump for offline inspection: magic "CVPV", int32 dims
// (W, H, M, level), then W*H*M little-endian float32 costs.

void dump_volume(const CostVolume& cv, const std::filesystem::path& path);

}  // namespace cvp
