#include "cvp/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "file readers/writers assume a little-endian host");

namespace cvp {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const fs::path& path, int line,
                             const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  std::istringstream iss(s);
  double v;
  while (iss >> v) out.push_back(v);
  return out;
}

}  // namespace

CameraView load_camera(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open camera file " + path.string());

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);

  size_t i = 0;
  const auto skip_blank = [&] {
    while (i < lines.size() && parse_reals(lines[i]).empty() &&
           lines[i].find_first_not_of(" \t\r") == std::string::npos)
      ++i;
  };
  const auto expect_keyword = [&](const std::string& kw) {
    skip_blank();
    if (i >= lines.size())
      parse_fail(path, int(lines.size()), "missing \"" + kw + "\" section");
    std::string token;
    std::istringstream(lines[i]) >> token;
    if (token != kw)
      parse_fail(path, int(i + 1), "expected \"" + kw + "\", got \"" + token + "\"");
    ++i;
  };
  const auto read_row = [&](int n) {
    skip_blank();
    if (i >= lines.size())
      parse_fail(path, int(lines.size()), "unexpected end of file in matrix");
    const auto vals = parse_reals(lines[i]);
    if (int(vals.size()) != n)
      parse_fail(path, int(i + 1),
                 "expected " + std::to_string(n) + " reals, got " +
                     std::to_string(vals.size()));
    for (const double v : vals)
      if (!std::isfinite(v))
        throw NonFiniteValue(path.string() + ":" + std::to_string(i + 1) +
                             ": non-finite value");
    ++i;
    return vals;
  };

  CameraView cam;
  expect_keyword("extrinsic");
  Eigen::Matrix4d E;
  for (int r = 0; r < 4; ++r) {
    const auto row = read_row(4);
    for (int c = 0; c < 4; ++c) E(r, c) = row[c];
  }
  cam.R = E.topLeftCorner<3, 3>();
  cam.t = E.topRightCorner<3, 1>();

  expect_keyword("intrinsic");
  for (int r = 0; r < 3; ++r) {
    const auto row = read_row(3);
    for (int c = 0; c < 3; ++c) cam.K(r, c) = row[c];
  }

  skip_blank();
  if (i >= lines.size())
    parse_fail(path, int(lines.size()), "missing depth range line");
  const auto d = parse_reals(lines[i]);
  if (d.size() < 2 || d.size() > 4)
    parse_fail(path, int(i + 1), "depth line needs 2-4 reals");
  for (const double v : d)
    if (!std::isfinite(v))
      throw NonFiniteValue(path.string() + ": non-finite depth value");
  cam.d_min = d[0];
  const double interval = d[1];
  if (d.size() == 4) {
    cam.d_max = d[3];
  } else {
    const double count = d.size() == 3 ? d[2] : 192.0;
    cam.d_max = cam.d_min + interval * count;
  }

  // Orthonormality: accept tiny drift, repair moderate drift, reject the
  // rest.
  const double dev = std::max(
      (cam.R.transpose() * cam.R - Mat3::Identity()).cwiseAbs().maxCoeff(),
      std::abs(cam.R.determinant() - 1.0));
  if (dev > 1e-6)
    throw NonOrthonormalRotation(path.string() +
                                 ": rotation deviates from SO(3) by " +
                                 std::to_string(dev));
  if (dev > 1e-9) {
    std::cerr << "warning: " << path
              << ": repairing near-orthonormal rotation (dev " << dev << ")\n";
    Vec3 r0 = cam.R.row(0).normalized();
    Vec3 r2 = r0.cross(Vec3(cam.R.row(1))).normalized();
    // r2 here is actually row0 x row1 = row2 direction
    Vec3 r1 = r2.cross(r0);
    cam.R.row(0) = r0.transpose();
    cam.R.row(1) = r1.transpose();
    cam.R.row(2) = r2.transpose();
  }
  return cam;
}

void save_camera(const CameraView& cam, const fs::path& path,
                 double interval_count) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[512];
  out << "extrinsic\n";
  for (int r = 0; r < 3; ++r) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", cam.R(r, 0),
                  cam.R(r, 1), cam.R(r, 2), cam.t(r));
    out << buf;
  }
  out << "0 0 0 1\n\nintrinsic\n";
  for (int r = 0; r < 3; ++r) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", cam.K(r, 0),
                  cam.K(r, 1), cam.K(r, 2));
    out << buf;
  }
  const double interval = (cam.d_max - cam.d_min) / interval_count;
  std::snprintf(buf, sizeof buf, "\n%.17g %.17g %g %.17g\n", cam.d_min,
                interval, interval_count, cam.d_max);
  out << buf;
}

DepthMap read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open PFM file " + path.string());
  std::string magic;
  in >> magic;
  if (magic == "PF")
    throw UnsupportedFormat("color PF maps are not supported: " +
                            path.string());
  if (magic != "Pf") throw ParseError(path.string() + ": not a PFM file");
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  if (!in || w <= 0 || h <= 0 || scale == 0.0)
    throw ParseError(path.string() + ": bad PFM header");
  in.get();  // single whitespace before payload

  DepthMap map(w, h, 0);
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {  // bottom-up storage
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(w) * 4);
    if (!in) throw ParseError(path.string() + ": truncated PFM payload");
    if (scale > 0)  // big-endian payload
      for (float& v : row) {
        uint32_t u;
        std::memcpy(&u, &v, 4);
        u = __builtin_bswap32(u);
        std::memcpy(&v, &u, 4);
      }
    for (int x = 0; x < w; ++x) {
      const size_t i = map.idx(x, y);
      map.depth[i] = row[x];
      map.valid[i] = std::isnan(row[x]) ? 0 : 1;
      if (!map.valid[i]) map.depth[i] = 0.f;
      map.confidence[i] = map.valid[i] ? 1.f : 0.f;
    }
  }
  return map;
}

void write_pfm(const DepthMap& map, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  std::vector<float> row(map.width);
  for (int y = map.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.width; ++x)
      row[x] = map.valid[map.idx(x, y)]
                   ? map.depth[map.idx(x, y)]
                   : std::numeric_limits<float>::quiet_NaN();
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(map.width) * 4);
  }
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open PLY file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw ParseError(path.string() + ": not a PLY file");

  size_t n_vertices = 0;
  bool binary_le = false;
  bool has_rgb = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream iss(line);
    std::string tok;
    iss >> tok;
    if (tok == "format") {
      std::string fmt;
      iss >> fmt;
      binary_le = fmt == "binary_little_endian";
      if (!binary_le)
        throw UnsupportedFormat(path.string() + ": only binary_little_endian");
    } else if (tok == "element") {
      std::string what;
      iss >> what >> n_vertices;
      if (what != "vertex")
        throw UnsupportedFormat(path.string() + ": only vertex elements");
    } else if (tok == "property") {
      std::string type, name;
      iss >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (props.size() >= 6) has_rgb = true;
  if (props.size() != 3 && props.size() != 6)
    throw UnsupportedFormat(path.string() + ": expected xyz[+rgb] layout");

  PointCloud cloud;
  cloud.points.reserve(n_vertices);
  if (has_rgb) cloud.colors.reserve(n_vertices);
  for (size_t i = 0; i < n_vertices; ++i) {
    float xyz[3];
    in.read(reinterpret_cast<char*>(xyz), 12);
    if (!in) throw ParseError(path.string() + ": truncated vertex data");
    cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
    if (has_rgb) {
      uint8_t rgb[3];
      in.read(reinterpret_cast<char*>(rgb), 3);
      cloud.colors.push_back({rgb[0], rgb[1], rgb[2]});
    }
  }
  return cloud;
}

void write_ply(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const float xyz[3] = {float(cloud.points[i].x()), float(cloud.points[i].y()),
                          float(cloud.points[i].z())};
    out.write(reinterpret_cast<const char*>(xyz), 12);
    if (cloud.has_colors())
      out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
  }
}

namespace {

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

PnmHeader read_pnm_header(std::ifstream& in, const fs::path& path) {
  PnmHeader h;
  // Header tokens may be separated by whitespace or #-comments.
  const auto next_token = [&]() -> std::string {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) parse_fail(path, 1, "truncated PNM header");
      if (c == '#') {
        while (c != '\n' && c != EOF) c = in.get();
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(char(c));
    }
  };
  h.magic = next_token();
  h.width = std::stoi(next_token());
  h.height = std::stoi(next_token());
  h.maxval = std::stoi(next_token());
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535)
    parse_fail(path, 1, "bad PNM dimensions");
  return h;
}

}  // namespace

std::optional<ColorImage> load_image_rgb(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open image " + path.string());
  const PnmHeader h = read_pnm_header(in, path);
  if (h.magic != "P6") return std::nullopt;
  if (h.maxval != 255)
    throw UnsupportedFormat(path.string() + ": only 8-bit PPM supported");
  ColorImage img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.data().data()),
          std::streamsize(img.data().size()));
  if (!in) throw ParseError(path.string() + ": truncated PPM payload");
  return img;
}

Image load_image_gray(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open image " + path.string());
  const PnmHeader h = read_pnm_header(in, path);
  if (h.magic == "P6") {
    in.close();
    return to_grayscale(*load_image_rgb(path));
  }
  if (h.magic != "P5")
    throw UnsupportedFormat(path.string() + ": expected P5 or P6");
  Image img(h.width, h.height);
  const size_t n = size_t(h.width) * h.height;
  if (h.maxval < 256) {
    std::vector<uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n));
    if (!in) throw ParseError(path.string() + ": truncated PGM payload");
    for (size_t i = 0; i < n; ++i)
      img.data()[i] = float(buf[i]) / float(h.maxval);
  } else {
    std::vector<uint8_t> buf(n * 2);  // 16-bit PGM is MSB-first
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 2));
    if (!in) throw ParseError(path.string() + ": truncated PGM payload");
    for (size_t i = 0; i < n; ++i)
      img.data()[i] =
          float(buf[2 * i] << 8 | buf[2 * i + 1]) / float(h.maxval);
  }
  return img;
}

void save_pgm16(const Image& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
  std::vector<uint8_t> buf(size_t(img.width()) * img.height() * 2);
  for (size_t i = 0; i < img.data().size(); ++i) {
    const int v =
        std::clamp(int(std::lround(img.data()[i] * 65535.0)), 0, 65535);
    buf[2 * i] = uint8_t(v >> 8);
    buf[2 * i + 1] = uint8_t(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            std::streamsize(buf.size()));
}

void save_ppm(const ColorImage& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            std::streamsize(img.data().size()));
}

std::vector<int> Dataset::select_sources(int ref_id, int n_views) const {
  std::vector<int> out;
  const int want = n_views - 1;
  if (ref_id < int(pairs.size()) && !pairs[ref_id].empty()) {
    for (const int id : pairs[ref_id]) {
      if (int(out.size()) >= want) break;
      out.push_back(id);
    }
    return out;
  }
  // No pair list: nearest cameras by optical-center distance.
  const Vec3 c_ref = camera(ref_id).center();
  std::vector<std::pair<double, int>> by_dist;
  for (int id = 0; id < num_views(); ++id) {
    if (id == ref_id) continue;
    by_dist.emplace_back((camera(id).center() - c_ref).norm(), id);
  }
  std::sort(by_dist.begin(), by_dist.end());
  for (const auto& [dist, id] : by_dist) {
    if (int(out.size()) >= want) break;
    out.push_back(id);
  }
  return out;
}

Dataset open_dataset(const fs::path& root) {
  Dataset ds;
  ds.root = root;
  const fs::path img_dir = root / "images";
  const fs::path cam_dir = root / "cams";
  if (!fs::is_directory(img_dir) || !fs::is_directory(cam_dir))
    throw Error("dataset needs images/ and cams/ under " + root.string());

  for (const auto& e : fs::directory_iterator(img_dir)) {
    const auto ext = e.path().extension();
    if (ext == ".pgm" || ext == ".ppm") ds.image_paths.push_back(e.path());
  }
  std::sort(ds.image_paths.begin(), ds.image_paths.end());
  for (const auto& e : fs::directory_iterator(cam_dir))
    if (e.path().extension() == ".txt") ds.camera_paths.push_back(e.path());
  std::sort(ds.camera_paths.begin(), ds.camera_paths.end());

  if (ds.image_paths.empty())
    throw Error("no PGM/PPM images in " + img_dir.string());
  if (ds.image_paths.size() != ds.camera_paths.size())
    throw Error("camera count != image count in " + root.string());

  const fs::path depth_dir = root / "depths";
  if (fs::is_directory(depth_dir)) {
    for (const auto& img : ds.image_paths) {
      fs::path d = depth_dir / img.stem();
      d += ".pfm";
      if (!fs::exists(d))
        throw Error("missing ground-truth depth " + d.string());
      ds.depth_paths.push_back(d);
    }
  }

  const fs::path pair_file = root / "pair.txt";
  if (fs::exists(pair_file)) {
    std::ifstream in(pair_file);
    int n = 0;
    in >> n;
    if (!in || n != ds.num_views())
      throw Error("pair.txt view count mismatch in " + root.string());
    ds.pairs.resize(n);
    for (int i = 0; i < n; ++i) {
      int id = 0, k = 0;
      in >> id >> k;
      if (!in || id < 0 || id >= n)
        throw Error("pair.txt references invalid view id");
      for (int j = 0; j < k; ++j) {
        int src = 0;
        double score = 0.0;
        in >> src >> score;
        if (!in || src < 0 || src >= n)
          throw Error("pair.txt references invalid source id");
        ds.pairs[id].push_back(src);
      }
    }
  }
  return ds;
}

void dump_volume(const CostVolume& cv, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write("CVPV", 4);
  const int32_t dims[4] = {cv.width, cv.height, cv.hypotheses.count,
                           cv.level};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(cv.costs.data()),
            std::streamsize(cv.costs.size() * 4));
}

}  // namespace cvp
