#include "track/procedural.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "common/errors.hpp"
#include "common/geometry.hpp"
#include "track/image_io.hpp"

namespace racelab {

namespace {

constexpr double kRes = 0.05;        // m per pixel
constexpr double kHalfWidth = 1.5;   // 3 m wide track
constexpr int kThreshold = 127;

void write_meta(const std::string& path, Vec2 start, double yaw, const char* direction) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write track metadata '" + path + "'");
  out << "resolution_m_per_px = " << kRes << "\n"
      << "occupied_threshold = " << kThreshold << "\n"
      << "start_x_m = " << start.x << "\n"
      << "start_y_m = " << start.y << "\n"
      << "start_yaw_rad = " << yaw << "\n"
      << "direction = " << direction << "\n";
}

void rasterize_band(GrayImage& img, const std::vector<Vec2>& centerline) {
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      Vec2 p{(c + 0.5) * kRes, (r + 0.5) * kRes};
      double best = 1e18;
      int n = static_cast<int>(centerline.size());
      for (int i = 0; i < n; ++i) {
        double d = point_segment_distance(p, centerline[static_cast<size_t>(i)],
                                          centerline[static_cast<size_t>((i + 1) % n)]);
        if (d < best) best = d;
      }
      img.pixels[static_cast<size_t>(r) * img.width + c] =
          best <= kHalfWidth ? 255 : 0;
    }
}

}  // namespace

void write_oval_track(const std::string& image_path, const std::string& meta_path) {
  // Stadium: points at distance R from a horizontal segment; the band
  // |dist - R| <= half-width is the track.
  const double cx = 6.0, cy = 4.0, half_seg = 2.25, radius = 1.75;
  GrayImage img;
  img.width = static_cast<int>(std::lround(12.0 / kRes));
  img.height = static_cast<int>(std::lround(8.0 / kRes));
  img.pixels.assign(static_cast<size_t>(img.width) * img.height, 0);
  Vec2 a{cx - half_seg, cy}, b{cx + half_seg, cy};
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      Vec2 p{(c + 0.5) * kRes, (r + 0.5) * kRes};
      double d = std::abs(point_segment_distance(p, a, b) - radius);
      img.pixels[static_cast<size_t>(r) * img.width + c] = d <= kHalfWidth ? 255 : 0;
    }
  save_pgm(image_path, img);
  // Start on the lower straight, driving toward +x.
  write_meta(meta_path, {cx, cy + radius}, 0.0, "ccw");
}

void write_scurve_track(const std::string& image_path, const std::string& meta_path) {
  const double cx = 8.0, cy = 5.5, rx = 5.0, ry = 2.6, wobble = 0.5;
  GrayImage img;
  img.width = static_cast<int>(std::lround(16.0 / kRes));
  img.height = static_cast<int>(std::lround(11.0 / kRes));
  img.pixels.assign(static_cast<size_t>(img.width) * img.height, 0);
  const int samples = 1600;
  std::vector<Vec2> line;
  line.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    double th = 2.0 * M_PI * i / samples;
    line.push_back({cx + rx * std::cos(th),
                    cy + ry * std::sin(th) + wobble * std::sin(3.0 * th)});
  }
  rasterize_band(img, line);
  save_pgm(image_path, img);
  // theta = pi/2: position (cx, cy + ry - wobble), tangent (-rx, 0).
  write_meta(meta_path, {cx, cy + ry - wobble}, M_PI, "cw");
}

std::pair<std::string, std::string> resolve_track(const std::string& id,
                                                  const std::string& cache_dir) {
  namespace fs = std::filesystem;
  if (id == "oval" || id == "scurve") {
    fs::create_directories(cache_dir);
    std::string image = cache_dir + "/" + id + ".pgm";
    std::string meta = cache_dir + "/" + id + ".meta";
    if (!fs::exists(image) || !fs::exists(meta)) {
      if (id == "oval")
        write_oval_track(image, meta);
      else
        write_scurve_track(image, meta);
    }
    return {image, meta};
  }
  std::string base = id;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".meta")
    base = base.substr(0, base.size() - 5);
  std::string meta = base + ".meta";
  if (!fs::exists(meta)) throw IoError("track metadata not found: '" + meta + "'");
  for (const char* ext : {".pgm", ".png"}) {
    std::string image = base + ext;
    if (fs::exists(image)) return {image, meta};
  }
  throw IoError("no map image (" + base + ".pgm/.png) next to '" + meta + "'");
}

}  // namespace racelab
