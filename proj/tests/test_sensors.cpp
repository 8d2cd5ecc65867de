#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "common/rng.hpp"
#include "doctest.h"
#include "sensors/sensors.hpp"
#include "track/image_io.hpp"
#include "track/procedural.hpp"
#include "track/trackmap.hpp"

using namespace racelab;

namespace {

const char* kCacheDir = "test_tmp/tracks";

const TrackMap& oval_map() {
  static TrackMap map = [] {
    auto [image, meta] = resolve_track("oval", kCacheDir);
    return TrackMap::load(image, meta);
  }();
  return map;
}

// Brute-force oracle: march the ray in 1 mm steps until a sample point lands
// in a wall pixel or an opponent rectangle.
double march_ray(const WorldScene& scene, Vec2 origin, double angle, double max_range) {
  Vec2 dir = heading(angle);
  for (double t = 0.0; t <= max_range; t += 0.001) {
    Vec2 p{origin.x + t * dir.x, origin.y + t * dir.y};
    if (scene.map && scene.map->in_bounds(scene.map->pixel_of(p).first,
                                          scene.map->pixel_of(p).second) &&
        scene.map->occupied_at(p))
      return t;
    for (const OrientedRect& r : scene.opponents)
      if (r.contains(p)) return t;
  }
  return max_range;
}

// A stadium track rasterized around an arbitrary segment; used for the
// rotated-map equivariance check.
void write_stadium(const std::string& img_path, const std::string& meta_path, Vec2 a,
                   Vec2 b, double radius, double half_width, int width_px, int height_px,
                   Vec2 start, double yaw) {
  GrayImage img;
  img.width = width_px;
  img.height = height_px;
  img.pixels.assign(static_cast<size_t>(width_px) * height_px, 0);
  for (int r = 0; r < height_px; ++r)
    for (int c = 0; c < width_px; ++c) {
      Vec2 p{(c + 0.5) * 0.05, (r + 0.5) * 0.05};
      double d = std::abs(point_segment_distance(p, a, b) - radius);
      img.pixels[static_cast<size_t>(r) * width_px + c] = d <= half_width ? 255 : 0;
    }
  save_pgm(img_path, img);
  std::ofstream out(meta_path);
  out << "resolution_m_per_px = 0.05\noccupied_threshold = 127\n"
      << "start_x_m = " << start.x << "\nstart_y_m = " << start.y
      << "\nstart_yaw_rad = " << yaw << "\ndirection = ccw\n";
}

}  // namespace

TEST_CASE("lidar on an empty plane returns max range everywhere") {
  WorldScene scene;
  SensorParams p;
  auto scan = lidar_scan(scene, {0, 0}, 0.7, p);
  REQUIRE(scan.size() == 1080);
  for (double r : scan) CHECK(r == 15.0);
}

TEST_CASE("lidar center beam measures a frontal wall") {
  const TrackMap& map = oval_map();
  WorldScene scene{&map, {}};
  SensorParams p;
  // Facing +y (down the image) from the lower straight: the outer wall runs
  // at y = 7.25, so from y = 5.25 the wall is 2 m ahead.
  auto scan = lidar_scan(scene, {6.0, 5.25}, M_PI / 2, p);
  CHECK(scan[540] == doctest::Approx(2.0).epsilon(map.resolution() / 2.0));
}

TEST_CASE("analytic lidar matches 1 mm ray marching") {
  const TrackMap& map = oval_map();
  WorldScene scene{&map, {}};
  scene.opponents.push_back({7.5, 5.75, 0.4, 0.5, 0.3});
  scene.opponents.push_back({4.0, 5.9, -0.9, 0.5, 0.3});
  Rng rng(303);
  double bound = 1.5 * map.resolution();
  for (int i = 0; i < 500; ++i) {
    // Random poses on the lower straight and right arc, any heading. The ego
    // never sits inside an obstacle, so such draws are skipped.
    Vec2 pos{rng.uniform(3.0, 9.5), rng.uniform(4.6, 6.9)};
    if (map.occupied_at(pos)) continue;
    bool inside = false;
    for (const auto& r : scene.opponents)
      if (r.contains(pos)) inside = true;
    if (inside) continue;
    double angle = rng.uniform(-M_PI, M_PI);
    double analytic = cast_ray(scene, pos, angle, 15.0).distance;
    double marched = march_ray(scene, pos, angle, 15.0);
    CHECK(std::abs(analytic - marched) <= bound);
  }
}

TEST_CASE("lidar is rotation-equivariant") {
  SensorParams p;
  // Obstacle-only scene rotated by an arbitrary angle.
  WorldScene scene;
  scene.opponents.push_back({2.0, 1.0, 0.3, 0.6, 0.4});
  scene.opponents.push_back({-1.5, 2.5, -1.1, 0.5, 0.3});
  Vec2 ego{0.3, -0.2};
  double ego_yaw = 0.4;
  auto base = lidar_scan(scene, ego, ego_yaw, p);

  double theta = 1.234;
  double ct = std::cos(theta), st = std::sin(theta);
  auto rot = [&](Vec2 v) { return Vec2{ct * v.x - st * v.y, st * v.x + ct * v.y}; };
  WorldScene rotated;
  for (const auto& r : scene.opponents) {
    Vec2 c = rot({r.cx, r.cy});
    rotated.opponents.push_back({c.x, c.y, r.yaw + theta, r.length, r.width});
  }
  Vec2 ego_r = rot(ego);
  auto turned = lidar_scan(rotated, ego_r, ego_yaw + theta, p);
  for (size_t i = 0; i < base.size(); ++i)
    CHECK(std::abs(base[i] - turned[i]) <= 1e-9);

  // Map-backed scene rotated by 90 degrees (the raster rotates exactly).
  namespace fs = std::filesystem;
  fs::create_directories(kCacheDir);
  std::string h_img = std::string(kCacheDir) + "/stad_h.pgm";
  std::string h_meta = std::string(kCacheDir) + "/stad_h.meta";
  std::string v_img = std::string(kCacheDir) + "/stad_v.pgm";
  std::string v_meta = std::string(kCacheDir) + "/stad_v.meta";
  write_stadium(h_img, h_meta, {3.75, 4.0}, {8.25, 4.0}, 1.75, 1.5, 240, 160,
                {6.0, 5.75}, 0.0);
  // Same stadium with x/y swapped: segment vertical, image portrait.
  write_stadium(v_img, v_meta, {4.0, 3.75}, {4.0, 8.25}, 1.75, 1.5, 160, 240,
                {5.75, 6.0}, M_PI / 2);
  TrackMap horiz = TrackMap::load(h_img, h_meta);
  TrackMap vert = TrackMap::load(v_img, v_meta);
  WorldScene sh{&horiz, {}};
  WorldScene sv{&vert, {}};
  double bound = 1.5 * horiz.resolution();
  Rng rng(311);
  for (int trial = 0; trial < 40; ++trial) {
    Vec2 pos{rng.uniform(4.0, 8.0), rng.uniform(4.5, 7.0)};
    if (horiz.occupied_at(pos)) continue;
    double yaw = rng.uniform(-M_PI, M_PI);
    auto a = lidar_scan(sh, pos, yaw, p);
    // (x, y) -> (y, x) mirrors the plane; mirroring flips beam order, so
    // compare against the scan of the mirrored heading reversed.
    auto b = lidar_scan(sv, {pos.y, pos.x}, M_PI / 2 - yaw, p);
    for (size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(a[i] - b[a.size() - 1 - i]) <= bound);
  }
}

TEST_CASE("camera renders bands, distance-scaled slices and red opponents") {
  SensorParams p;
  WorldScene empty;
  auto img = render_camera(empty, {0, 0}, 0.0, p);
  REQUIRE(img.size() == 64 * 64 * 3);
  // Only sky above, floor below.
  for (int c = 0; c < 64; ++c) {
    CHECK(img[(0 * 64 + c) * 3 + 2] == doctest::Approx(0.92));   // sky blue-ish
    CHECK(img[(63 * 64 + c) * 3 + 0] == doctest::Approx(0.15));  // floor
  }

  auto count_red_rows = [&](double dist) {
    WorldScene scene;
    scene.opponents.push_back({dist, 0.0, 0.0, 0.3, 1.2});
    auto im = render_camera(scene, {0, 0}, 0.0, p);
    int rows = 0;
    for (int r = 0; r < 64; ++r) {
      double red = im[(static_cast<size_t>(r) * 64 + 32) * 3 + 0];
      double green = im[(static_cast<size_t>(r) * 64 + 32) * 3 + 1];
      double blue = im[(static_cast<size_t>(r) * 64 + 32) * 3 + 2];
      if (red > 0.8 && green < 0.2 && blue < 0.2) ++rows;
    }
    return rows;
  };
  int rows2 = count_red_rows(2.0);
  int rows4 = count_red_rows(4.0);
  CHECK(rows2 > 0);
  CHECK(rows2 > rows4);

  // Deterministic rendering.
  WorldScene scene{&oval_map(), {{7.0, 5.75, 0.2, 0.5, 0.3}}};
  auto a = render_camera(scene, {6.0, 5.75}, 0.0, p);
  auto b = render_camera(scene, {6.0, 5.75}, 0.0, p);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("camera and lidar agree on the frontal obstacle distance") {
  const TrackMap& map = oval_map();
  WorldScene scene{&map, {}};
  SensorParams p;
  Rng rng(317);
  for (int trial = 0; trial < 30; ++trial) {
    Vec2 pos{rng.uniform(4.5, 7.5), rng.uniform(4.6, 6.9)};
    if (map.occupied_at(pos)) continue;
    double yaw = rng.uniform(-M_PI, M_PI);
    auto scan = lidar_scan(scene, pos, yaw, p);
    auto cam = render_camera_full(scene, pos, yaw, p);
    // Compare the camera's two innermost columns to the lidar center beam;
    // their rays sit ~0.7 degrees to either side, so only frontal (non
    // grazing) geometry is comparable.
    double lidar_center = scan[540];
    if (lidar_center >= p.lidar_range - 1e-9) continue;
    if (std::abs(scan[530] - scan[550]) > 2.0 * map.resolution()) continue;
    double cam_center = std::min(cam.column_depth[31], cam.column_depth[32]);
    CHECK(std::abs(lidar_center - cam_center) <= 2.0 * map.resolution() + 0.02 * lidar_center);
  }
}

TEST_CASE("local occupancy window") {
  SensorParams p;
  WorldScene empty;
  auto grid = local_occupancy(empty, {0, 0}, 0.0, 8.0, 64);
  for (uint8_t v : grid) CHECK(v == 0);

  // Wall 1 m ahead with an 8 m window: a band 8 rows above center.
  const TrackMap& map = oval_map();
  WorldScene scene{&map, {}};
  // Facing +y from the lower straight: wall at y = 7.25.
  auto g = local_occupancy(scene, {6.0, 6.25}, M_PI / 2, 8.0, 64);
  auto at = [&](int r, int c) { return g[static_cast<size_t>(r) * 64 + c]; };
  CHECK(at(23, 32) == 1);  // 1 m / 0.125 m per cell = 8 rows above center
  CHECK(at(30, 32) == 0);

  // Rotating the ego rotates the window contents.
  WorldScene rect_scene;
  rect_scene.opponents.push_back({2.0, 0.5, 0.35, 1.0, 0.6});
  rect_scene.opponents.push_back({-1.0, -1.5, -0.4, 0.8, 0.5});
  auto g0 = local_occupancy(rect_scene, {0, 0}, 0.0, 8.0, 64);
  auto g90 = local_occupancy(rect_scene, {0, 0}, M_PI / 2, 8.0, 64);
  // Rotating the ego by +90 deg rotates content: cell (r,c) of the turned
  // grid shows what (r', c') = (c, N-1-r) showed before.
  int agree = 0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      uint8_t rotated = g0[static_cast<size_t>(c) * 64 + (63 - r)];
      if (g90[static_cast<size_t>(r) * 64 + c] == rotated) ++agree;
    }
  CHECK(agree >= static_cast<int>(0.95 * 64 * 64));
}

TEST_CASE("observation debug dump writes csv, ppm and pgm") {
  namespace fs = std::filesystem;
  fs::create_directories("test_tmp");
  ObservationBundle obs;
  obs.lidar = {1.0, 2.5, 15.0};
  obs.image.assign(64 * 64 * 3, 0.25);
  obs.local_map.assign(64 * 64, 0);
  obs.local_map[0] = 1;
  dump_observation(obs, "test_tmp/obs");
  CHECK(fs::exists("test_tmp/obs.lidar.csv"));
  CHECK(fs::exists("test_tmp/obs.image.ppm"));
  CHECK(fs::exists("test_tmp/obs.map.pgm"));
  GrayImage back = load_gray_image("test_tmp/obs.map.pgm");
  CHECK(back.width == 64);
  CHECK(back.pixels[0] == 0);    // occupied drawn dark
  CHECK(back.pixels[1] == 255);  // free drawn light
}
