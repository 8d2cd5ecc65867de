#include "sensors/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "common/errors.hpp"
#include "track/image_io.hpp"

namespace racelab {

namespace {

// Amanatides & Woo grid traversal; returns distance to the boundary of the
// first occupied cell, or +inf when the ray leaves the map without a hit.
double cast_grid(const TrackMap& map, Vec2 origin, Vec2 dir, double max_range) {
  double res = map.resolution();
  int col = static_cast<int>(std::floor(origin.x / res));
  int row = static_cast<int>(std::floor(origin.y / res));
  if (map.occupied(row, col)) return 0.0;

  int step_c = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  int step_r = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
  if (step_c != 0) {
    double edge = (col + (step_c > 0 ? 1 : 0)) * res;
    t_max_x = (edge - origin.x) / dir.x;
    t_delta_x = res / std::abs(dir.x);
  }
  if (step_r != 0) {
    double edge = (row + (step_r > 0 ? 1 : 0)) * res;
    t_max_y = (edge - origin.y) / dir.y;
    t_delta_y = res / std::abs(dir.y);
  }
  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      col += step_c;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      row += step_r;
    }
    if (t > max_range) return inf;
    if (!map.in_bounds(row, col)) return inf;  // open map edge: no echo
    if (map.occupied(row, col)) return t;
  }
}

struct Rgb {
  double r, g, b;
};
constexpr Rgb kSky{0.70, 0.80, 0.92};
constexpr Rgb kFloor{0.15, 0.15, 0.15};
constexpr Rgb kWall{0.50, 0.50, 0.50};
constexpr Rgb kOpponent{0.90, 0.08, 0.08};

}  // namespace

RayHit cast_ray(const WorldScene& scene, Vec2 origin, double angle, double max_range) {
  Vec2 dir = heading(angle);
  RayHit hit{max_range, HitTag::none};
  if (scene.map) {
    double d = cast_grid(*scene.map, origin, dir, max_range);
    if (d <= max_range) hit = {d, HitTag::wall};
  }
  for (const OrientedRect& rect : scene.opponents) {
    double d = ray_rect_distance(origin, angle, rect);
    if (d < hit.distance) hit = {d, HitTag::opponent};
  }
  return hit;
}

std::vector<double> lidar_scan(const WorldScene& scene, Vec2 pos, double yaw,
                               const SensorParams& p) {
  std::vector<double> ranges(static_cast<size_t>(p.lidar_beams));
  double step = p.lidar_fov / (p.lidar_beams - 1);
  for (int i = 0; i < p.lidar_beams; ++i) {
    double angle = yaw - p.lidar_fov / 2 + i * step;
    ranges[static_cast<size_t>(i)] = cast_ray(scene, pos, angle, p.lidar_range).distance;
  }
  return ranges;
}

CameraRender render_camera_full(const WorldScene& scene, Vec2 pos, double yaw,
                                const SensorParams& p) {
  int n = p.image_size;
  CameraRender out;
  out.image.assign(static_cast<size_t>(n) * n * 3, 0.0);
  out.column_depth.assign(static_cast<size_t>(n), p.lidar_range);
  out.column_tag.assign(static_cast<size_t>(n), HitTag::none);

  auto put = [&](int r, int c, Rgb color) {
    size_t i = (static_cast<size_t>(r) * n + c) * 3;
    out.image[i] = color.r;
    out.image[i + 1] = color.g;
    out.image[i + 2] = color.b;
  };

  for (int c = 0; c < n; ++c) {
    double rel = -p.camera_fov / 2 + (c + 0.5) * p.camera_fov / n;
    RayHit hit = cast_ray(scene, pos, yaw + rel, p.lidar_range);
    out.column_depth[static_cast<size_t>(c)] = hit.distance;
    out.column_tag[static_cast<size_t>(c)] = hit.tag;

    int half = 0;
    if (hit.tag != HitTag::none) {
      double dperp = std::max(1e-6, hit.distance * std::cos(rel));
      // A slice one meter away fills the full image height.
      half = std::min(n / 2, static_cast<int>(std::lround(n / 2 / dperp)));
    }
    int top = n / 2 - half, bottom = n / 2 + half;
    Rgb wall_color = hit.tag == HitTag::opponent ? kOpponent : kWall;
    for (int r = 0; r < n; ++r) {
      if (r < top)
        put(r, c, kSky);
      else if (r < bottom)
        put(r, c, wall_color);
      else
        put(r, c, kFloor);
    }
  }
  return out;
}

std::vector<double> render_camera(const WorldScene& scene, Vec2 pos, double yaw,
                                  const SensorParams& p) {
  return render_camera_full(scene, pos, yaw, p).image;
}

std::vector<uint8_t> local_occupancy(const WorldScene& scene, Vec2 pos, double yaw,
                                     double extent_m, int size) {
  if (extent_m <= 0.0) throw ParameterError("local_occupancy: extent must be > 0");
  std::vector<uint8_t> grid(static_cast<size_t>(size) * size, 0);
  double cell = extent_m / size;
  Vec2 fwd = heading(yaw);
  Vec2 right = heading(yaw + M_PI / 2);
  double mid = size / 2.0 - 0.5;
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      double f = (mid - r) * cell;
      double l = (c - mid) * cell;
      Vec2 w{pos.x + f * fwd.x + l * right.x, pos.y + f * fwd.y + l * right.y};
      bool occ = scene.map ? scene.map->occupied_at(w) : false;
      if (!occ)
        for (const OrientedRect& rect : scene.opponents)
          if (rect.contains(w)) {
            occ = true;
            break;
          }
      grid[static_cast<size_t>(r) * size + c] = occ ? 1 : 0;
    }
  return grid;
}

void dump_observation(const ObservationBundle& obs, const std::string& prefix) {
  {
    std::ofstream out(prefix + ".lidar.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write '" + prefix + ".lidar.csv'");
    for (size_t i = 0; i < obs.lidar.size(); ++i)
      out << (i ? "," : "") << obs.lidar[i];
    out << "\n";
  }
  if (!obs.image.empty()) {
    int n = static_cast<int>(std::lround(std::sqrt(obs.image.size() / 3.0)));
    save_ppm(prefix + ".image.ppm", n, n, obs.image);
  }
  if (!obs.local_map.empty()) {
    int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(obs.local_map.size()))));
    GrayImage img;
    img.width = n;
    img.height = n;
    img.pixels.resize(obs.local_map.size());
    for (size_t i = 0; i < obs.local_map.size(); ++i)
      img.pixels[i] = obs.local_map[i] ? 0 : 255;  // occupied drawn dark
    save_pgm(prefix + ".map.pgm", img);
  }
}

}  // namespace racelab
