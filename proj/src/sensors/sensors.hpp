#pragma once

#include <string>
#include <vector>

#include "common/geometry.hpp"
#include "track/trackmap.hpp"

namespace racelab {

// Everything the sensors can see: the static map plus opponent car
// footprints (rendered red). The ego vehicle is the sensing pose itself and
// never occludes its own sensors.
struct WorldScene {
  const TrackMap* map = nullptr;  // null means an empty plane (tests)
  std::vector<OrientedRect> opponents;
};

struct SensorParams {
  int lidar_beams = 1080;
  double lidar_range = 15.0;                   // m
  double lidar_fov = 270.0 * M_PI / 180.0;     // rad
  int image_size = 64;
  double camera_fov = 90.0 * M_PI / 180.0;     // rad
  double local_map_extent = 8.0;               // m, side of the window
};

// One timestep of sensing. lidar_tick/camera_tick record the simulation tick
// each modality was last refreshed at (LiDAR runs at a lower rate).
struct ObservationBundle {
  std::vector<double> lidar;       // beam ranges, m, clipped to [0, range]
  std::vector<double> image;       // HxWx3, values in [0,1]
  std::vector<uint8_t> local_map;  // HxW {0,1}; empty unless requested
  long lidar_tick = 0;
  long camera_tick = 0;
};

enum class HitTag { none = 0, wall = 1, opponent = 2 };

struct RayHit {
  double distance;
  HitTag tag;
};

// First intersection along the ray with a wall pixel boundary (grid DDA) or
// an opponent rectangle edge (analytic); none within max_range -> max_range.
RayHit cast_ray(const WorldScene& scene, Vec2 origin, double angle, double max_range);

// Beam 0 points at -fov/2 relative to the heading; beams sweep to +fov/2 in
// uniform steps with both endpoints included.
std::vector<double> lidar_scan(const WorldScene& scene, Vec2 pos, double yaw,
                               const SensorParams& p);

struct CameraRender {
  std::vector<double> image;         // HxWx3 in [0,1]
  std::vector<double> column_depth;  // per-column hit distance (m), range if none
  std::vector<HitTag> column_tag;
};

// 2.5-D column raycaster: per column the nearest hit sets a wall slice whose
// height scales with 1/perpendicular-distance; walls render gray, opponents
// red, with fixed floor and sky bands. Deterministic.
CameraRender render_camera_full(const WorldScene& scene, Vec2 pos, double yaw,
                                const SensorParams& p);
std::vector<double> render_camera(const WorldScene& scene, Vec2 pos, double yaw,
                                  const SensorParams& p);

// Ego-centered, ego-aligned bird's-eye window rasterized from map walls and
// opponent footprints; the ego sits at the grid center facing up (row 0).
std::vector<uint8_t> local_occupancy(const WorldScene& scene, Vec2 pos, double yaw,
                                     double extent_m, int size);

// Debug dump: <prefix>.lidar.csv, <prefix>.image.ppm, <prefix>.map.pgm.
void dump_observation(const ObservationBundle& obs, const std::string& prefix);

}  // namespace racelab
