#pragma once

#include <span>
#include <string>
#include <vector>

#include "common/geometry.hpp"

namespace racelab {

struct TrackMetadata {
  double resolution = 0.0;     // meters per pixel
  int occupied_threshold = 0;  // intensity below this is a wall
  Vec2 start_pos;
  double start_yaw = 0.0;
  std::string direction;  // "cw" or "ccw"
};

// FormatError on missing or malformed keys.
TrackMetadata read_track_metadata(const std::string& path);

struct ProgressField {
  std::vector<double> value;  // per pixel in [0,1); -1 on occupied pixels
  double loop_length = 0.0;   // meters along the driving loop
};

// Geodesic (on-track) distance from the start line, ordered along the
// driving direction given by the start yaw, normalized by the loop length.
// The start line is the free segment through the start pose perpendicular to
// the start heading; its pixels score exactly 0. TopologyError when the free
// space cannot close back into a loop (or no wall bounds the start line).
ProgressField compute_progress_field(const std::vector<uint8_t>& occupied, int width,
                                     int height, double resolution, Vec2 start_pos,
                                     double start_yaw);

// Occupancy-grid race track with derived progress field, wall clearance and
// centerline. Immutable after load; freely shareable across threads.
class TrackMap {
 public:
  static TrackMap load(const std::string& image_path, const std::string& meta_path);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return meta_.resolution; }
  Vec2 start_position() const { return meta_.start_pos; }
  double start_yaw() const { return meta_.start_yaw; }
  const std::string& direction() const { return meta_.direction; }
  double loop_length() const { return progress_.loop_length; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  // Everything beyond the image border counts as wall.
  bool occupied(int row, int col) const {
    return !in_bounds(row, col) ||
           occupied_[static_cast<size_t>(row) * width_ + col] != 0;
  }
  bool occupied_at(Vec2 p) const;

  Vec2 pixel_center(int row, int col) const {
    return {(col + 0.5) * meta_.resolution, (row + 0.5) * meta_.resolution};
  }
  std::pair<int, int> pixel_of(Vec2 p) const;

  // Normalized track progress at a position; QueryError off-track.
  double progress_at(Vec2 p) const;

  // Meters to the nearest wall pixel.
  double clearance_at(Vec2 p) const;

  // True iff a wall pixel lies inside the footprint or the footprint
  // overlaps any of the other rectangles.
  bool is_collision(const OrientedRect& footprint,
                    std::span<const OrientedRect> others) const;

  // Waypoints equidistant from the walls: per progress isoline the point of
  // maximum clearance, resampled at uniform arc-length spacing.
  std::vector<Vec2> extract_centerline_waypoints(double spacing_m) const;

  // Centerline at the default spacing, computed at load.
  const std::vector<Vec2>& centerline() const { return centerline_; }
  int nearest_waypoint(Vec2 p) const;
  double waypoint_tangent(int index) const;

  const std::vector<double>& progress_field() const { return progress_.value; }

  static constexpr double kDefaultWaypointSpacing = 0.25;  // < 0.5 m invariant

 private:
  TrackMap() = default;

  int width_ = 0, height_ = 0;
  TrackMetadata meta_;
  std::vector<uint8_t> occupied_;
  ProgressField progress_;
  std::vector<double> clearance_;  // meters, per pixel
  std::vector<Vec2> centerline_;
};

}  // namespace racelab
