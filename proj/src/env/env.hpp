#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/config.hpp"
#include "common/rng.hpp"
#include "env/waypoint_follower.hpp"
#include "sensors/sensors.hpp"
#include "track/trackmap.hpp"
#include "vehicle/vehicle.hpp"

namespace racelab {

enum class EnvMode { single, multi_static, multi_dynamic };
enum class RewardMode { single, multi };
enum class ProgressMode { signed_wrapped, paper_absolute };

struct EnvConfig {
  EnvMode mode = EnvMode::single;
  RewardMode reward_mode = RewardMode::single;
  ProgressMode progress_mode = ProgressMode::signed_wrapped;
  int action_repeat = 4;
  double dt = 0.01;       // simulation tick, s
  long max_steps = 2000;  // simulation ticks per episode
  int obstacle_count = 5;
  bool random_start = false;
  bool emit_local_map = false;
  int lidar_period_ticks = 4;
  double car_length = 0.5, car_width = 0.3;
  double obstacle_gap = 2.0;      // m between static obstacles
  double obstacle_ego_gap = 3.0;  // m between obstacles and the ego
  double opponent_ahead = 3.0;    // m head start for the dynamic opponent
  VehicleParams vehicle;
  SensorParams sensors;
  WaypointFollower::Gains follower;

  static EnvConfig from(const Config& cfg);
};

// Maps the progress difference into (-0.5, 0.5] so a start-line crossing
// counts as a small forward step instead of a full backward lap.
double wrap_unit(double delta);

// Eq.-style step rewards. paper_absolute keeps the literal |dp| form; the
// default signed_wrapped form pays only forward progress.
double reward_single(double p_prev, double p_now, bool collided, ProgressMode mode);
double reward_multi(double p_prev, double p_now, bool collided, double steer_prev,
                    double steer_now, ProgressMode mode);

struct StepInfo {
  double progress = 0.0;      // p_t in [0,1)
  double total_progress = 0.0;  // laps + fraction accumulated since reset
  int lap_count = 0;
  bool collision = false;
  VehicleState ego;
  long tick = 0;
};

struct StepResult {
  ObservationBundle obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Episode log rows, one per environment step (external CSV interface).
struct EpisodeLog {
  struct Row {
    long tick;
    double x, y, yaw, speed;
    double steer_norm, torque_norm;
    double reward, progress;
    bool collision, done;
  };
  std::vector<Row> rows;

  void append(const StepResult& r, const ActionCommand& cmd);
  void save_csv(const std::string& path) const;
};

// POMDP racing environment. One instance is single-threaded and stateful;
// run several instances with distinct seeds for parallel collection.
class RacingEnv {
 public:
  RacingEnv(std::shared_ptr<const TrackMap> map, EnvConfig cfg);

  // Deterministic under (config, seed): ego at the start pose (or a random
  // on-track pose when random_start), fresh obstacle layout, tick 0.
  StepResult reset(uint64_t seed);

  // Applies the command for action_repeat ticks; StateError once done.
  StepResult step(const ActionCommand& cmd);

  bool done() const { return done_; }
  long tick() const { return tick_; }
  const TrackMap& map() const { return *map_; }
  const EnvConfig& config() const { return cfg_; }
  const VehicleState& ego_state() const { return ego_; }
  const std::vector<OrientedRect>& obstacles() const { return scene_.opponents; }
  const std::optional<VehicleState>& opponent_state() const { return opponent_; }
  double opponent_total_progress() const { return opponent_total_progress_; }

 private:
  OrientedRect footprint(const VehicleState& s) const;
  void refresh_lidar();
  ObservationBundle observe();
  VehicleState place_random(Rng& rng, double min_clearance, bool tangent_yaw);

  std::shared_ptr<const TrackMap> map_;
  EnvConfig cfg_;
  Rng rng_{0};

  VehicleState ego_;
  std::optional<VehicleState> opponent_;
  std::optional<WaypointFollower> follower_;
  WorldScene scene_;  // map + static obstacles (+ dynamic opponent slot last)

  long tick_ = 0;
  bool done_ = true;
  bool collision_ = false;
  double prev_progress_ = 0.0;
  double total_progress_ = 0.0;
  double opponent_total_progress_ = 0.0;
  double opponent_prev_progress_ = 0.0;
  double prev_steer_norm_ = 0.0;
  std::vector<double> last_lidar_;
  long last_lidar_tick_ = 0;
};

}  // namespace racelab
