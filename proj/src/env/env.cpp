#include "env/env.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "common/errors.hpp"

namespace racelab {

EnvConfig EnvConfig::from(const Config& cfg) {
  EnvConfig e;
  const std::string& mode = cfg.get_s("mode");
  if (mode == "single")
    e.mode = EnvMode::single;
  else if (mode == "multi_static")
    e.mode = EnvMode::multi_static;
  else if (mode == "multi_dynamic")
    e.mode = EnvMode::multi_dynamic;
  else
    throw FormatError("unknown mode '" + mode + "'");

  const std::string& rm = cfg.get_s("reward_mode");
  if (rm == "single")
    e.reward_mode = RewardMode::single;
  else if (rm == "multi")
    e.reward_mode = RewardMode::multi;
  else
    throw FormatError("unknown reward_mode '" + rm + "'");

  const std::string& pm = cfg.get_s("progress_mode");
  if (pm == "signed_wrapped")
    e.progress_mode = ProgressMode::signed_wrapped;
  else if (pm == "paper_absolute")
    e.progress_mode = ProgressMode::paper_absolute;
  else
    throw FormatError("unknown progress_mode '" + pm + "'");

  e.action_repeat = cfg.get_i("action_repeat");
  e.dt = cfg.get_f("dt_s");
  e.max_steps = cfg.get_l("max_steps_train");
  e.obstacle_count = cfg.get_i("obstacle_count");
  e.random_start = cfg.get_b("random_start");
  e.lidar_period_ticks = cfg.get_i("lidar_period_ticks");
  e.car_length = cfg.get_f("car_length_m");
  e.car_width = cfg.get_f("car_width_m");
  e.obstacle_gap = cfg.get_f("obstacle_gap_m");
  e.obstacle_ego_gap = cfg.get_f("obstacle_ego_gap_m");
  e.opponent_ahead = cfg.get_f("opponent_ahead_m");

  e.vehicle.wheelbase = cfg.get_f("wheelbase_m");
  e.vehicle.tau_speed = cfg.get_f("tau_v_s");
  e.vehicle.tau_steer = cfg.get_f("tau_s_s");
  e.vehicle.max_speed = cfg.get_f("max_speed_mps");
  e.vehicle.max_steer = cfg.get_f("max_steer_rad");

  e.sensors.lidar_beams = cfg.get_i("lidar_beams");
  e.sensors.lidar_range = cfg.get_f("lidar_range_m");
  e.sensors.lidar_fov = cfg.get_f("lidar_fov_deg") * M_PI / 180.0;
  e.sensors.camera_fov = cfg.get_f("camera_fov_deg") * M_PI / 180.0;
  e.sensors.image_size = cfg.get_i("image_size");
  e.sensors.local_map_extent = cfg.get_f("local_map_extent_m");

  e.follower.kp = cfg.get_f("follower_kp");
  e.follower.ki = cfg.get_f("follower_ki");
  e.follower.kd = cfg.get_f("follower_kd");
  e.follower.lookahead = cfg.get_f("follower_lookahead_m");
  e.follower.speed = cfg.get_f("follower_speed_mps");

  e.emit_local_map = cfg.get_s("variant") == "multimodal_map";
  return e;
}

double wrap_unit(double delta) {
  while (delta > 0.5) delta -= 1.0;
  while (delta <= -0.5) delta += 1.0;
  return delta;
}

double reward_single(double p_prev, double p_now, bool collided, ProgressMode mode) {
  double dp = mode == ProgressMode::paper_absolute ? std::abs(p_now - p_prev)
                                                   : wrap_unit(p_now - p_prev);
  return 100.0 * dp - (collided ? 1.0 : 0.0);
}

double reward_multi(double p_prev, double p_now, bool collided, double steer_prev,
                    double steer_now, ProgressMode mode) {
  return reward_single(p_prev, p_now, collided, mode) -
         0.1 * std::abs(steer_now - steer_prev);
}

void EpisodeLog::append(const StepResult& r, const ActionCommand& cmd) {
  rows.push_back({r.info.tick, r.info.ego.x, r.info.ego.y, r.info.ego.yaw,
                  r.info.ego.speed, cmd.steer_norm, cmd.torque_norm, r.reward,
                  r.info.progress, r.info.collision, r.done});
}

void EpisodeLog::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write episode log '" + path + "'");
  out << "tick,x,y,yaw,speed,steer_norm,torque_norm,reward,progress,collision,done\n";
  char buf[512];
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                  r.tick, r.x, r.y, r.yaw, r.speed, r.steer_norm, r.torque_norm,
                  r.reward, r.progress, r.collision ? 1 : 0, r.done ? 1 : 0);
    out << buf;
  }
}

RacingEnv::RacingEnv(std::shared_ptr<const TrackMap> map, EnvConfig cfg)
    : map_(std::move(map)), cfg_(cfg) {
  scene_.map = map_.get();
}

OrientedRect RacingEnv::footprint(const VehicleState& s) const {
  return {s.x, s.y, s.yaw, cfg_.car_length, cfg_.car_width};
}

VehicleState RacingEnv::place_random(Rng& rng, double min_clearance, bool tangent_yaw) {
  const TrackMap& m = *map_;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    int r = rng.uniform_int(0, m.height() - 1);
    int c = rng.uniform_int(0, m.width() - 1);
    Vec2 p = m.pixel_center(r, c);
    if (m.occupied(r, c) || m.clearance_at(p) < min_clearance) continue;
    VehicleState s;
    s.x = p.x;
    s.y = p.y;
    if (tangent_yaw) {
      int wp = m.nearest_waypoint(p);
      s.yaw = wrap_angle(m.waypoint_tangent(wp) + rng.uniform(-0.26, 0.26));
    } else {
      s.yaw = rng.uniform(-M_PI, M_PI);
    }
    if (!m.is_collision({s.x, s.y, s.yaw, cfg_.car_length, cfg_.car_width}, {}))
      return s;
  }
  throw PlacementError("could not place a vehicle after 1000 attempts");
}

StepResult RacingEnv::reset(uint64_t seed) {
  rng_ = Rng(seed);
  tick_ = 0;
  done_ = false;
  collision_ = false;
  total_progress_ = 0.0;
  opponent_total_progress_ = 0.0;
  prev_steer_norm_ = 0.0;
  scene_.opponents.clear();
  opponent_.reset();
  follower_.reset();

  const TrackMap& m = *map_;
  double half_diag = 0.5 * std::hypot(cfg_.car_length, cfg_.car_width);
  if (cfg_.random_start) {
    ego_ = place_random(rng_, half_diag + 0.1, true);
  } else {
    ego_ = VehicleState{};
    ego_.x = m.start_position().x;
    ego_.y = m.start_position().y;
    ego_.yaw = m.start_yaw();
    if (m.is_collision(footprint(ego_), {}))
      throw PlacementError("start pose collides with the track");
  }

  if (cfg_.mode == EnvMode::multi_static) {
    for (int i = 0; i < cfg_.obstacle_count; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        VehicleState cand = place_random(rng_, half_diag + 0.05, false);
        Vec2 cp{cand.x, cand.y};
        if ((cp - Vec2{ego_.x, ego_.y}).norm() < cfg_.obstacle_ego_gap) continue;
        bool clash = false;
        for (const OrientedRect& o : scene_.opponents)
          if ((cp - Vec2{o.cx, o.cy}).norm() < cfg_.obstacle_gap) clash = true;
        if (clash) continue;
        OrientedRect rect{cand.x, cand.y, cand.yaw, cfg_.car_length, cfg_.car_width};
        if (m.is_collision(rect, {})) continue;
        scene_.opponents.push_back(rect);
        placed = true;
      }
      if (!placed)
        throw PlacementError("could not place obstacle " + std::to_string(i) +
                             " after 1000 attempts");
    }
  } else if (cfg_.mode == EnvMode::multi_dynamic) {
    // Opponent starts opponent_ahead meters down the centerline.
    const auto& line = m.centerline();
    int idx = m.nearest_waypoint({ego_.x, ego_.y});
    double walked = 0.0;
    int n = static_cast<int>(line.size());
    while (walked < cfg_.opponent_ahead) {
      int next = (idx + 1) % n;
      walked += (line[static_cast<size_t>(next)] - line[static_cast<size_t>(idx)]).norm();
      idx = next;
    }
    VehicleState opp;
    opp.x = line[static_cast<size_t>(idx)].x;
    opp.y = line[static_cast<size_t>(idx)].y;
    opp.yaw = m.waypoint_tangent(idx);
    opponent_ = opp;
    follower_.emplace(line, cfg_.follower, cfg_.vehicle.max_speed, cfg_.dt);
    follower_->reset();
    scene_.opponents.push_back(footprint(opp));
    opponent_prev_progress_ = m.progress_at({opp.x, opp.y});
  }

  prev_progress_ = m.progress_at({ego_.x, ego_.y});
  refresh_lidar();

  StepResult result;
  result.obs = observe();
  result.reward = 0.0;
  result.done = false;
  result.info = {prev_progress_, 0.0, 0, false, ego_, tick_};
  return result;
}

void RacingEnv::refresh_lidar() {
  last_lidar_ = lidar_scan(scene_, {ego_.x, ego_.y}, ego_.yaw, cfg_.sensors);
  last_lidar_tick_ = tick_;
}

ObservationBundle RacingEnv::observe() {
  ObservationBundle obs;
  obs.lidar = last_lidar_;
  obs.lidar_tick = last_lidar_tick_;
  obs.image = render_camera(scene_, {ego_.x, ego_.y}, ego_.yaw, cfg_.sensors);
  obs.camera_tick = tick_;
  if (cfg_.emit_local_map)
    obs.local_map = local_occupancy(scene_, {ego_.x, ego_.y}, ego_.yaw,
                                    cfg_.sensors.local_map_extent,
                                    cfg_.sensors.image_size);
  return obs;
}

StepResult RacingEnv::step(const ActionCommand& raw_cmd) {
  if (done_) throw StateError("step on a finished episode; call reset first");
  ActionCommand cmd = clamp_action(raw_cmd.torque_norm, raw_cmd.steer_norm);
  const TrackMap& m = *map_;

  for (int k = 0; k < cfg_.action_repeat && !done_; ++k) {
    if (opponent_) {
      ActionCommand opp_cmd = follower_->act(*opponent_);
      *opponent_ = step_dynamics(*opponent_, opp_cmd, cfg_.dt, cfg_.vehicle);
      scene_.opponents.back() = footprint(*opponent_);
      try {
        double op = m.progress_at({opponent_->x, opponent_->y});
        opponent_total_progress_ += wrap_unit(op - opponent_prev_progress_);
        opponent_prev_progress_ = op;
      } catch (const QueryError&) {
      }
    }
    ego_ = step_dynamics(ego_, cmd, cfg_.dt, cfg_.vehicle);
    ++tick_;
    if (cfg_.lidar_period_ticks > 0 && tick_ % cfg_.lidar_period_ticks == 0)
      refresh_lidar();
    if (m.is_collision(footprint(ego_), scene_.opponents)) {
      collision_ = true;
      done_ = true;
    }
  }

  double p_now = prev_progress_;
  try {
    p_now = m.progress_at({ego_.x, ego_.y});
  } catch (const QueryError&) {
    collision_ = true;  // center left the track entirely
    done_ = true;
  }

  double reward =
      cfg_.reward_mode == RewardMode::single
          ? reward_single(prev_progress_, p_now, collision_, cfg_.progress_mode)
          : reward_multi(prev_progress_, p_now, collision_, prev_steer_norm_,
                         cmd.steer_norm, cfg_.progress_mode);

  total_progress_ += wrap_unit(p_now - prev_progress_);
  prev_progress_ = p_now;
  prev_steer_norm_ = cmd.steer_norm;
  if (tick_ >= cfg_.max_steps) done_ = true;

  StepResult result;
  result.obs = observe();
  result.reward = reward;
  result.done = done_;
  result.info = {p_now,
                 total_progress_,
                 static_cast<int>(std::floor(std::max(0.0, total_progress_))),
                 collision_,
                 ego_,
                 tick_};
  return result;
}

}  // namespace racelab
