#include "env/waypoint_follower.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace racelab {

WaypointFollower::WaypointFollower(std::vector<Vec2> waypoints, Gains gains,
                                   double max_speed, double dt)
    : waypoints_(std::move(waypoints)), gains_(gains), max_speed_(max_speed), dt_(dt) {
  if (waypoints_.size() < 2)
    throw ContractError("waypoint follower needs at least two waypoints");
}

void WaypointFollower::reset() {
  prev_error_ = 0.0;
  integral_ = 0.0;
  first_ = true;
}

ActionCommand WaypointFollower::act(const VehicleState& state) {
  // Pure-pursuit-style target: from the nearest waypoint, walk forward until
  // the lookahead arc is covered.
  int n = static_cast<int>(waypoints_.size());
  int nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  Vec2 pos{state.x, state.y};
  for (int i = 0; i < n; ++i) {
    double d = (waypoints_[static_cast<size_t>(i)] - pos).norm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  double walked = 0.0;
  int target = nearest;
  while (walked < gains_.lookahead) {
    int next = (target + 1) % n;
    walked += (waypoints_[static_cast<size_t>(next)] -
               waypoints_[static_cast<size_t>(target)]).norm();
    target = next;
    if (target == nearest) break;  // lookahead longer than the loop
  }

  Vec2 to_target = waypoints_[static_cast<size_t>(target)] - pos;
  double error = wrap_angle(std::atan2(to_target.y, to_target.x) - state.yaw);
  integral_ += error * dt_;
  double derivative = first_ ? 0.0 : (error - prev_error_) / dt_;
  first_ = false;
  prev_error_ = error;

  double steer = gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
  return clamp_action(gains_.speed / max_speed_, std::clamp(steer, -1.0, 1.0));
}

}  // namespace racelab
