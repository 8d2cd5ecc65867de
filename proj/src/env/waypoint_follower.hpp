#pragma once

#include <vector>

#include "common/geometry.hpp"
#include "vehicle/vehicle.hpp"

namespace racelab {

// Rule-based opponent: fixed speed, steering from a PID on the heading error
// toward a lookahead point on the centerline waypoints. Deterministic.
class WaypointFollower {
 public:
  struct Gains {
    double kp = 1.2;
    double ki = 0.0;
    double kd = 0.1;
    double lookahead = 1.5;  // m along the waypoint order
    double speed = 3.0;      // m/s
  };

  WaypointFollower(std::vector<Vec2> waypoints, Gains gains, double max_speed,
                   double dt);

  void reset();
  ActionCommand act(const VehicleState& state);

  const Gains& gains() const { return gains_; }

 private:
  std::vector<Vec2> waypoints_;
  Gains gains_;
  double max_speed_;
  double dt_;
  double prev_error_ = 0.0;
  double integral_ = 0.0;
  bool first_ = true;
};

}  // namespace racelab
