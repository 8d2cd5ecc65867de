#pragma once

#include "common/geometry.hpp"

namespace racelab {

// Physical limits and actuator behavior of the simulated car.
struct VehicleParams {
  double wheelbase = 0.33;    // m
  double tau_speed = 0.5;     // s, first-order lag toward the target speed
  double tau_steer = 0.1;     // s
  double max_speed = 5.0;     // m/s
  double max_steer = 0.41887902047863906;  // rad (24 degrees)
};

struct VehicleState {
  double x = 0.0, y = 0.0;  // m
  double yaw = 0.0;         // rad
  double speed = 0.0;       // m/s, >= 0
  double steer = 0.0;       // rad, current steering angle
};

// Normalized command: torque in [0.005, 1], steering in [-1, 1].
struct ActionCommand {
  double torque_norm = 0.005;
  double steer_norm = 0.0;
};

// Clamps into the action box; NaN input is a contract error.
ActionCommand clamp_action(double raw_torque, double raw_steer);

// Normalized command -> (target speed m/s, target steer rad).
// Torque maps linearly onto the speed range, steering onto +-max_steer.
struct PhysicalTargets {
  double speed;
  double steer;
};
PhysicalTargets action_to_physical(const ActionCommand& cmd, const VehicleParams& p);

// One explicit-Euler step of the kinematic bicycle: speed and steering lag
// first-order toward their targets, then the pose integrates
//   dx = v cos(yaw), dy = v sin(yaw), dyaw = v tan(steer) / wheelbase.
// Deterministic, and re-clamps every invariant after the step.
VehicleState step_dynamics(const VehicleState& state, const ActionCommand& cmd,
                           double dt, const VehicleParams& p);

}  // namespace racelab
