#include "vehicle/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace racelab {

ActionCommand clamp_action(double raw_torque, double raw_steer) {
  if (std::isnan(raw_torque) || std::isnan(raw_steer))
    throw ContractError("clamp_action: NaN input");
  ActionCommand cmd;
  cmd.torque_norm = std::clamp(raw_torque, 0.005, 1.0);
  cmd.steer_norm = std::clamp(raw_steer, -1.0, 1.0);
  return cmd;
}

PhysicalTargets action_to_physical(const ActionCommand& cmd, const VehicleParams& p) {
  return {p.max_speed * cmd.torque_norm, p.max_steer * cmd.steer_norm};
}

VehicleState step_dynamics(const VehicleState& state, const ActionCommand& cmd,
                           double dt, const VehicleParams& p) {
  if (dt <= 0.0) throw ParameterError("step_dynamics: dt must be > 0");
  PhysicalTargets target = action_to_physical(cmd, p);

  VehicleState next = state;
  // Actuators first, then the pose integrates with the updated values.
  next.speed += dt / p.tau_speed * (target.speed - state.speed);
  next.steer += dt / p.tau_steer * (target.steer - state.steer);
  next.speed = std::clamp(next.speed, 0.0, p.max_speed);
  next.steer = std::clamp(next.steer, -p.max_steer, p.max_steer);

  next.x += dt * next.speed * std::cos(state.yaw);
  next.y += dt * next.speed * std::sin(state.yaw);
  next.yaw = wrap_angle(state.yaw + dt * next.speed * std::tan(next.steer) / p.wheelbase);
  return next;
}

}  // namespace racelab
