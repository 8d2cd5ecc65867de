#include <cmath>
#include <cstring>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "doctest.h"
#include "vehicle/vehicle.hpp"

using namespace racelab;

TEST_CASE("clamp_action enforces the action box") {
  auto a = clamp_action(0.5, 0.0);
  CHECK(a.torque_norm == 0.5);
  CHECK(a.steer_norm == 0.0);

  auto b = clamp_action(2.0, -3.0);
  CHECK(b.torque_norm == 1.0);
  CHECK(b.steer_norm == -1.0);

  auto c = clamp_action(0.0, 0.0);
  CHECK(c.torque_norm == 0.005);
  CHECK(c.steer_norm == 0.0);

  CHECK_THROWS_AS(clamp_action(std::nan(""), 0.0), ContractError);
}

TEST_CASE("action_to_physical maps linearly onto the physical ranges") {
  VehicleParams p;
  auto full = action_to_physical({1.0, 1.0}, p);
  CHECK(full.speed == doctest::Approx(5.0));
  CHECK(full.steer == doctest::Approx(0.4189).epsilon(1e-3));

  auto crawl = action_to_physical({0.005, -1.0}, p);
  CHECK(crawl.speed == doctest::Approx(0.025));
  CHECK(crawl.steer == doctest::Approx(-0.4189).epsilon(1e-3));

  auto half = action_to_physical({0.5, 0.0}, p);
  CHECK(half.speed == doctest::Approx(2.5));
  CHECK(half.steer == 0.0);
}

TEST_CASE("step_dynamics: straight line at steady speed") {
  VehicleParams p;
  VehicleState s;
  s.speed = 1.0;
  ActionCommand cmd{1.0 / p.max_speed, 0.0};  // target speed equals current
  VehicleState out = step_dynamics(s, cmd, 1.0, p);
  CHECK(out.x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out.y == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(out.yaw == 0.0);
}

TEST_CASE("step_dynamics: constant steering follows the closed-form circle") {
  VehicleParams p;
  const double v = 2.0, phi = 0.2;
  const double radius = p.wheelbase / std::tan(phi);
  const double omega = v * std::tan(phi) / p.wheelbase;
  const double quarter = (M_PI / 2) / omega;
  const double dt = 0.01;

  VehicleState s;
  s.speed = v;
  s.steer = phi;
  ActionCommand cmd{v / p.max_speed, phi / p.max_steer};
  int steps = static_cast<int>(std::lround(quarter / dt));
  for (int i = 0; i < steps; ++i) s = step_dynamics(s, cmd, dt, p);

  // Quarter turn from the origin facing +x ends at (R, R).
  CHECK(std::abs(s.x - radius) / radius < 0.01);
  CHECK(std::abs(s.y - radius) / radius < 0.01);
}

TEST_CASE("step_dynamics: minimum torque keeps the car nearly stopped") {
  VehicleParams p;
  VehicleState s;
  ActionCommand cmd{0.005, 0.0};
  for (int i = 0; i < 1000; ++i) s = step_dynamics(s, cmd, 0.01, p);
  CHECK(s.speed <= 0.025 + 1e-12);
  CHECK(s.speed > 0.0);
}

TEST_CASE("step_dynamics: determinism and bound preservation") {
  VehicleParams p;
  Rng rng(101);
  VehicleState a, b;
  for (int i = 0; i < 500; ++i) {
    ActionCommand cmd = clamp_action(rng.uniform(-1, 2), rng.uniform(-2, 2));
    a = step_dynamics(a, cmd, 0.01, p);
    CHECK(a.speed >= 0.0);
    CHECK(a.speed <= p.max_speed);
    CHECK(std::abs(a.steer) <= p.max_steer);
  }
  Rng rng2(101);
  for (int i = 0; i < 500; ++i) {
    ActionCommand cmd = clamp_action(rng2.uniform(-1, 2), rng2.uniform(-2, 2));
    b = step_dynamics(b, cmd, 0.01, p);
  }
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("step_dynamics converges at first order in dt") {
  VehicleParams p;
  auto simulate = [&](double dt, double total) {
    VehicleState s;
    s.speed = 2.0;
    ActionCommand cmd{0.6, 0.5};
    int steps = static_cast<int>(std::lround(total / dt));
    for (int i = 0; i < steps; ++i) s = step_dynamics(s, cmd, dt, p);
    return s;
  };
  VehicleState ref = simulate(0.02 / 64, 2.0);
  VehicleState coarse = simulate(0.02, 2.0);
  VehicleState fine = simulate(0.01, 2.0);
  double err_coarse = std::hypot(coarse.x - ref.x, coarse.y - ref.y);
  double err_fine = std::hypot(fine.x - ref.x, fine.y - ref.y);
  double ratio = err_coarse / err_fine;
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}
