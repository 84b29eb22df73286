#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "ctret/discount.hpp"
#include "ctret/rng.hpp"

namespace ctret {

// Simulation state left the finite range (Euler blow-up or bad inputs).
struct SimulationFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dynamixel MX-28AT style DC motor constants.
struct MotorParams {
  double armature_inductance = 2.05e-3;  // H
  double armature_resistance = 8.29;     // Ohm
  double rotor_inertia = 8.67e-8;        // kg*m^2
  double rotor_friction = 8.87e-8;       // N*m*s
  double torque_constant = 0.0107;       // N*m/A
  double gear_ratio = 200.0;
  double gear_efficiency = 0.836;

  void validate() const;
};

struct MotorState {
  double motor_velocity = 0.0;  // rad/s
  double motor_current = 0.0;   // A
  double shaft_angle = 0.0;     // rad
  double shaft_velocity = 0.0;  // rad/s
  double target_angle = 0.0;    // rad

  bool finite() const {
    return std::isfinite(motor_velocity) && std::isfinite(motor_current) &&
           std::isfinite(shaft_angle) && std::isfinite(shaft_velocity) &&
           std::isfinite(target_angle);
  }
};

using StateDerivative = MotorState;

// Stochastic action-cycle model: Gaussian jitter around a target interval,
// rare long "catastrophic" intervals, hard floor.
struct IntervalNoiseModel {
  double target_mean;             // seconds
  double jitter_std = 0.010;      // seconds
  double min_interval = 0.001;    // seconds
  double catastrophe_prob = 0.01;
  double catastrophe_mean = 1.000;  // seconds
  double catastrophe_std = 0.010;   // seconds

  void validate() const;
};

struct SimConfig {
  double sim_step = 1e-4;            // seconds, Euler granularity
  double voltage_limit = 12.0;       // V, symmetric saturation
  double angle_limit = 1.306;        // rad, symmetric clamp
  double position_tolerance = 0.1;   // rad
  double velocity_tolerance = 0.1;   // rad/s
  double time_limit = 4.0;           // seconds per episode
  double gamma = 0.25;               // per-second, integral-return accounting
  bool literal_reward_sign = false;  // +|error| instead of -|error|
  bool zero_velocity_on_clamp = false;

  void validate() const;
};

struct StepResult {
  std::array<double, 3> observation;  // shaft angle, shaft velocity, target
  double reward;
  double elapsed;  // sampled target interval for this step, seconds
  bool terminated;
  bool truncated;
  double integral_return_increment;
};

// Right-hand side of the motor ODE; voltage must already be saturated.
StateDerivative dynamics_derivative(const MotorState& state, double voltage,
                                    const MotorParams& params);

// One explicit Euler step of width sim_step, then shaft-angle clamp.
MotorState substep(const MotorState& state, double voltage,
                   const MotorParams& params, const SimConfig& config);

// Draw one action-cycle interval.
double sample_interval(const IntervalNoiseModel& noise, Rng& rng);

// Servo Reacher: fine-grained Euler integration exposed at coarse,
// stochastic action-cycle times, with integral-return accounting at
// simulation resolution.
class ServoEnv {
 public:
  ServoEnv(const MotorParams& params, const SimConfig& config,
           const IntervalNoiseModel& noise);

  std::array<double, 3> reset(Rng& rng);
  StepResult step(double voltage, Rng& rng);

  bool episode_active() const { return active_; }
  const MotorState& state() const { return state_; }
  double episode_time() const { return substeps_ * config_.sim_step; }
  // sim time run beyond the accumulated interval targets, in [0, sim_step)
  double overshoot_debt() const { return episode_time() - target_clock_; }
  std::uint64_t substeps() const { return substeps_; }
  const SimConfig& config() const { return config_; }

  // test hook
  void set_state(const MotorState& s) { state_ = s; }

 private:
  double instantaneous_reward() const;

  MotorParams params_;
  SimConfig config_;
  IntervalNoiseModel noise_;
  MotorState state_;
  std::uint64_t substeps_ = 0;
  double target_clock_ = 0.0;
  double discount_ = 1.0;       // gamma^(episode time)
  double discount_step_ = 1.0;  // gamma^sim_step
  bool active_ = false;
};

}  // namespace ctret
