#include "ctret/servo_env.hpp"

#include <algorithm>

namespace ctret {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void MotorParams::validate() const {
  require(armature_inductance > 0.0, "armature_inductance must be > 0");
  require(armature_resistance > 0.0, "armature_resistance must be > 0");
  require(rotor_inertia > 0.0, "rotor_inertia must be > 0");
  require(rotor_friction > 0.0, "rotor_friction must be > 0");
  require(torque_constant > 0.0, "torque_constant must be > 0");
  require(gear_ratio > 0.0, "gear_ratio must be > 0");
  require(gear_efficiency > 0.0, "gear_efficiency must be > 0");
}

void IntervalNoiseModel::validate() const {
  require(target_mean > 0.0, "target_mean must be > 0");
  require(min_interval > 0.0, "min_interval must be > 0");
  require(catastrophe_prob >= 0.0 && catastrophe_prob <= 1.0,
          "catastrophe_prob must be in [0, 1]");
  require(jitter_std >= 0.0, "jitter_std must be >= 0");
  require(catastrophe_std >= 0.0, "catastrophe_std must be >= 0");
}

void SimConfig::validate() const {
  require(sim_step > 0.0, "sim_step must be > 0");
  require(voltage_limit > 0.0, "voltage_limit must be > 0");
  require(angle_limit > 0.0, "angle_limit must be > 0");
  require(position_tolerance > 0.0, "position_tolerance must be > 0");
  require(velocity_tolerance > 0.0, "velocity_tolerance must be > 0");
  require(time_limit > 0.0, "time_limit must be > 0");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
}

StateDerivative dynamics_derivative(const MotorState& state, double voltage,
                                    const MotorParams& p) {
  const double torque = -p.rotor_friction * state.motor_velocity +
                        p.torque_constant * state.motor_current;
  StateDerivative d;
  d.motor_velocity = torque / p.rotor_inertia;
  d.motor_current = (-p.torque_constant * state.motor_velocity -
                     p.armature_resistance * state.motor_current + voltage) /
                    p.armature_inductance;
  d.shaft_angle = state.shaft_velocity;
  d.shaft_velocity = torque / (p.rotor_inertia * p.gear_ratio * p.gear_efficiency);
  d.target_angle = 0.0;
  return d;
}

MotorState substep(const MotorState& state, double voltage,
                   const MotorParams& params, const SimConfig& config) {
  const StateDerivative d = dynamics_derivative(state, voltage, params);
  MotorState next = state;
  next.motor_velocity += d.motor_velocity * config.sim_step;
  next.motor_current += d.motor_current * config.sim_step;
  next.shaft_angle += d.shaft_angle * config.sim_step;
  next.shaft_velocity += d.shaft_velocity * config.sim_step;
  if (next.shaft_angle > config.angle_limit) {
    next.shaft_angle = config.angle_limit;
    if (config.zero_velocity_on_clamp) next.shaft_velocity = 0.0;
  } else if (next.shaft_angle < -config.angle_limit) {
    next.shaft_angle = -config.angle_limit;
    if (config.zero_velocity_on_clamp) next.shaft_velocity = 0.0;
  }
  if (!next.finite()) throw SimulationFault("motor state diverged");
  return next;
}

double sample_interval(const IntervalNoiseModel& noise, Rng& rng) {
  const bool catastrophe =
      noise.catastrophe_prob > 0.0 && rng.bernoulli(noise.catastrophe_prob);
  const double dt = catastrophe
                        ? rng.normal(noise.catastrophe_mean, noise.catastrophe_std)
                        : rng.normal(noise.target_mean, noise.jitter_std);
  return std::max(dt, noise.min_interval);
}

ServoEnv::ServoEnv(const MotorParams& params, const SimConfig& config,
                   const IntervalNoiseModel& noise)
    : params_(params), config_(config), noise_(noise) {
  params_.validate();
  config_.validate();
  noise_.validate();
  if (config_.sim_step > noise_.min_interval) {
    throw std::invalid_argument("sim_step must not exceed the minimum action interval");
  }
  discount_step_ = discount_pow(config_.gamma, config_.sim_step);
}

double ServoEnv::instantaneous_reward() const {
  const double err = std::abs(state_.shaft_angle - state_.target_angle);
  return config_.literal_reward_sign ? err : -err;
}

std::array<double, 3> ServoEnv::reset(Rng& rng) {
  state_ = MotorState{};
  state_.shaft_angle = rng.uniform(-config_.angle_limit, config_.angle_limit);
  state_.target_angle = rng.uniform(-config_.angle_limit, config_.angle_limit);
  substeps_ = 0;
  target_clock_ = 0.0;
  discount_ = 1.0;
  active_ = true;
  return {state_.shaft_angle, state_.shaft_velocity, state_.target_angle};
}

StepResult ServoEnv::step(double voltage, Rng& rng) {
  if (!active_) throw std::logic_error("step() called on a finished episode");
  if (!std::isfinite(voltage)) throw SimulationFault("non-finite action voltage");
  const double v = std::clamp(voltage, -config_.voltage_limit, config_.voltage_limit);

  const double target = sample_interval(noise_, rng);
  target_clock_ += target;

  // Zero-order hold: run Euler substeps until the episode clock catches the
  // accumulated interval targets. Overshoot carries over as debt implicitly.
  double increment = 0.0;
  do {
    state_ = substep(state_, v, params_, config_);
    ++substeps_;
    discount_ *= discount_step_;
    increment += discount_ * instantaneous_reward() * config_.sim_step;
  } while (substeps_ * config_.sim_step < target_clock_);

  StepResult result;
  result.observation = {state_.shaft_angle, state_.shaft_velocity, state_.target_angle};
  result.reward = instantaneous_reward();
  result.elapsed = target;
  result.integral_return_increment = increment;
  result.terminated =
      std::abs(state_.shaft_angle - state_.target_angle) < config_.position_tolerance &&
      std::abs(state_.shaft_velocity) < config_.velocity_tolerance;
  result.truncated = episode_time() >= config_.time_limit;
  active_ = !(result.terminated || result.truncated);
  return result;
}

}  // namespace ctret
