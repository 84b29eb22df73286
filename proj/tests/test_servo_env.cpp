#include <doctest.h>

#include <cmath>

#include "ctret/servo_env.hpp"

using namespace ctret;

namespace {

const MotorParams kMotor{};
const SimConfig kSim{};

IntervalNoiseModel fixed_interval(double dt) {
  IntervalNoiseModel m{dt};
  m.jitter_std = 0.0;
  m.catastrophe_prob = 0.0;
  return m;
}

}  // namespace

TEST_CASE("dynamics derivative hand values") {
  SUBCASE("origin with zero voltage is stationary") {
    const auto d = dynamics_derivative(MotorState{}, 0.0, kMotor);
    CHECK(d.motor_velocity == 0.0);
    CHECK(d.motor_current == 0.0);
    CHECK(d.shaft_angle == 0.0);
    CHECK(d.shaft_velocity == 0.0);
    CHECK(d.target_angle == 0.0);
  }
  SUBCASE("full voltage from rest only drives the current") {
    const auto d = dynamics_derivative(MotorState{}, 12.0, kMotor);
    CHECK(d.motor_current == doctest::Approx(12.0 / 2.05e-3).epsilon(1e-12));
    CHECK(d.motor_current == doctest::Approx(5853.66).epsilon(1e-5));
    CHECK(d.motor_velocity == 0.0);
    CHECK(d.shaft_velocity == 0.0);
  }
  SUBCASE("friction decelerates a spinning rotor") {
    MotorState s;
    s.motor_velocity = 1.0;
    const auto d = dynamics_derivative(s, 0.0, kMotor);
    CHECK(d.motor_velocity == doctest::Approx(-8.87e-8 / 8.67e-8).epsilon(1e-12));
    CHECK(d.motor_velocity == doctest::Approx(-1.0231).epsilon(1e-4));
    CHECK(d.shaft_velocity ==
          doctest::Approx(-8.87e-8 / (8.67e-8 * 200.0 * 0.836)).epsilon(1e-12));
    CHECK(d.shaft_velocity == doctest::Approx(-0.006119).epsilon(1e-3));
  }
}

TEST_CASE("substep") {
  SUBCASE("zero state and voltage is a fixed point") {
    const auto next = substep(MotorState{}, 0.0, kMotor, kSim);
    CHECK(next.motor_velocity == 0.0);
    CHECK(next.motor_current == 0.0);
    CHECK(next.shaft_angle == 0.0);
    CHECK(next.shaft_velocity == 0.0);
  }
  SUBCASE("one Euler step from rest at 12 V") {
    const auto next = substep(MotorState{}, 12.0, kMotor, kSim);
    CHECK(next.motor_current == doctest::Approx(0.585366).epsilon(1e-5));
    CHECK(next.shaft_angle == 0.0);
    CHECK(next.motor_velocity == 0.0);
  }
  SUBCASE("angle clamp holds at the limit") {
    MotorState s;
    s.shaft_angle = 1.306;
    s.shaft_velocity = 5.0;
    const auto next = substep(s, 0.0, kMotor, kSim);
    CHECK(next.shaft_angle == 1.306);
    CHECK(next.shaft_velocity == 5.0);  // velocity untouched by default

    SimConfig zeroing = kSim;
    zeroing.zero_velocity_on_clamp = true;
    const auto stopped = substep(s, 0.0, kMotor, zeroing);
    CHECK(stopped.shaft_angle == 1.306);
    CHECK(stopped.shaft_velocity == 0.0);
  }
  SUBCASE("non-finite state faults") {
    MotorState s;
    s.motor_current = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(substep(s, 0.0, kMotor, kSim), SimulationFault);
  }
}

TEST_CASE("sample_interval") {
  SUBCASE("noise-free model returns the target exactly") {
    Rng rng(1);
    CHECK(sample_interval(fixed_interval(0.040), rng) == 0.040);
  }
  SUBCASE("hard floor at the minimum interval") {
    IntervalNoiseModel m{0.005};
    m.jitter_std = 1.0;  // force frequent large negative draws
    m.catastrophe_prob = 0.0;
    Rng rng(2);
    bool floored = false;
    for (int i = 0; i < 1000; ++i) {
      const double dt = sample_interval(m, rng);
      CHECK(dt >= 0.001);
      floored |= dt == 0.001;
    }
    CHECK(floored);
  }
  SUBCASE("mixture mean includes the catastrophe mode") {
    IntervalNoiseModel m{0.040};
    Rng rng(3);
    double acc = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) acc += sample_interval(m, rng);
    CHECK(acc / n == doctest::Approx(0.01 * 1.0 + 0.99 * 0.040).epsilon(2e-3));
  }
}

TEST_CASE("reset samples angles in range with zero velocities") {
  ServoEnv env(kMotor, kSim, fixed_interval(0.040));
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const auto obs = env.reset(rng);
    CHECK(std::abs(obs[0]) <= 1.306);
    CHECK(obs[1] == 0.0);
    CHECK(std::abs(obs[2]) <= 1.306);
    CHECK(env.state().motor_velocity == 0.0);
    CHECK(env.state().motor_current == 0.0);
  }
  Rng a(9), b(9);
  ServoEnv e1(kMotor, kSim, fixed_interval(0.040));
  ServoEnv e2(kMotor, kSim, fixed_interval(0.040));
  CHECK(e1.reset(a) == e2.reset(b));
}

TEST_CASE("step") {
  SUBCASE("already inside both tolerances terminates immediately") {
    ServoEnv env(kMotor, kSim, fixed_interval(0.040));
    Rng rng(1);
    env.reset(rng);
    MotorState s{};
    s.shaft_angle = 0.5;
    s.target_angle = 0.55;
    env.set_state(s);
    const auto sr = env.step(0.0, rng);
    CHECK(sr.terminated);
    CHECK(std::abs(sr.reward) < 0.1);
    CHECK(!env.episode_active());
    CHECK_THROWS_AS(env.step(0.0, rng), std::logic_error);
  }
  SUBCASE("zero voltage from rest leaves the shaft still") {
    ServoEnv env(kMotor, kSim, fixed_interval(0.040));
    Rng rng(2);
    env.reset(rng);
    MotorState s{};
    s.shaft_angle = -1.0;
    s.target_angle = 1.0;
    env.set_state(s);
    const auto sr = env.step(0.0, rng);
    CHECK(sr.observation[0] == -1.0);
    CHECK(sr.reward == -2.0);
    CHECK(!sr.terminated);
  }
  SUBCASE("literal reward sign flag") {
    SimConfig sim = kSim;
    sim.literal_reward_sign = true;
    ServoEnv env(kMotor, sim, fixed_interval(0.040));
    Rng rng(2);
    env.reset(rng);
    MotorState s{};
    s.shaft_angle = -1.0;
    s.target_angle = 1.0;
    env.set_state(s);
    CHECK(env.step(0.0, rng).reward == 2.0);
  }
  SUBCASE("full episodes replay bit-identically under a fixed seed") {
    IntervalNoiseModel noisy{0.040};
    ServoEnv e1(kMotor, kSim, noisy), e2(kMotor, kSim, noisy);
    Rng r1(77), r2(77);
    e1.reset(r1);
    e2.reset(r2);
    while (e1.episode_active()) {
      const auto s1 = e1.step(6.0, r1);
      const auto s2 = e2.step(6.0, r2);
      CHECK(s1.elapsed == s2.elapsed);
      CHECK(s1.reward == s2.reward);
      CHECK(s1.observation == s2.observation);
      CHECK(s1.integral_return_increment == s2.integral_return_increment);
    }
    CHECK(!e2.episode_active());
  }
  SUBCASE("truncates at the episode time limit") {
    ServoEnv env(kMotor, kSim, fixed_interval(0.040));
    Rng rng(5);
    env.reset(rng);
    MotorState s{};
    s.shaft_angle = -1.3;
    s.target_angle = 1.3;
    env.set_state(s);
    int steps = 0;
    bool truncated = false;
    while (env.episode_active() && steps < 200) {
      truncated = env.step(0.0, rng).truncated;
      ++steps;
    }
    CHECK(truncated);
    CHECK(env.episode_time() >= 4.0);
    // 4 s / 40 ms, give or take one step of endpoint rounding
    CHECK(steps >= 100);
    CHECK(steps <= 101);
  }
}

TEST_CASE("saturation bounds the effective voltage") {
  // a huge action must behave exactly like +12 V
  ServoEnv big(kMotor, kSim, fixed_interval(0.040));
  ServoEnv ref(kMotor, kSim, fixed_interval(0.040));
  Rng r1(11), r2(11);
  big.reset(r1);
  ref.reset(r2);
  const auto s1 = big.step(1e6, r1);
  const auto s2 = ref.step(12.0, r2);
  CHECK(s1.observation == s2.observation);
  CHECK(s1.reward == s2.reward);
}

TEST_CASE("time accounting: targets plus residual debt equal substep time") {
  IntervalNoiseModel noisy{0.040};
  ServoEnv env(kMotor, kSim, noisy);
  Rng rng(13);
  env.reset(rng);
  double elapsed_sum = 0.0;
  while (env.episode_active()) {
    elapsed_sum += env.step(3.0, rng).elapsed;
  }
  const double substep_time = env.substeps() * kSim.sim_step;
  CHECK(std::abs(elapsed_sum + env.overshoot_debt() - substep_time) < 1e-9);
  CHECK(env.overshoot_debt() >= 0.0);
  CHECK(env.overshoot_debt() < kSim.sim_step + 1e-12);
}

TEST_CASE("dissipation: stored energy decays under zero voltage") {
  // 0.5*J*w^2 + 0.5*L*i^2 is the dissipative quantity for this motor; it
  // decays on coarse windows even where single Euler substeps wobble.
  auto energy = [](const MotorState& s) {
    return 0.5 * kMotor.rotor_inertia * s.motor_velocity * s.motor_velocity +
           0.5 * kMotor.armature_inductance * s.motor_current * s.motor_current;
  };
  Rng rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    MotorState s{};
    s.motor_velocity = rng.uniform(-100.0, 100.0);
    s.motor_current = rng.uniform(-1.0, 1.0);
    double prev = energy(s);
    const double e0 = prev;
    for (int window = 0; window < 20; ++window) {
      for (int k = 0; k < 100; ++k) s = substep(s, 0.0, kMotor, kSim);
      const double e = energy(s);
      CHECK(e <= prev * (1.0 + 1e-9));
      prev = e;
    }
    CHECK(prev < e0);
  }
}

TEST_CASE("integral return at gamma=1 matches a straight-loop accumulation") {
  SimConfig sim = kSim;
  sim.gamma = 1.0;
  ServoEnv env(kMotor, sim, fixed_interval(0.040));
  Rng rng(23);
  const auto obs0 = env.reset(rng);

  // independent accumulation: replay the same dynamics by hand
  MotorState shadow{};
  shadow.shaft_angle = obs0[0];
  shadow.target_angle = obs0[2];
  double shadow_return = 0.0;

  double env_return = 0.0;
  while (env.episode_active()) {
    const auto sr = env.step(2.0, rng);
    env_return += sr.integral_return_increment;
  }
  const auto n = env.substeps();
  for (std::uint64_t k = 0; k < n; ++k) {
    shadow = substep(shadow, 2.0, kMotor, sim);
    shadow_return += -std::abs(shadow.shaft_angle - shadow.target_angle) * sim.sim_step;
  }
  CHECK(env_return == doctest::Approx(shadow_return).epsilon(1e-12));
}

TEST_CASE("config validation") {
  SimConfig bad = kSim;
  bad.sim_step = 0.01;  // above the 1 ms minimum interval
  CHECK_THROWS_AS(ServoEnv(kMotor, bad, fixed_interval(0.040)), std::invalid_argument);

  MotorParams badm = kMotor;
  badm.rotor_inertia = 0.0;
  CHECK_THROWS_AS(ServoEnv(badm, kSim, fixed_interval(0.040)), std::invalid_argument);

  IntervalNoiseModel badn{0.040};
  badn.catastrophe_prob = 1.5;
  CHECK_THROWS_AS(ServoEnv(kMotor, kSim, badn), std::invalid_argument);
}
