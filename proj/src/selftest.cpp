#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "ctret/harness.hpp"
#include "ctret/quadrature.hpp"

namespace ctret {

namespace {

bool check(const char* name, bool ok) {
  std::printf("%s %s\n", ok ? "[ok]  " : "[FAIL]", name);
  return ok;
}

bool proportionality(std::uint64_t base_seed) {
  Rng rng(derive_seed(base_seed, 9001, 0));
  const SignalDomain dom;
  for (int i = 0; i < 200; ++i) {
    const auto sig = PeriodicSignal::sample(rng);
    const DiscountSpec d(rng.uniform(0.05, 1.0));
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 100.0));
    const auto p = Partition::uniform(dom, n);
    const double delta = dom.length() / n;
    const double rp = rp_sum(d, sig, p);
    const double dtr = dtr_sum(d, sig, p);
    const double expect = d.factor(delta) * dtr;
    if (std::abs(rp - expect) > 1e-12 * std::max(1.0, std::abs(expect))) return false;
  }
  return true;
}

bool gamma_one_equality(std::uint64_t base_seed) {
  Rng rng(derive_seed(base_seed, 9002, 0));
  const SignalDomain dom;
  const DiscountSpec d(1.0);
  for (int i = 0; i < 100; ++i) {
    const auto sig = GaussianMixtureSignal::sample(rng);
    const auto p = Partition::stochastic(dom, 1 + i % 50, rng);
    if (rp_sum(d, sig, p) != dtr_sum(d, sig, p)) return false;
  }
  return true;
}

bool pure_discount_ordering() {
  const SignalDomain dom;
  const ConstantSignal one{1.0};
  for (double gamma : {0.5, 0.75, 0.875}) {
    const DiscountSpec d(gamma);
    const double exact = (1.0 - d.factor(dom.length())) / (-std::log(gamma));
    for (int n : {5, 10, 25, 50, 100}) {
      const auto p = Partition::uniform(dom, n);
      if (!(std::abs(rp_sum(d, one, p) - exact) <
            std::abs(dtr_sum(d, one, p) - exact))) {
        return false;
      }
    }
  }
  return true;
}

bool gradient_check(std::uint64_t base_seed) {
  Rng rng(derive_seed(base_seed, 9003, 0));
  for (int trial = 0; trial < 10; ++trial) {
    PolicyNetwork net = PolicyNetwork::initialized(rng, 3, 8, 8);
    auto params = net.params();
    for (auto& p : params) p += rng.uniform(-0.3, 0.3);
    const std::array<double, 3> obs = {rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1)};
    const double action = rng.uniform(-2.0, 2.0);
    const auto grad = net.grad_log_pi(obs, action);
    auto log_pi = [&]() {
      const auto f = net.forward(obs);
      const double z = (action - f.mean) / f.stddev;
      return -0.5 * z * z - std::log(f.stddev) - 0.5 * std::log(2.0 * M_PI);
    };
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); i += 17) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = log_pi();
      params[i] = saved - h;
      const double down = log_pi();
      params[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      if (std::abs(fd - grad[i]) / scale > 1e-4) return false;
    }
  }
  return true;
}

bool servo_sanity(std::uint64_t base_seed) {
  Rng rng(derive_seed(base_seed, 9004, 0));
  const MotorParams motor;
  SimConfig sim;
  ServoEnv env(motor, sim, {0.040});
  env.reset(rng);
  double elapsed_sum = 0.0;
  for (int i = 0; i < 5000; ++i) {
    if (!env.episode_active()) {
      if (std::abs(elapsed_sum + env.overshoot_debt() -
                   env.substeps() * sim.sim_step) > 1e-9) {
        return false;
      }
      env.reset(rng);
      elapsed_sum = 0.0;
    }
    const auto sr = env.step(rng.uniform(-1e6, 1e6), rng);
    elapsed_sum += sr.elapsed;
    if (std::abs(env.state().shaft_angle) > sim.angle_limit) return false;
  }
  // zero state, zero voltage is a fixed point
  const MotorState zero{};
  const auto next = substep(zero, 0.0, motor, sim);
  return next.motor_velocity == 0.0 && next.motor_current == 0.0 &&
         next.shaft_angle == 0.0 && next.shaft_velocity == 0.0;
}

bool quad_determinism(std::uint64_t base_seed) {
  QuadConfig cfg;
  cfg.trials = 20;
  cfg.base_seed = base_seed;
  cfg.jobs = 1;
  const auto a = run_quad_fixed(cfg);
  cfg.jobs = 2;
  const auto b = run_quad_fixed(cfg);
  std::ostringstream sa, sb;
  write_rows(sa, a.rows);
  write_rows(sb, b.rows);
  return sa.str() == sb.str();
}

}  // namespace

bool run_selftest(std::uint64_t base_seed) {
  bool ok = true;
  ok &= check("fixed-delta proportionality (rp = gamma^delta * dtr)",
              proportionality(base_seed));
  ok &= check("gamma=1 degeneracy (rp == dtr bitwise)", gamma_one_equality(base_seed));
  ok &= check("pure-discount strict ordering (rp error < dtr error)",
              pure_discount_ordering());
  ok &= check("grad log pi vs finite differences", gradient_check(base_seed));
  ok &= check("servo clamp/saturation/time accounting", servo_sanity(base_seed));
  ok &= check("quad experiment determinism across jobs", quad_determinism(base_seed));
  std::printf(ok ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return ok;
}

}  // namespace ctret
