#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ctret/reinforce.hpp"

using namespace ctret;

namespace {

double log_pi(const PolicyNetwork& net, const std::array<double, 3>& obs,
              double action) {
  const auto f = net.forward(obs);
  const double z = (action - f.mean) / f.stddev;
  return -0.5 * z * z - std::log(f.stddev) - 0.5 * std::log(2.0 * M_PI);
}

PolicyNetwork random_net(Rng& rng, StddevParam sp = StddevParam::kSoftplus) {
  PolicyNetwork net = PolicyNetwork::initialized(rng, 3, 8, 8, sp);
  for (auto& p : net.params()) p += rng.uniform(-0.3, 0.3);
  return net;
}

}  // namespace

TEST_CASE("fresh policy is N(0, 1) for any observation") {
  PolicyNetwork net(3, 64, 64);
  for (const auto& obs : {std::array<double, 3>{0, 0, 0},
                          std::array<double, 3>{0.9, -4.0, 0.3},
                          std::array<double, 3>{-1.0, 1.0, -1.0}}) {
    const auto f = net.forward(obs);
    CHECK(f.mean == 0.0);
    CHECK(f.stddev == doctest::Approx(1.0).epsilon(1e-15));
  }
  Rng rng(3);
  const auto init = PolicyNetwork::initialized(rng);
  // mean head zero-initialized, so the mean is 0 regardless of hidden weights
  const std::array<double, 3> obs{0.4, -0.2, 0.8};
  CHECK(init.forward(obs).mean == 0.0);
  CHECK(init.forward(obs).stddev == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("forward matches a hand-rolled pass on a tiny network") {
  PolicyNetwork net(1, 1, 1, StddevParam::kRaw);
  auto p = net.params();
  // layout: w1, b1, w2, b2, w3, b3, s
  p[0] = 0.5;   // w1
  p[1] = 0.1;   // b1
  p[2] = -0.7;  // w2
  p[3] = 0.2;   // b2
  p[4] = 1.3;   // w3
  p[5] = -0.4;  // b3
  p[6] = 2.0;   // s (raw stddev)
  const double obs = 0.9;
  const double h1 = std::tanh(0.5 * obs + 0.1);
  const double h2 = std::tanh(-0.7 * h1 + 0.2);
  const double mean = 1.3 * h2 - 0.4;
  const auto f = net.forward(std::array<double, 1>{obs});
  CHECK(f.mean == doctest::Approx(mean).epsilon(1e-15));
  CHECK(f.stddev == 2.0);
}

TEST_CASE("score is zero along the mean path when action equals the mean") {
  Rng rng(5);
  auto net = random_net(rng);
  const std::array<double, 3> obs = {0.3, -0.5, 0.8};
  const auto f = net.forward(obs);
  const auto g = net.grad_log_pi(obs, f.mean);
  // every parameter except the stddev parameter has zero gradient
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("closed-form stddev gradient under the raw parameterization") {
  Rng rng(6);
  auto net = random_net(rng, StddevParam::kRaw);
  net.params().back() = 1.0;  // stddev exactly 1
  const std::array<double, 3> obs = {0.1, 0.2, -0.3};
  const auto f = net.forward(obs);
  const auto g = net.grad_log_pi(obs, f.mean);
  CHECK(g.back() == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = random_net(rng, trial % 2 ? StddevParam::kRaw : StddevParam::kSoftplus);
    const std::array<double, 3> obs = {rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1)};
    const double action = rng.uniform(-2.0, 2.0);
    const auto grad = net.grad_log_pi(obs, action);
    auto params = net.params();
    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      const double up = log_pi(net, obs, action);
      params[i] = saved - h;
      const double down = log_pi(net, obs, action);
      params[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      max_rel = std::max(max_rel, std::abs(fd - grad[i]) / scale);
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("trace recursion has the closed form sum of decayed gradients") {
  Rng rng(9);
  auto net = random_net(rng);
  TraceVector trace(net.param_count());
  const UpdateRule rule(ReturnVariant::kDtr, 1e-3, 0.5);
  const double dt = 0.25;
  const double decay = discount_pow(0.5, dt);

  std::vector<std::vector<double>> grads;
  const int steps = 4;
  for (int k = 0; k < steps; ++k) {
    const std::array<double, 3> obs = {rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1)};
    const double action = rng.uniform(-1.0, 1.0);
    grads.push_back(net.grad_log_pi(obs, action));
    // zero reward: parameters untouched, trace accumulates then decays
    agent_step(net, trace, rule, {obs, action, 0.0, dt});
  }
  for (std::size_t i = 0; i < trace.z.size(); i += 23) {
    double expect = 0.0;
    for (int k = 0; k < steps; ++k) {
      expect += std::pow(decay, steps - k) * grads[k][i];
    }
    CHECK(trace.z[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("zero reward leaves parameters unchanged") {
  Rng rng(10);
  auto net = random_net(rng);
  const std::vector<double> before(net.params().begin(), net.params().end());
  TraceVector trace(net.param_count());
  agent_step(net, trace, UpdateRule(ReturnVariant::kRp, 0.01, 0.25),
             {{0.1, 0.2, 0.3}, 0.5, 0.0, 0.08});
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(net.params()[i] == before[i]);
}

TEST_CASE("single transition from zero trace matches the hand update") {
  Rng rng(11);
  auto net = random_net(rng);
  const std::vector<double> before(net.params().begin(), net.params().end());
  const std::array<double, 3> obs = {0.2, -0.1, 0.4};
  const double action = 0.7, reward = -1.3, dt = 0.1, alpha = 1e-3, gamma = 0.25;
  const auto g = net.grad_log_pi(obs, action);

  TraceVector trace(net.param_count());
  agent_step(net, trace, UpdateRule(ReturnVariant::kRp, alpha, gamma),
             {obs, action, reward, dt});
  const double r_eff = discount_pow(gamma, dt) * reward * dt;
  for (std::size_t i = 0; i < before.size(); i += 11) {
    CHECK(net.params()[i] ==
          doctest::Approx(before[i] + alpha * r_eff * g[i]).epsilon(1e-12));
  }
}

TEST_CASE("variants coincide bit-for-bit at gamma = 1") {
  Rng r1(13), r2(13);
  auto n1 = random_net(r1);
  auto n2 = random_net(r2);
  TraceVector z1(n1.param_count()), z2(n2.param_count());
  const UpdateRule dtr(ReturnVariant::kDtr, 2e-3, 1.0);
  const UpdateRule rp(ReturnVariant::kRp, 2e-3, 1.0);
  Rng stream(14);
  for (int k = 0; k < 50; ++k) {
    const std::array<double, 3> obs = {stream.uniform(-1, 1), stream.uniform(-1, 1),
                                       stream.uniform(-1, 1)};
    const Transition t{obs, stream.uniform(-2, 2), stream.uniform(-1, 0),
                       stream.uniform(0.01, 0.2)};
    agent_step(n1, z1, dtr, t);
    agent_step(n2, z2, rp, t);
  }
  for (std::size_t i = 0; i < n1.param_count(); ++i) {
    CHECK(n1.params()[i] == n2.params()[i]);
  }
}

TEST_CASE("constant-delta RP at alpha equals DTR at gamma^delta * alpha, bitwise") {
  const double gamma = 0.25, dt = 0.120, alpha = 1e-3;
  Rng r1(15), r2(15);
  auto rp_net = random_net(r1);
  auto dtr_net = random_net(r2);
  TraceVector z1(rp_net.param_count()), z2(dtr_net.param_count());
  const UpdateRule rp(ReturnVariant::kRp, alpha, gamma);
  const UpdateRule dtr(ReturnVariant::kDtr, discount_pow(gamma, dt) * alpha, gamma);
  Rng stream(16);
  for (int k = 0; k < 100; ++k) {
    const std::array<double, 3> obs = {stream.uniform(-1, 1), stream.uniform(-1, 1),
                                       stream.uniform(-1, 1)};
    const Transition t{obs, stream.uniform(-2, 2), stream.uniform(-1, 0), dt};
    agent_step(rp_net, z1, rp, t);
    agent_step(dtr_net, z2, dtr, t);
  }
  for (std::size_t i = 0; i < rp_net.param_count(); ++i) {
    CHECK(rp_net.params()[i] == dtr_net.params()[i]);
  }
}

TEST_CASE("sample_action") {
  Rng rng(17);
  auto net = random_net(rng);
  const std::array<double, 3> obs = {0.4, 0.0, -0.6};
  SUBCASE("reproducible under a fixed seed") {
    Rng a(1), b(1);
    CHECK(net.sample_action(obs, a) == net.sample_action(obs, b));
  }
  SUBCASE("empirical mean within 3 standard errors of the network mean") {
    const auto f = net.forward(obs);
    Rng draw(19);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += net.sample_action(obs, draw);
    const double se = f.stddev / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(acc / n - f.mean) < 3.0 * se);
  }
}

TEST_CASE("divergence is faulted, not silently propagated") {
  Rng rng(21);
  auto net = random_net(rng);
  TraceVector trace(net.param_count());
  CHECK_THROWS_AS(
      agent_step(net, trace, UpdateRule(ReturnVariant::kDtr, 1e300, 0.5),
                 {{1e150, 0.0, 0.0}, 1e150, -1e10, 0.1}),
      DivergenceFault);
}

TEST_CASE("snapshot save/load round-trips exactly") {
  Rng rng(23);
  auto net = random_net(rng);
  std::stringstream buf;
  net.save(buf);
  const auto loaded = PolicyNetwork::load(buf);
  CHECK(loaded.hidden1() == net.hidden1());
  CHECK(loaded.stddev_param() == net.stddev_param());
  REQUIRE(loaded.param_count() == net.param_count());
  for (std::size_t i = 0; i < net.param_count(); ++i) {
    CHECK(loaded.params()[i] == net.params()[i]);
  }
  std::stringstream bad("ctret-policy v2\n3 8 8 softplus\n");
  CHECK_THROWS(PolicyNetwork::load(bad));
}

TEST_CASE("observation normalization uses the fixed scales") {
  const auto n = normalize_observation({1.306, -10.0, -1.306});
  CHECK(n[0] == doctest::Approx(1.0));
  CHECK(n[1] == doctest::Approx(-1.0));
  CHECK(n[2] == doctest::Approx(-1.0));
}
