#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctret/discount.hpp"
#include "ctret/rng.hpp"

namespace ctret {

// Policy parameters left the finite range during training.
struct DivergenceFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ReturnVariant { kDtr, kRp };

const char* variant_name(ReturnVariant v);

// R_eff formula, step size and per-second discount for the online update.
struct UpdateRule {
  ReturnVariant variant;
  double step_size;
  double gamma;

  UpdateRule(ReturnVariant v, double alpha, double g)
      : variant(v), step_size(alpha), gamma(g) {
    if (!(alpha > 0.0)) throw std::invalid_argument("step size must be > 0");
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  }
};

enum class StddevParam {
  kSoftplus,  // stddev = softplus(s), positive by construction
  kRaw        // stddev = s, used by the closed-form gradient test
};

// Gaussian policy: tanh MLP mean head plus a single trainable stddev scalar.
// Flat parameter layout, in order:
//   W1 (h1 x in, row-major), b1, W2 (h2 x h1), b2, W3 (1 x h2), b3, s
// Hidden weights init uniform +-1/sqrt(fan_in); mean head zero-initialized so
// the initial policy is N(0, 1) for any observation; s set so stddev == 1.
class PolicyNetwork {
 public:
  PolicyNetwork(int input_dim, int hidden1, int hidden2,
                StddevParam stddev_param = StddevParam::kSoftplus);

  static PolicyNetwork initialized(Rng& rng, int input_dim = 3, int hidden1 = 64,
                                   int hidden2 = 64,
                                   StddevParam sp = StddevParam::kSoftplus);

  struct Forward {
    double mean;
    double stddev;
  };
  Forward forward(std::span<const double> obs) const;

  // Gradient of log N(action; mean(obs), stddev^2) w.r.t. the flat
  // parameter vector, by reverse-mode accumulation through the MLP.
  std::vector<double> grad_log_pi(std::span<const double> obs, double action) const;

  double sample_action(std::span<const double> obs, Rng& rng) const;

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  double stddev() const;
  bool finite() const;

  int input_dim() const { return in_; }
  int hidden1() const { return h1_; }
  int hidden2() const { return h2_; }
  StddevParam stddev_param() const { return stddev_param_; }

  // Versioned plain-text snapshot: header with layer shapes, then one
  // parameter per line.
  void save(std::ostream& out) const;
  static PolicyNetwork load(std::istream& in);

 private:
  friend struct PolicyLayout;
  int in_, h1_, h2_;
  StddevParam stddev_param_;
  std::vector<double> params_;
};

// Eligibility trace, same shape/ordering as the flat parameter vector.
struct TraceVector {
  std::vector<double> z;

  explicit TraceVector(std::size_t n) : z(n, 0.0) {}
  void zero() { std::fill(z.begin(), z.end(), 0.0); }
};

struct Transition {
  std::array<double, 3> obs;
  double action;
  double reward;   // R_{t+1}
  double elapsed;  // Delta_{t+1}, seconds
};

// One online REINFORCE-with-traces update, in order:
//   z += grad log pi(a|s);  theta += alpha * R_eff * z;  z *= gamma^Delta
// R_eff = R * Delta (DTR) or gamma^Delta * R * Delta (RP).
void agent_step(PolicyNetwork& net, TraceVector& trace, const UpdateRule& rule,
                const Transition& t);

// Fixed scaling applied to servo observations before the policy.
std::array<double, 3> normalize_observation(const std::array<double, 3>& obs);

}  // namespace ctret
