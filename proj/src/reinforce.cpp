#include "ctret/reinforce.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace ctret {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double softplus_grad(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// softplus(s) == 1
const double kSoftplusUnitStddev = std::log(std::exp(1.0) - 1.0);

}  // namespace

const char* variant_name(ReturnVariant v) {
  return v == ReturnVariant::kDtr ? "dtr" : "rp";
}

// Offsets into the flat parameter vector.
struct PolicyLayout {
  std::size_t w1, b1, w2, b2, w3, b3, s, total;

  explicit PolicyLayout(const PolicyNetwork& net)
      : PolicyLayout(net.in_, net.h1_, net.h2_) {}

  PolicyLayout(int in, int h1, int h2) {
    w1 = 0;
    b1 = w1 + static_cast<std::size_t>(h1) * in;
    w2 = b1 + h1;
    b2 = w2 + static_cast<std::size_t>(h2) * h1;
    w3 = b2 + h2;
    b3 = w3 + h2;
    s = b3 + 1;
    total = s + 1;
  }
};

PolicyNetwork::PolicyNetwork(int input_dim, int hidden1, int hidden2,
                             StddevParam stddev_param)
    : in_(input_dim), h1_(hidden1), h2_(hidden2), stddev_param_(stddev_param) {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1) {
    throw std::invalid_argument("policy layer sizes must be positive");
  }
  params_.assign(PolicyLayout(input_dim, hidden1, hidden2).total, 0.0);
  params_.back() =
      stddev_param == StddevParam::kSoftplus ? kSoftplusUnitStddev : 1.0;
}

PolicyNetwork PolicyNetwork::initialized(Rng& rng, int input_dim, int hidden1,
                                         int hidden2, StddevParam sp) {
  PolicyNetwork net(input_dim, hidden1, hidden2, sp);
  const PolicyLayout lay(net);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden1));
  for (std::size_t i = lay.w1; i < lay.b1; ++i) net.params_[i] = rng.uniform(-s1, s1);
  for (std::size_t i = lay.w2; i < lay.b2; ++i) net.params_[i] = rng.uniform(-s2, s2);
  // mean head (w3, b3) stays zero
  return net;
}

double PolicyNetwork::stddev() const {
  const double s = params_.back();
  return stddev_param_ == StddevParam::kSoftplus ? softplus(s) : s;
}

bool PolicyNetwork::finite() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](double p) { return std::isfinite(p); });
}

PolicyNetwork::Forward PolicyNetwork::forward(std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != in_) {
    throw std::invalid_argument("observation dimension mismatch");
  }
  const PolicyLayout lay(*this);
  const double* p = params_.data();
  std::vector<double> a1(h1_), a2(h2_);
  for (int j = 0; j < h1_; ++j) {
    double z = p[lay.b1 + j];
    for (int k = 0; k < in_; ++k) z += p[lay.w1 + j * in_ + k] * obs[k];
    a1[j] = std::tanh(z);
  }
  for (int j = 0; j < h2_; ++j) {
    double z = p[lay.b2 + j];
    for (int k = 0; k < h1_; ++k) z += p[lay.w2 + j * h1_ + k] * a1[k];
    a2[j] = std::tanh(z);
  }
  double mean = p[lay.b3];
  for (int k = 0; k < h2_; ++k) mean += p[lay.w3 + k] * a2[k];
  const double sd = stddev();
  if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd)) {
    throw DivergenceFault("policy forward pass diverged");
  }
  return {mean, sd};
}

std::vector<double> PolicyNetwork::grad_log_pi(std::span<const double> obs,
                                               double action) const {
  const PolicyLayout lay(*this);
  const double* p = params_.data();

  std::vector<double> a1(h1_), a2(h2_);
  for (int j = 0; j < h1_; ++j) {
    double z = p[lay.b1 + j];
    for (int k = 0; k < in_; ++k) z += p[lay.w1 + j * in_ + k] * obs[k];
    a1[j] = std::tanh(z);
  }
  for (int j = 0; j < h2_; ++j) {
    double z = p[lay.b2 + j];
    for (int k = 0; k < h1_; ++k) z += p[lay.w2 + j * h1_ + k] * a1[k];
    a2[j] = std::tanh(z);
  }
  double mean = p[lay.b3];
  for (int k = 0; k < h2_; ++k) mean += p[lay.w3 + k] * a2[k];

  const double sd = stddev();
  const double diff = action - mean;
  const double dmean = diff / (sd * sd);

  std::vector<double> g(params_.size(), 0.0);
  g[lay.b3] = dmean;
  std::vector<double> d2(h2_);
  for (int j = 0; j < h2_; ++j) {
    g[lay.w3 + j] = dmean * a2[j];
    d2[j] = dmean * p[lay.w3 + j] * (1.0 - a2[j] * a2[j]);
  }
  std::vector<double> d1(h1_, 0.0);
  for (int j = 0; j < h2_; ++j) {
    g[lay.b2 + j] = d2[j];
    for (int k = 0; k < h1_; ++k) {
      g[lay.w2 + j * h1_ + k] = d2[j] * a1[k];
      d1[k] += d2[j] * p[lay.w2 + j * h1_ + k];
    }
  }
  for (int k = 0; k < h1_; ++k) {
    const double dk = d1[k] * (1.0 - a1[k] * a1[k]);
    g[lay.b1 + k] = dk;
    for (int m = 0; m < in_; ++m) g[lay.w1 + k * in_ + m] = dk * obs[m];
  }
  // d log pi / d stddev = ((a - mu)^2 - sd^2) / sd^3
  const double dsd = (diff * diff - sd * sd) / (sd * sd * sd);
  g[lay.s] = stddev_param_ == StddevParam::kSoftplus
                 ? dsd * softplus_grad(params_[lay.s])
                 : dsd;
  return g;
}

double PolicyNetwork::sample_action(std::span<const double> obs, Rng& rng) const {
  const Forward f = forward(obs);
  return rng.normal(f.mean, f.stddev);
}

void PolicyNetwork::save(std::ostream& out) const {
  out << "ctret-policy v1\n"
      << in_ << ' ' << h1_ << ' ' << h2_ << ' '
      << (stddev_param_ == StddevParam::kSoftplus ? "softplus" : "raw") << '\n';
  char buf[32];
  for (double p : params_) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p);
    (void)ec;
    out.write(buf, end - buf);
    out.put('\n');
  }
}

PolicyNetwork PolicyNetwork::load(std::istream& in) {
  std::string magic, version, mode;
  in >> magic >> version;
  if (magic != "ctret-policy" || version != "v1") {
    throw std::runtime_error("unrecognized policy snapshot header");
  }
  int dim_in, h1, h2;
  in >> dim_in >> h1 >> h2 >> mode;
  if (!in || (mode != "softplus" && mode != "raw")) {
    throw std::runtime_error("malformed policy snapshot header");
  }
  PolicyNetwork net(dim_in, h1, h2,
                    mode == "softplus" ? StddevParam::kSoftplus : StddevParam::kRaw);
  for (auto& p : net.params_) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("truncated policy snapshot");
    const char* b = tok.data();
    auto [ptr, ec] = std::from_chars(b, b + tok.size(), p);
    if (ec != std::errc{} || ptr != b + tok.size()) {
      throw std::runtime_error("malformed policy snapshot value");
    }
  }
  return net;
}

void agent_step(PolicyNetwork& net, TraceVector& trace, const UpdateRule& rule,
                const Transition& t) {
  if (trace.z.size() != net.param_count()) {
    throw std::invalid_argument("trace shape does not match policy parameters");
  }
  if (!(t.elapsed > 0.0)) throw std::invalid_argument("elapsed time must be > 0");

  const std::vector<double> g = net.grad_log_pi(t.obs, t.action);
  for (std::size_t i = 0; i < trace.z.size(); ++i) trace.z[i] += g[i];

  const double decay = discount_pow(rule.gamma, t.elapsed);
  // R_eff split as (alpha * pre-discount) * R * Delta keeps the RP update at
  // alpha bit-identical to the DTR update at gamma^Delta * alpha.
  const double pre = rule.variant == ReturnVariant::kRp ? decay : 1.0;
  const double scale = ((rule.step_size * pre) * t.reward) * t.elapsed;

  auto params = net.params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i] += scale * trace.z[i];
  for (double& z : trace.z) z *= decay;

  if (!net.finite()) throw DivergenceFault("policy parameters diverged");
}

std::array<double, 3> normalize_observation(const std::array<double, 3>& obs) {
  constexpr double kAngleScale = 1.306;
  constexpr double kVelocityScale = 10.0;
  return {obs[0] / kAngleScale, obs[1] / kVelocityScale, obs[2] / kAngleScale};
}

}  // namespace ctret
