#include "ctret/signals.hpp"

#include <charconv>
#include <numbers>

namespace ctret {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(" ");
  out.append(buf, p);
  return out;
}

}  // namespace

const std::array<double, PeriodicSignal::kTerms>& PeriodicSignal::frequency_ladder() {
  static const std::array<double, kTerms> ladder = {
      kTwoPi / 4.0, kTwoPi / 2.0, kTwoPi, 2.0 * kTwoPi, 4.0 * kTwoPi, 8.0 * kTwoPi};
  return ladder;
}

PeriodicSignal::PeriodicSignal(const std::array<SineTerm, kTerms>& terms)
    : terms_(terms) {
  const auto& ladder = frequency_ladder();
  for (std::size_t i = 0; i < kTerms; ++i) {
    if (terms_[i].angular_frequency != ladder[i]) {
      throw std::invalid_argument("periodic signal frequencies must match the fixed ladder");
    }
    if (!(terms_[i].phase >= 0.0 && terms_[i].phase < kTwoPi)) {
      throw std::invalid_argument("periodic signal phase must lie in [0, 2*pi)");
    }
  }
}

PeriodicSignal PeriodicSignal::sample(Rng& rng) {
  const auto& ladder = frequency_ladder();
  std::array<SineTerm, kTerms> terms{};
  for (std::size_t i = 0; i < kTerms; ++i) {
    terms[i].amplitude = rng.normal();
    terms[i].angular_frequency = ladder[i];
    terms[i].phase = rng.uniform(0.0, kTwoPi);
  }
  return PeriodicSignal(terms);
}

GaussianMixtureSignal::GaussianMixtureSignal(
    const std::array<GaussianComponent, kComponents>& components, bool normalized)
    : components_(components), normalized_(normalized) {
  for (const auto& c : components_) {
    if (!(c.mean >= 0.0 && c.mean <= 3.0)) {
      throw std::invalid_argument("gaussian component mean must lie in [0, 3]");
    }
    if (!(c.stddev > 0.0 && c.stddev <= 1.5)) {
      throw std::invalid_argument("gaussian component stddev must lie in (0, 3/2]");
    }
  }
}

GaussianMixtureSignal GaussianMixtureSignal::sample(Rng& rng) {
  std::array<GaussianComponent, kComponents> comps{};
  for (auto& c : comps) {
    c.mean = rng.uniform(0.0, 3.0);
    do {
      c.stddev = rng.uniform(0.0, 1.5);
    } while (c.stddev == 0.0);
  }
  return GaussianMixtureSignal(comps);
}

std::string to_record(const PeriodicSignal& s) {
  std::string out = "periodic";
  for (const auto& t : s.terms()) {
    append_double(out, t.amplitude);
    append_double(out, t.angular_frequency);
    append_double(out, t.phase);
  }
  return out;
}

std::string to_record(const GaussianMixtureSignal& s) {
  std::string out = s.normalized() ? "gaussian_mixture_density" : "gaussian_mixture";
  for (const auto& c : s.components()) {
    append_double(out, c.mean);
    append_double(out, c.stddev);
  }
  return out;
}

}  // namespace ctret
