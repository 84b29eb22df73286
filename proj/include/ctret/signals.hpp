#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "ctret/rng.hpp"

namespace ctret {

// Anything evaluable at a point in time.
template <class S>
concept SignalLike = requires(const S s, double tau) {
  { s.eval(tau) } -> std::convertible_to<double>;
};

struct SignalDomain {
  double start = 0.0;
  double end = 3.0;

  SignalDomain() = default;
  SignalDomain(double t, double big_t) : start(t), end(big_t) {
    if (!(end > start)) throw std::invalid_argument("signal domain requires end > start");
  }
  double length() const { return end - start; }
};

struct ConstantSignal {
  double value = 1.0;
  double eval(double) const { return value; }
};

struct SineTerm {
  double amplitude;
  double angular_frequency;  // rad/s
  double phase;              // rad, in [0, 2*pi)
};

// Sum of 6 sinusoids on a fixed frequency ladder.
class PeriodicSignal {
 public:
  static constexpr std::size_t kTerms = 6;

  static const std::array<double, kTerms>& frequency_ladder();

  explicit PeriodicSignal(const std::array<SineTerm, kTerms>& terms);

  // Amplitudes ~ N(0,1), phases ~ U[0, 2*pi), frequencies fixed.
  static PeriodicSignal sample(Rng& rng);

  double eval(double tau) const {
    double acc = 0.0;
    for (const auto& t : terms_) {
      acc += t.amplitude * std::sin(t.angular_frequency * tau + t.phase);
    }
    return acc;
  }

  const std::array<SineTerm, kTerms>& terms() const { return terms_; }

 private:
  std::array<SineTerm, kTerms> terms_;
};

struct GaussianComponent {
  double mean;    // seconds
  double stddev;  // seconds, > 0
};

// Sum of 6 Gaussian densities. `normalized` selects density vs unit-amplitude
// bumps; density is the default.
class GaussianMixtureSignal {
 public:
  static constexpr std::size_t kComponents = 6;

  // Unit-amplitude bumps by default; `normalized` switches to density form
  // (peak 1/(sigma sqrt(2 pi))).
  explicit GaussianMixtureSignal(
      const std::array<GaussianComponent, kComponents>& components,
      bool normalized = false);

  // means ~ U[0,3), stddevs ~ U(0, 3/2); zero-stddev draws resampled.
  static GaussianMixtureSignal sample(Rng& rng);

  double eval(double tau) const {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    double acc = 0.0;
    for (const auto& c : components_) {
      const double z = (tau - c.mean) / c.stddev;
      const double bump = std::exp(-0.5 * z * z);
      acc += normalized_ ? bump * inv_sqrt_2pi / c.stddev : bump;
    }
    return acc;
  }

  const std::array<GaussianComponent, kComponents>& components() const {
    return components_;
  }
  bool normalized() const { return normalized_; }

 private:
  std::array<GaussianComponent, kComponents> components_;
  bool normalized_;
};

template <SignalLike L, SignalLike R>
class ProductSignal {
 public:
  ProductSignal(L left, R right) : left_(std::move(left)), right_(std::move(right)) {}
  double eval(double tau) const { return left_.eval(tau) * right_.eval(tau); }
  const L& left() const { return left_; }
  const R& right() const { return right_; }

 private:
  L left_;
  R right_;
};

template <class L, class R>
ProductSignal(L, R) -> ProductSignal<L, R>;

// One-line text records of sampled coefficients, for reproducibility audits.
std::string to_record(const PeriodicSignal& s);
std::string to_record(const GaussianMixtureSignal& s);

}  // namespace ctret
