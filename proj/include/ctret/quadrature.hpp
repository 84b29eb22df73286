#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctret/discount.hpp"
#include "ctret/rng.hpp"
#include "ctret/signals.hpp"

namespace ctret {

// Strictly increasing interval endpoints spanning a signal domain.
class Partition {
 public:
  explicit Partition(std::vector<double> endpoints);

  // n equal intervals over the domain.
  static Partition uniform(const SignalDomain& domain, int n);

  // n+1 uniform draws, sorted and affinely rescaled so min -> start and
  // max -> end. Duplicate draws resample the whole set.
  static Partition stochastic(const SignalDomain& domain, int n, Rng& rng);

  std::size_t intervals() const { return points_.size() - 1; }
  double point(std::size_t i) const { return points_[i]; }
  double width(std::size_t i) const { return points_[i + 1] - points_[i]; }
  std::span<const double> points() const { return points_; }

 private:
  std::vector<double> points_;
};

struct ApproximationResult {
  double value;
  double reference;
  double abs_error;
};

inline ApproximationResult make_result(double value, double reference) {
  return {value, reference, std::abs(value - reference)};
}

// Generalized mixed sum: integrand factor f at left endpoints, g at right
// endpoints. This is the shape a discrete-time algorithm implicitly commits
// to on a discretized continuous-time task.
template <SignalLike F, SignalLike G>
double generalized_dtr_sum(const F& f, const G& g, const Partition& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.intervals(); ++i) {
    acc += f.eval(p.point(i)) * g.eval(p.point(i + 1)) * p.width(i);
  }
  return acc;
}

// Generalized right-point Riemann sum: both factors at right endpoints.
template <SignalLike F, SignalLike G>
double generalized_rp_sum(const F& f, const G& g, const Partition& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.intervals(); ++i) {
    acc += f.eval(p.point(i + 1)) * g.eval(p.point(i + 1)) * p.width(i);
  }
  return acc;
}

// Delta-scaled discrete-time return: left-point discount, right-point reward.
template <SignalLike G>
double dtr_sum(const DiscountSpec& d, const G& g, const Partition& p) {
  const double origin = p.point(0);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.intervals(); ++i) {
    acc += d.factor(p.point(i) - origin) * g.eval(p.point(i + 1)) * p.width(i);
  }
  return acc;
}

// Right-point return: discount and reward both at right endpoints.
template <SignalLike G>
double rp_sum(const DiscountSpec& d, const G& g, const Partition& p) {
  const double origin = p.point(0);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.intervals(); ++i) {
    acc += d.factor(p.point(i + 1) - origin) * g.eval(p.point(i + 1)) * p.width(i);
  }
  return acc;
}

inline constexpr int kReferenceIntervals = 10000;

// Fine-grained mid-point Riemann sum used as integration ground truth.
// Kahan-compensated so the reference is trustworthy to ~1e-10.
template <SignalLike F, SignalLike G>
double midpoint_reference(const F& f, const G& g, const SignalDomain& domain,
                          int n = kReferenceIntervals) {
  if (n < 1) throw std::invalid_argument("midpoint reference needs n >= 1");
  const double delta = domain.length() / n;
  double acc = 0.0, comp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = domain.start + (i + 0.5) * delta;
    const double term = f.eval(m) * g.eval(m);
    const double y = term - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc * delta;
}

// Exponential-discount factor viewed as a signal, anchored at `origin`.
struct DiscountSignal {
  DiscountSpec discount;
  double origin;
  double eval(double tau) const { return discount.factor(tau - origin); }
};

template <SignalLike G>
double midpoint_reference(const DiscountSpec& d, const G& g,
                          const SignalDomain& domain, int n = kReferenceIntervals) {
  return midpoint_reference(DiscountSignal{d, domain.start}, g, domain, n);
}

// Unscaled discrete return (all widths treated as 1, no Delta scaling).
// Degenerate form kept for unit tests only; experiments use the scaled sums.
double unscaled_discrete_return(const DiscountSpec& d, std::span<const double> rewards);

}  // namespace ctret
