#include "ctret/quadrature.hpp"

#include <algorithm>

namespace ctret {

Partition::Partition(std::vector<double> endpoints) : points_(std::move(endpoints)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("partition needs at least two endpoints");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw std::invalid_argument("partition endpoints must be strictly increasing");
    }
  }
}

Partition Partition::uniform(const SignalDomain& domain, int n) {
  if (n < 1) throw std::invalid_argument("uniform partition needs n >= 1");
  std::vector<double> pts(static_cast<std::size_t>(n) + 1);
  const double delta = domain.length() / n;
  for (int i = 0; i <= n; ++i) pts[i] = domain.start + i * delta;
  pts.front() = domain.start;
  pts.back() = domain.end;
  return Partition(std::move(pts));
}

Partition Partition::stochastic(const SignalDomain& domain, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("stochastic partition needs n >= 1");
  std::vector<double> pts(static_cast<std::size_t>(n) + 1);
  for (;;) {
    for (auto& p : pts) p = rng.uniform();
    std::sort(pts.begin(), pts.end());
    if (std::adjacent_find(pts.begin(), pts.end()) == pts.end()) break;
  }
  const double lo = pts.front();
  const double scale = domain.length() / (pts.back() - lo);
  for (auto& p : pts) p = domain.start + (p - lo) * scale;
  pts.front() = domain.start;
  pts.back() = domain.end;
  return Partition(std::move(pts));
}

double unscaled_discrete_return(const DiscountSpec& d, std::span<const double> rewards) {
  double acc = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    acc += weight * r;
    weight *= d.gamma;
  }
  return acc;
}

}  // namespace ctret
