#include "metricforge/rng.hpp"

#include <cmath>
#include <cstddef>

namespace metricforge {

double SplitMix64::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_double() - 1.0;
    v = 2.0 * next_double() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Eigen::VectorXd sample_in_ball(SplitMix64& gen, int dim, double radius) {
  Eigen::VectorXd dir(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) dir[i] = gen.next_gaussian();
    norm = dir.norm();
  } while (norm == 0.0);
  // radius * u^(1/dim) is the inverse-CDF radial draw; u < 1 keeps it strictly
  // inside the ball.
  const double r = radius * std::pow(gen.next_double(), 1.0 / static_cast<double>(dim));
  return dir * (r / norm);
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t basis) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t hash = basis;
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace metricforge
