#pragma once

#include <cstdint>
#include <Eigen/Core>

namespace metricforge {

// Deterministic 64-bit mixing generator (splitmix64). Chosen over the
// standard-library engines because <random> distributions are not
// bit-reproducible across implementations, and every stream in this project
// must replay exactly from its seed on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method; caches the spare draw.
  double next_gaussian();

  // Derive an independent child stream; `salt` separates parallel uses.
  SplitMix64 fork(std::uint64_t salt) {
    SplitMix64 g(next() ^ (0x5851f42d4c957f2dull * salt + 0x14057b7ef767814full));
    return g;
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniform draw from the open Euclidean ball of the given radius: normalized
// Gaussian direction scaled by radius * u^(1/dim). dim >= 1.
Eigen::VectorXd sample_in_ball(SplitMix64& gen, int dim, double radius);

// FNV-1a over a byte range, the hash primitive behind seeded noise.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t basis = 0xcbf29ce484222325ull);

}  // namespace metricforge
