#pragma once

#include <cstdint>

namespace hduva {

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-stable across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ull);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Uniform in (0, 1].
  double uniform_pos();
  double uniform(double lo, double hi);
  // One standard normal per call (Box-Muller, cosine branch).
  double normal();
  // Gamma(shape, 1), Marsaglia-Tsang with the alpha<1 boost.
  double gamma(double shape);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Derives an independent stream, for per-worker seeding.
  Rng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t s_[4];
};

}  // namespace hduva
