#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace usar {

// splitmix64 step; used to derive independent seeds for named sub-streams so
// that adding a consumer never perturbs the draws of another.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

// Distribution helpers implemented here rather than with std:: distributions:
// the standard does not pin their output streams, and reports/checkpoints must
// be reproducible from the seed alone for a given build.
inline double uniform_unit(std::mt19937_64& rng) {
  // 53-bit mantissa draw in (0,1); never 0, so it is safe under log().
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

// Uniform integer in [lo, hi] by rejection; unbiased.
inline long uniform_int(std::mt19937_64& rng, long lo, long hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<long>(draw % span);
}

// Standard normal via Box-Muller; one value per call, no caching, so the
// stream position is a pure function of the call count.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace usar
