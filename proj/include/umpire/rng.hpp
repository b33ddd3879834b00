#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "umpire/errors.hpp"

namespace umpire {

/**
 * Portable seeded random source.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. The floating-point transforms (53-bit uniform, Box-Muller normal,
 * CDF-inversion categorical) are implemented here instead of going through
 * std::*_distribution, because the standard does not pin down distribution
 * algorithms and we need identical streams on every platform. Emitted files
 * record generator_id() so consumers can tell how the numbers were drawn.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static const char* generator_id() { return "mt19937_64+boxmuller"; }

  // splitmix64 finalizer; decorrelates per-instance / per-trial streams
  // derived from (seed, stream_index).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw ValidationError("Rng::index: n must be positive");
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Draw from a discrete distribution by CDF inversion.
  std::size_t categorical(const std::vector<double>& probs) {
    double u = uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    if (probs.empty()) throw ValidationError("Rng::categorical: empty distribution");
    return probs.size() - 1;
  }

  // Seeded Fisher-Yates permutation of {0, .., n-1}.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[index(i)]);
    return p;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace umpire
