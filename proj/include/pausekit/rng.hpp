#pragma once

#include <cmath>
#include <cstdint>

namespace pausekit {

// Deterministic random generator used wherever the toolkit needs randomness.
// splitmix64 core with Box-Muller normals; self-contained so that seeded
// results are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in {lo, ..., hi}, inclusive. Modulo bias is irrelevant
  // at the ranges used here (word lengths, letter picks).
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // True with probability p.
  bool next_bernoulli(double p) { return next_double() < p; }

  // Standard normal, Box-Muller with a cached spare.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // guard log(0)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double next_lognormal(double log_mean, double log_sd) {
    return std::exp(log_mean + log_sd * next_normal());
  }

  // Geometric on {1, 2, ...} with the given mean (>= 1), via inversion.
  std::int64_t next_geometric(double mean) {
    if (mean <= 1.0) return 1;
    const double p = 1.0 / mean;
    double u = next_double();
    if (u <= 0.0) u = 0x1.0p-53;
    const double v = std::log(u) / std::log1p(-p);
    std::int64_t k = 1 + static_cast<std::int64_t>(v);
    return k < 1 ? 1 : k;
  }

  // Derives an independent stream from a base seed and salts.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    Rng r(seed ^ (a * 0xd1342543de82ef95ULL) ^ (b * 0xaf251af3b0f025b5ULL));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pausekit
