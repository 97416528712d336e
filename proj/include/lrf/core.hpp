#pragma once

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrf {

// All numerics are IEEE double precision. Iterates, subgradients and
// momentum vectors share the same dense type.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a caller violates a documented precondition.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a run produces non-finite values; the message names the step.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic pseudorandom generator (SplitMix64, Vigna 2015).
///
/// Every stochastic choice in the toolkit flows through this generator so
/// that equal seeds give bit-identical integer streams on all platforms.
/// Reference outputs for seed 0: 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
/// 0x06C45D188009454F (asserted in the unit tests).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    ++draws_;
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Unbiased integer in [0, n) via high-bits rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw ContractViolation("next_below: n must be positive");
    if (n == 1) return 0;
    const int shift = 64 - std::bit_width(n - 1);
    for (;;) {
      const std::uint64_t v = next_u64() >> shift;
      if (v < n) return v;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double next_gaussian();

  std::uint64_t seed() const { return seed_; }
  /// Number of raw 64-bit draws consumed so far (stream-position accounting).
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

/// a*x + y. Dimensions must agree.
inline Vector vec_axpy(double a, const Vector& x, const Vector& y) {
  if (x.size() != y.size())
    throw ContractViolation("vec_axpy: dimension mismatch");
  return a * x + y;
}

/// Euclidean norm.
inline double vec_norm2(const Vector& x) { return x.norm(); }

inline bool all_finite(const Vector& x) { return x.allFinite(); }

/// Uniform random permutation of {0,...,n-1} (Fisher-Yates, backward walk).
std::vector<int> fisher_yates_permutation(SeededRng& rng, int n);

}  // namespace lrf
