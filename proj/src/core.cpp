#include "lrf/core.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

namespace lrf {

double SeededRng::next_gaussian() {
  // u1 shifted into (0,1] so log never sees zero.
  const double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<int> fisher_yates_permutation(SeededRng& rng, int n) {
  if (n < 1) throw ContractViolation("fisher_yates_permutation: n must be >= 1");
  std::vector<int> a(static_cast<std::size_t>(n));
  std::iota(a.begin(), a.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = rng.next_below(static_cast<std::uint64_t>(i) + 1);
    std::swap(a[static_cast<std::size_t>(i)], a[j]);
  }
  return a;
}

}  // namespace lrf
