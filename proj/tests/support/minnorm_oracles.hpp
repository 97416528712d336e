#pragma once

// Independent oracles for the min-norm-point solver. Neither shares any
// code with the Wolfe implementation.

#include "lrf/problems.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace lrf_test {

// Minimum over every face of the simplex: for each nonempty subset solve
// the equality-constrained least-norm problem on its affine hull and keep
// solutions whose weights are nonnegative. Exact up to linear-solve
// precision.
inline double face_enumeration_min_norm(const lrf::GeneratorSet& gens) {
  const int m = static_cast<int>(gens.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> face;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) face.push_back(i);
    const int f = static_cast<int>(face.size());

    if (f == 1) {
      best = std::min(best, gens[face[0]].norm());
      continue;
    }
    lrf::Matrix kkt = lrf::Matrix::Zero(f + 1, f + 1);
    for (int a = 0; a < f; ++a)
      for (int b = 0; b < f; ++b) kkt(a, b) = gens[face[a]].dot(gens[face[b]]);
    kkt.row(f).head(f).setOnes();
    kkt.col(f).head(f).setOnes();
    lrf::Vector rhs = lrf::Vector::Zero(f + 1);
    rhs[f] = 1.0;
    const lrf::Vector sol = kkt.fullPivLu().solve(rhs);
    if ((kkt * sol - rhs).norm() > 1e-8) continue;  // inconsistent face
    bool feasible = true;
    for (int a = 0; a < f; ++a)
      if (sol[a] < -1e-9) feasible = false;
    if (!feasible) continue;
    lrf::Vector point = lrf::Vector::Zero(gens[0].size());
    for (int a = 0; a < f; ++a) point += sol[a] * gens[face[a]];
    best = std::min(best, point.norm());
  }
  return best;
}

namespace detail {

inline void grid_walk(const lrf::GeneratorSet& gens, int divisions,
                      std::size_t index, int remaining,
                      const lrf::Vector& partial, double& best) {
  if (index + 1 == gens.size()) {
    const lrf::Vector p =
        partial + (double(remaining) / divisions) * gens[index];
    best = std::min(best, p.norm());
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    grid_walk(gens, divisions, index + 1, remaining - k,
              partial + (double(k) / divisions) * gens[index], best);
  }
}

}  // namespace detail

// Dense barycentric grid over the simplex of convex weights with spacing
// 1/divisions. The returned value over-estimates the true minimum by at
// most the grid gap bound below.
inline double simplex_grid_min_norm(const lrf::GeneratorSet& gens,
                                    int divisions) {
  double best = std::numeric_limits<double>::infinity();
  detail::grid_walk(gens, divisions, 0, divisions,
                    lrf::Vector::Zero(gens[0].size()), best);
  return best;
}

// Bound on (grid value - true value): moving each weight to the nearest
// grid point perturbs the candidate by at most sum_i ||v_i|| / divisions.
inline double simplex_grid_gap_bound(const lrf::GeneratorSet& gens,
                                     int divisions) {
  double total = 0;
  for (const auto& v : gens) total += v.norm();
  return total / divisions;
}

}  // namespace lrf_test
