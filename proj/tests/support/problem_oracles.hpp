#pragma once

// Brute-force reference facts for the acceptance suite: the LAD median
// box, the PWNC stationary set by branch-sign enumeration, and the PWNC
// level-set radius implied by coercivity.

#include "lrf/diagnostics.hpp"
#include "lrf/problems.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lrf_test {

struct MedianBox {
  lrf::Vector lower;
  lrf::Vector upper;
  lrf::Vector midpoint;
  double value = 0;  // f on the box (constant there)
};

// Coordinate-wise minimizer set of f(x) = (1/N) sum_i ||x - a_i||_1.
// With even N the minimizers per coordinate form the interval between the
// two middle order statistics; with odd N the interval degenerates.
inline MedianBox lad_median_box(const lrf::LadProblem& lad) {
  const lrf::Matrix& anchors = lad.anchors();
  const int n = int(anchors.rows());
  const int N = int(anchors.cols());
  MedianBox box;
  box.lower.resize(n);
  box.upper.resize(n);
  box.midpoint.resize(n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> vals(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) vals[std::size_t(i)] = anchors(j, i);
    std::sort(vals.begin(), vals.end());
    if (N % 2 == 0) {
      box.lower[j] = vals[std::size_t(N / 2 - 1)];
      box.upper[j] = vals[std::size_t(N / 2)];
    } else {
      box.lower[j] = box.upper[j] = vals[std::size_t(N / 2)];
    }
    box.midpoint[j] = 0.5 * (box.lower[j] + box.upper[j]);
  }
  box.value = lad.full_value(box.midpoint);
  return box;
}

inline double dist_to_box(const lrf::Vector& x, const MedianBox& box) {
  double sq = 0;
  for (int j = 0; j < x.size(); ++j) {
    const double d = std::max({box.lower[j] - x[j], x[j] - box.upper[j], 0.0});
    sq += d * d;
  }
  return std::sqrt(sq);
}

// Stationary set of f(x) = (1/N) sum_i min(||x-c_i||^2, ||x+c_i||^2) by
// branch analysis. Off every tie hyperplane the gradient vanishes exactly
// at x_s = (1/N) sum_i s_i c_i for a sign pattern s consistent with the
// branch choices; candidates with one active tie are solved for the
// mixing weight on that component; the all-ties origin is checked through
// its generator hull.
inline std::vector<lrf::Vector> pwnc_stationary_points(
    const lrf::PiecewiseNonconvexProblem& pwnc) {
  const lrf::Matrix& c = pwnc.centers();
  const int n = int(c.rows());
  const int N = int(c.cols());
  std::vector<lrf::Vector> points;

  const auto consistent = [&](const lrf::Vector& x, unsigned mask,
                              int skip) {
    for (int i = 0; i < N; ++i) {
      if (i == skip) continue;
      const double ip = x.dot(c.col(i));
      const double s = (mask >> i) & 1 ? 1.0 : -1.0;
      if (s * ip < 0) return false;  // wrong branch would be active
    }
    return true;
  };

  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    lrf::Vector sum = lrf::Vector::Zero(n);
    for (int i = 0; i < N; ++i)
      sum += ((mask >> i) & 1 ? 1.0 : -1.0) * c.col(i);
    const lrf::Vector x = sum / N;
    if (consistent(x, mask, -1)) points.push_back(x);

    // one active tie on component t: x = (sum_{i != t} s_i c_i + theta
    // c_t)/N with <x, c_t> = 0 and theta in [-1, 1]
    for (int t = 0; t < N; ++t) {
      const double st = (mask >> t) & 1 ? 1.0 : -1.0;
      if (st < 0) continue;  // each tie pattern enumerated once
      const lrf::Vector rest = sum - c.col(t);  // signs of mask, t removed
      const double denom = c.col(t).squaredNorm();
      const double theta = -rest.dot(c.col(t)) / denom;
      if (std::abs(theta) > 1.0) continue;
      const lrf::Vector x_tie = (rest + theta * c.col(t)) / N;
      if (std::abs(x_tie.dot(c.col(t))) > 1e-12) continue;
      if (!consistent(x_tie, mask, t)) continue;
      const auto gens = pwnc.clarke_generators(x_tie);
      if (gens && lrf::min_norm_in_hull(*gens).norm <= 1e-9)
        points.push_back(x_tie);
    }
  }

  const lrf::Vector origin = lrf::Vector::Zero(n);
  const auto gens = pwnc.clarke_generators(origin);
  if (gens && lrf::min_norm_in_hull(*gens).norm <= 1e-9)
    points.push_back(origin);

  // dedupe
  std::vector<lrf::Vector> unique;
  for (const auto& p : points) {
    bool seen = false;
    for (const auto& q : unique)
      if ((p - q).norm() <= 1e-10) { seen = true; break; }
    if (!seen) unique.push_back(p);
  }
  return unique;
}

inline double dist_to_set(const lrf::Vector& x,
                          const std::vector<lrf::Vector>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : set) best = std::min(best, (x - p).norm());
  return best;
}

// Level-set radius for the stability check: with C = mean ||c_i|| and
// M = mean ||c_i||^2 we have f(x) >= ||x||^2 - 2C||x|| + M, so
// f(x) <= 4 r0 forces ||x|| <= C + sqrt(C^2 - M + 4 r0). r0 is any value
// above both f(x0) and every stationary value.
inline double pwnc_level_radius(const lrf::PiecewiseNonconvexProblem& pwnc,
                                const lrf::Vector& x0) {
  double c_mean = 0, m_mean = 0;
  for (int i = 0; i < pwnc.components(); ++i) {
    c_mean += pwnc.centers().col(i).norm();
    m_mean += pwnc.centers().col(i).squaredNorm();
  }
  c_mean /= pwnc.components();
  m_mean /= pwnc.components();

  double r0 = pwnc.full_value(x0);
  for (const auto& p : pwnc_stationary_points(pwnc))
    r0 = std::max(r0, pwnc.full_value(p));
  r0 *= 1.0 + 1e-9;  // strict inequality in the choice of r0

  const double disc = c_mean * c_mean - m_mean + 4.0 * r0;
  return c_mean + std::sqrt(std::max(disc, 0.0));
}

}  // namespace lrf_test
