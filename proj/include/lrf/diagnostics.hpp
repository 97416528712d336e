#pragma once

#include "lrf/framework.hpp"
#include "lrf/problems.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lrf {

struct MinNormResult {
  Vector point;                 // Euclidean projection of 0 onto the hull
  double norm = 0;
  std::vector<double> weights;  // convex weights over the input generators
  int major_cycles = 0;
};

/// Wolfe's minimum-norm-point algorithm over conv(generators).
/// Deterministic: ties in the linear minimization break toward the lowest
/// generator index. Tolerance is on the optimality gap <x, v> >= ||x||^2.
MinNormResult min_norm_in_hull(const GeneratorSet& generators,
                               double tol = 1e-10, int max_cycles = 1000);

/// dist(0, conv((1/N) sum_i D_{f_i}(x))) via generator enumeration, or
/// nullopt when the problem cannot enumerate its hull.
std::optional<double> stationarity_measure(const Problem& problem,
                                           const Vector& x);

enum class Verdict { Pass, Fail, Informational };
std::string to_string(Verdict v);

struct MonitorPoint {
  std::int64_t k;
  double value;
};

struct MonitorReport {
  std::string name;
  std::vector<MonitorPoint> series;  // strictly increasing step indices
  Verdict verdict = Verdict::Informational;
  double threshold = 0;
  std::string note;

  nlohmann::json to_json() const;
};

/// Windowed displacement s_k = max_{k<=j<=k+window} ||x_j - x_k||.
/// Pass when the final-decile mean is below `threshold` and below the
/// first-decile mean; informational when the run is shorter than 2*window.
MonitorReport step_displacement_monitor(const std::vector<Vector>& iterates,
                                        int window, double threshold);

/// Ratio series r_k = eta_{k+1}/eta_k. Classifies the run as diminishing
/// or bounded-below from the eta trend over the last half (heuristic,
/// noted in the report); in the diminishing branch asserts
/// max |r_k - 1| <= tol over the final decile.
MonitorReport lr_ratio_monitor(const std::vector<double>& eta_series,
                               double tol);

/// Pass when every iterate is finite and max_k ||x_k|| <= radius.
MonitorReport boundedness_monitor(const std::vector<Vector>& iterates,
                                  double radius);

/// Piecewise-linear continuous-time path through the iterates with node
/// spacing eta_k.
struct InterpolatedPath {
  std::vector<double> lambdas;  // lambda_0 = 0, strictly increasing
  std::vector<Vector> knots;

  Vector eval(double t) const;
  double total_time() const { return lambdas.back(); }
  void write_csv(std::ostream& os) const;  // columns: lambda, x_0..x_{n-1}
};

/// Requires eta_k > 0 for every recorded step and
/// iterates.size() == eta_series.size() + 1.
InterpolatedPath interpolated_process(const std::vector<double>& eta_series,
                                      const std::vector<Vector>& iterates);

}  // namespace lrf
