#include "lrf/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace lrf {

namespace {

// Minimum-norm point over the affine hull of the columns indexed by
// `active`: solve G u + lambda 1 = 0, sum u = 1 (KKT of min ||V u||^2).
Vector affine_min_norm_weights(const std::vector<Vector>& points,
                               const std::vector<int>& active) {
  const int m = static_cast<int>(active.size());
  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      kkt(a, b) = points[active[a]].dot(points[active[b]]);
  kkt.row(m).head(m).setOnes();
  kkt.col(m).head(m).setOnes();
  Vector rhs = Vector::Zero(m + 1);
  rhs[m] = 1.0;
  // FullPivLU tolerates affinely dependent corrals
  const Vector sol = kkt.fullPivLu().solve(rhs);
  return sol.head(m);
}

constexpr double kWeightZero = 1e-14;

}  // namespace

MinNormResult min_norm_in_hull(const GeneratorSet& generators, double tol,
                               int max_cycles) {
  if (generators.empty())
    throw ContractViolation("min_norm_in_hull: empty generator set");
  const auto dim = generators.front().size();
  for (const auto& v : generators) {
    if (v.size() != dim)
      throw ContractViolation("min_norm_in_hull: dimension mismatch");
    if (!all_finite(v))
      throw ContractViolation("min_norm_in_hull: non-finite generator");
  }

  // exact duplicates collapse onto their first occurrence
  std::vector<Vector> pts;
  std::vector<int> origin;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    bool dup = false;
    for (const auto& p : pts)
      if (p == generators[i]) { dup = true; break; }
    if (!dup) {
      pts.push_back(generators[i]);
      origin.push_back(static_cast<int>(i));
    }
  }

  int start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].squaredNorm() < pts[start].squaredNorm())
      start = static_cast<int>(i);

  std::vector<int> corral{start};
  std::vector<double> w{1.0};
  Vector x = pts[start];
  int major = 0;

  for (; major < max_cycles; ++major) {
    // linear minimization over all generators, lowest index wins ties
    int best = 0;
    double best_ip = x.dot(pts[0]);
    for (std::size_t j = 1; j < pts.size(); ++j) {
      const double ip = x.dot(pts[j]);
      if (ip < best_ip) {
        best_ip = ip;
        best = static_cast<int>(j);
      }
    }
    if (best_ip >= x.squaredNorm() - tol) break;  // Wolfe criterion
    if (std::find(corral.begin(), corral.end(), best) != corral.end())
      break;  // numerical stall; x is already optimal over the corral

    corral.push_back(best);
    w.push_back(0.0);

    for (;;) {
      const Vector u = affine_min_norm_weights(pts, corral);
      if (u.minCoeff() >= -kWeightZero) {
        for (std::size_t a = 0; a < corral.size(); ++a)
          w[a] = std::max(u[static_cast<Eigen::Index>(a)], 0.0);
        break;
      }
      // step to the simplex boundary along w -> u
      double theta = 1.0;
      for (std::size_t a = 0; a < corral.size(); ++a) {
        const double ua = u[static_cast<Eigen::Index>(a)];
        if (ua <= 0.0 && w[a] > ua)
          theta = std::min(theta, w[a] / (w[a] - ua));
      }
      std::vector<int> next_corral;
      std::vector<double> next_w;
      for (std::size_t a = 0; a < corral.size(); ++a) {
        const double wa =
            (1.0 - theta) * w[a] + theta * u[static_cast<Eigen::Index>(a)];
        if (wa > kWeightZero) {
          next_corral.push_back(corral[a]);
          next_w.push_back(wa);
        }
      }
      if (next_corral.empty()) {  // keep the best single point
        next_corral.push_back(corral[0]);
        next_w.push_back(1.0);
      }
      corral = std::move(next_corral);
      w = std::move(next_w);
    }

    x = Vector::Zero(dim);
    for (std::size_t a = 0; a < corral.size(); ++a) x += w[a] * pts[corral[a]];
  }

  MinNormResult result;
  result.point = x;
  result.norm = x.norm();
  result.weights.assign(generators.size(), 0.0);
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t a = 0; a < corral.size(); ++a)
    result.weights[static_cast<std::size_t>(origin[corral[a]])] = w[a] / total;
  result.major_cycles = major;
  return result;
}

std::optional<double> stationarity_measure(const Problem& problem,
                                           const Vector& x) {
  const auto generators = problem.clarke_generators(x);
  if (!generators) return std::nullopt;
  return min_norm_in_hull(*generators).norm;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Informational: return "informational";
  }
  return "?";
}

nlohmann::json MonitorReport::to_json() const {
  nlohmann::json series_json = nlohmann::json::array();
  for (const auto& p : series) series_json.push_back({p.k, p.value});
  return {{"name", name},
          {"verdict", to_string(verdict)},
          {"threshold", threshold},
          {"note", note},
          {"series", std::move(series_json)}};
}

namespace {

double mean_of(const std::vector<MonitorPoint>& pts, std::size_t begin,
               std::size_t end) {
  double s = 0;
  for (std::size_t i = begin; i < end; ++i) s += pts[i].value;
  return s / double(end - begin);
}

std::size_t decile(std::size_t n) { return std::max<std::size_t>(1, n / 10); }

}  // namespace

MonitorReport step_displacement_monitor(const std::vector<Vector>& iterates,
                                        int window, double threshold) {
  MonitorReport report;
  report.name = "step_displacement";
  report.threshold = threshold;
  if (window < 1)
    throw ContractViolation("step_displacement_monitor: window must be >= 1");

  const std::size_t steps = iterates.empty() ? 0 : iterates.size() - 1;
  if (steps < 2 * std::size_t(window)) {
    report.verdict = Verdict::Informational;
    report.note = "run shorter than two windows";
    return report;
  }
  for (std::size_t k = 0; k + window < iterates.size(); ++k) {
    double s = 0;
    for (std::size_t j = k; j <= k + std::size_t(window); ++j)
      s = std::max(s, (iterates[j] - iterates[k]).norm());
    report.series.push_back({std::int64_t(k), s});
  }

  const std::size_t n = report.series.size();
  const std::size_t d = decile(n);
  const double head = mean_of(report.series, 0, d);
  const double tail = mean_of(report.series, n - d, n);
  report.verdict =
      (tail <= threshold && tail <= head) ? Verdict::Pass : Verdict::Fail;
  char note[160];
  std::snprintf(note, sizeof note,
                "final-decile mean %.3e, first-decile mean %.3e", tail, head);
  report.note = note;
  return report;
}

MonitorReport lr_ratio_monitor(const std::vector<double>& eta_series,
                               double tol) {
  MonitorReport report;
  report.name = "lr_ratio";
  report.threshold = tol;
  const std::size_t n = eta_series.size();
  if (n < 4) {
    report.verdict = Verdict::Informational;
    report.note = "run too short";
    return report;
  }
  for (std::size_t k = 0; k + 1 < n; ++k)
    report.series.push_back({std::int64_t(k), eta_series[k + 1] / eta_series[k]});

  // branch heuristic: compare eta means at the start and end of the last
  // half of the run (finite-run surrogate of the Lemma 3.2 dichotomy)
  const std::size_t half = n / 2;
  const std::size_t d = decile(n);
  double early = 0, late = 0;
  for (std::size_t i = half; i < std::min(half + d, n); ++i) early += eta_series[i];
  early /= double(std::min(half + d, n) - half);
  for (std::size_t i = n - d; i < n; ++i) late += eta_series[i];
  late /= double(d);
  const bool diminishing = late < 0.9 * early;

  if (!diminishing) {
    report.verdict = Verdict::Informational;
    report.note = "eta appears bounded below (non-diminishing branch)";
    return report;
  }
  const std::size_t rn = report.series.size();
  const std::size_t rd = decile(rn);
  double worst = 0;
  for (std::size_t i = rn - rd; i < rn; ++i)
    worst = std::max(worst, std::abs(report.series[i].value - 1.0));
  report.verdict = worst <= tol ? Verdict::Pass : Verdict::Fail;
  char note[160];
  std::snprintf(note, sizeof note,
                "diminishing branch; final-decile max |r-1| = %.3e", worst);
  report.note = note;
  return report;
}

MonitorReport boundedness_monitor(const std::vector<Vector>& iterates,
                                  double radius) {
  MonitorReport report;
  report.name = "boundedness";
  report.threshold = radius;
  double worst = 0;
  bool finite = true;
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    const double norm = iterates[k].norm();
    finite = finite && all_finite(iterates[k]);
    worst = std::max(worst, norm);
    report.series.push_back({std::int64_t(k), norm});
  }
  report.verdict =
      (finite && worst <= radius) ? Verdict::Pass : Verdict::Fail;
  char note[160];
  std::snprintf(note, sizeof note, "max ||x_k|| = %.6e%s", worst,
                finite ? "" : " (non-finite iterates)");
  report.note = note;
  return report;
}

InterpolatedPath interpolated_process(const std::vector<double>& eta_series,
                                      const std::vector<Vector>& iterates) {
  if (iterates.size() != eta_series.size() + 1)
    throw ContractViolation(
        "interpolated_process: need one more iterate than step sizes");
  for (const double eta : eta_series)
    if (!(eta > 0))
      throw ContractViolation("interpolated_process: eta must be > 0");

  InterpolatedPath path;
  path.lambdas.resize(iterates.size());
  path.lambdas[0] = 0.0;
  for (std::size_t i = 0; i < eta_series.size(); ++i)
    path.lambdas[i + 1] = path.lambdas[i] + eta_series[i];
  path.knots = iterates;
  return path;
}

Vector InterpolatedPath::eval(double t) const {
  if (t <= 0.0) return knots.front();
  if (t >= lambdas.back()) return knots.back();
  const auto it = std::upper_bound(lambdas.begin(), lambdas.end(), t);
  const std::size_t i = std::size_t(it - lambdas.begin()) - 1;
  const double s = t - lambdas[i];
  const double eta = lambdas[i + 1] - lambdas[i];
  return knots[i] + (s / eta) * (knots[i + 1] - knots[i]);
}

void InterpolatedPath::write_csv(std::ostream& os) const {
  const auto dim = knots.front().size();
  os << "lambda";
  for (Eigen::Index j = 0; j < dim; ++j) os << ",x_" << j;
  os << "\n";
  char buf[32];
  for (std::size_t i = 0; i < knots.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", lambdas[i]);
    os << buf;
    for (Eigen::Index j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", knots[i][j]);
      os << ',' << buf;
    }
    os << "\n";
  }
}

}  // namespace lrf
