#pragma once

#include "lrf/problems.hpp"
#include "lrf/sampler.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lrf {

enum class RuleKind { Dog, Dowg, Lfm, Constant };

RuleKind rule_kind_from_string(const std::string& s);
std::string to_string(RuleKind k);

/// Scaling rule: provides the numerator mu_k, the weight tau_k and the
/// per-step denominator contribution of the adaptive learning rate
///
///   eta_k = mu_k / sqrt(eps0 + sum of accumulated contributions).
///
/// dog   mu = rho * max(r_eps, max_dist), contribution ||g_k||^2
/// dowg  mu = rho * max(r_eps, max_dist)^2, contribution mu * ||g_k||^2
/// lfm   mu = rho * max(r_eps, max_dist), contribution ||m_k||^2
///       (pre-update momentum)
/// constant  eta fixed at fixed_lr, no accumulation
///
/// dog and dowg require beta = 0; lfm accepts beta in [0,1).
struct ScalingRule {
  RuleKind kind = RuleKind::Dog;
  double rho = 1.0;
  double beta = 0.9;
  double eps0 = 1e-8;
  double r_eps = 0.0;  // <= 0 means "resolve from x0" (see resolved())
  double fixed_lr = 0.1;
  // Alternative reading of the DoWG accumulator: rescale the whole
  // gradient-norm history by the current mu each step instead of weighting
  // each gradient by the mu at its own step. Off by default.
  bool dowg_rescale_history = false;

  void validate() const;
};

/// Copies `rule` and fills the default movement floor
/// r_eps = 1e-6 * (1 + ||x0||) when unset. The floor keeps mu_0 positive;
/// the bare max-distance numerator is 0 at k = 0, which would freeze the
/// iterate forever.
ScalingRule resolved(ScalingRule rule, const Vector& x0);

/// Mutable per-run state of the stepper.
struct OptimizerState {
  Vector x;          // iterate x_k
  Vector m;          // momentum m_k (m_0 = 0)
  Vector x0;         // start point, for the max-distance numerator
  double denom = 0;  // eps0 + accumulated contributions, non-decreasing
  double max_dist = 0;   // max_{i<=k} ||x_i - x0||, non-decreasing
  double sum_g_sq = 0;   // sum of ||g_i||^2 (dowg history-rescale mode)
  std::int64_t k = 0;

  static OptimizerState init(Vector start, const ScalingRule& rule);
};

struct ScaleEmit {
  double mu;
  double tau;
  double contribution;
};

/// Evaluates the scaling rule at the current state; pure.
ScaleEmit scaler_emit(const ScalingRule& rule, const OptimizerState& state,
                      const Vector& g);

/// mu / sqrt(denom). The denominator already includes eps0.
double compute_learning_rate(double mu, double denom);

/// beta * m + (1 - beta) * g.
Vector update_momentum(const Vector& m, const Vector& g, double beta);

/// Everything recorded about one step.
struct StepTrace {
  std::int64_t k = 0;
  std::vector<int> group;  // component indices consumed this step
  double f_component = 0;  // mean component value at the pre-step iterate
  double eta = 0;
  double mu = 0;
  double denom_after = 0;
  double g_norm = 0;
  double m_norm_after = 0;
  double step_norm = 0;
};

struct StepOptions {
  // Deterministic mode: g_k is the full mean subgradient instead of the
  // sampled component's.
  bool deterministic_full_grad = false;
};

/// One step of the framework, in this order: oracle, scale, accumulate,
/// learning rate, momentum, iterate, max-distance, counter. Groups of
/// size > 1 average the component subgradients (mini-batch mode).
/// Throws NumericError naming the step when a non-finite value appears.
StepTrace lfsgd_step(OptimizerState& state, const ScalingRule& rule,
                     const Problem& problem, std::span<const int> group,
                     const StepOptions& options = {});

struct EpochSummary {
  int epoch = 0;
  double mean_f_component = 0;  // mean of per-step component values
  double f_full = 0;            // full objective at the epoch-end iterate
  double max_step_norm = 0;
};

struct RunData {
  std::vector<StepTrace> traces;       // possibly subsampled
  std::vector<Vector> iterates;        // x_0..x_K when recorded
  std::vector<double> eta_series;      // always complete
  std::vector<EpochSummary> epochs;
  double max_grad_plus_momentum = 0;   // max_k (||g_k|| + ||m_k||)
  double final_f = 0;
};

struct RunOptions {
  bool record_iterates = true;
  int record_every = 1;  // keep every s-th step trace; epoch rows always kept
  bool deterministic_full_grad = false;
  std::function<void(const StepTrace&, const OptimizerState&)> on_step;
};

/// Runs `epochs` epochs driven by the schedule, carrying state across
/// epoch boundaries unchanged.
RunData run_epochs(OptimizerState& state, const ScalingRule& rule,
                   const Problem& problem, IndexSchedule& schedule,
                   int epochs, const RunOptions& options = {});

}  // namespace lrf
