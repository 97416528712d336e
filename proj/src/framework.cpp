#include "lrf/framework.hpp"

#include <cmath>

namespace lrf {

RuleKind rule_kind_from_string(const std::string& s) {
  if (s == "dog") return RuleKind::Dog;
  if (s == "dowg") return RuleKind::Dowg;
  if (s == "lfm") return RuleKind::Lfm;
  if (s == "constant") return RuleKind::Constant;
  throw ContractViolation("unknown rule: " + s);
}

std::string to_string(RuleKind k) {
  switch (k) {
    case RuleKind::Dog: return "dog";
    case RuleKind::Dowg: return "dowg";
    case RuleKind::Lfm: return "lfm";
    case RuleKind::Constant: return "constant";
  }
  return "?";
}

void ScalingRule::validate() const {
  if (beta < 0 || beta >= 1)
    throw ContractViolation("rule.beta: must be in [0,1)");
  if ((kind == RuleKind::Dog || kind == RuleKind::Dowg) && beta != 0)
    throw ContractViolation("rule.beta: dog/dowg require beta = 0");
  if (rho <= 0) throw ContractViolation("rule.rho: must be > 0");
  if (eps0 <= 0) throw ContractViolation("rule.eps0: must be > 0");
  if (kind == RuleKind::Constant && fixed_lr <= 0)
    throw ContractViolation("rule.fixed_lr: must be > 0");
}

ScalingRule resolved(ScalingRule rule, const Vector& x0) {
  if (rule.r_eps <= 0) rule.r_eps = 1e-6 * (1.0 + x0.norm());
  rule.validate();
  return rule;
}

OptimizerState OptimizerState::init(Vector start, const ScalingRule& rule) {
  OptimizerState s;
  s.m = Vector::Zero(start.size());
  s.x0 = start;
  s.x = std::move(start);
  s.denom = rule.eps0;
  return s;
}

ScaleEmit scaler_emit(const ScalingRule& rule, const OptimizerState& state,
                      const Vector& g) {
  const double floored = std::max(rule.r_eps, state.max_dist);
  switch (rule.kind) {
    case RuleKind::Dog:
      return {rule.rho * floored, 1.0, g.squaredNorm()};
    case RuleKind::Dowg: {
      const double mu = rule.rho * floored * floored;
      if (rule.dowg_rescale_history) {
        // denominator target: eps0 + mu_k * sum_{i<=k} ||g_i||^2
        const double target = mu * (state.sum_g_sq + g.squaredNorm());
        return {mu, mu, target - (state.denom - rule.eps0)};
      }
      return {mu, mu, mu * g.squaredNorm()};
    }
    case RuleKind::Lfm:
      return {rule.rho * floored, 1.0, state.m.squaredNorm()};
    case RuleKind::Constant:
      return {rule.fixed_lr, 0.0, 0.0};
  }
  throw ContractViolation("scaler_emit: bad rule kind");
}

double compute_learning_rate(double mu, double denom) {
  if (denom <= 0)
    throw ContractViolation("compute_learning_rate: denom must be > 0");
  return mu / std::sqrt(denom);
}

Vector update_momentum(const Vector& m, const Vector& g, double beta) {
  if (beta < 0 || beta >= 1)
    throw ContractViolation("update_momentum: beta must be in [0,1)");
  if (m.size() != g.size())
    throw ContractViolation("update_momentum: dimension mismatch");
  return beta * m + (1.0 - beta) * g;
}

StepTrace lfsgd_step(OptimizerState& state, const ScalingRule& rule,
                     const Problem& problem, std::span<const int> group,
                     const StepOptions& options) {
  if (group.empty()) throw ContractViolation("lfsgd_step: empty index group");

  StepTrace trace;
  trace.k = state.k;
  trace.group.assign(group.begin(), group.end());

  // (1) oracle
  Vector g;
  double f_comp = 0;
  if (options.deterministic_full_grad) {
    g = problem.mean_subgrad(state.x);
    f_comp = problem.full_value(state.x);
  } else {
    g = Vector::Zero(state.x.size());
    for (const int i : group) {
      g += problem.component_subgrad(i, state.x).vector;
      f_comp += problem.component_value(i, state.x);
    }
    g /= double(group.size());
    f_comp /= double(group.size());
  }

  // (2) scale, (3) accumulate, (4) learning rate
  const ScaleEmit emit = scaler_emit(rule, state, g);
  state.denom += emit.contribution;
  state.sum_g_sq += g.squaredNorm();
  const double eta = rule.kind == RuleKind::Constant
                         ? rule.fixed_lr
                         : compute_learning_rate(emit.mu, state.denom);

  // (5) momentum, (6) iterate, (7) max distance, (8) counter
  state.m = update_momentum(state.m, g, rule.beta);
  const Vector step = eta * state.m;
  state.x -= step;
  state.max_dist = std::max(state.max_dist, (state.x - state.x0).norm());
  ++state.k;

  trace.f_component = f_comp;
  trace.eta = eta;
  trace.mu = emit.mu;
  trace.denom_after = state.denom;
  trace.g_norm = g.norm();
  trace.m_norm_after = state.m.norm();
  trace.step_norm = step.norm();

  if (!all_finite(state.x) || !all_finite(state.m) || !std::isfinite(eta) ||
      !std::isfinite(state.denom))
    throw NumericError("non-finite value at step " + std::to_string(trace.k));
  return trace;
}

RunData run_epochs(OptimizerState& state, const ScalingRule& rule,
                   const Problem& problem, IndexSchedule& schedule,
                   int epochs, const RunOptions& options) {
  if (epochs < 1) throw ContractViolation("run_epochs: epochs must be >= 1");
  if (options.record_every < 1)
    throw ContractViolation("run_epochs: record_every must be >= 1");

  RunData data;
  const std::int64_t total_steps =
      std::int64_t(epochs) * schedule.groups_per_epoch();
  data.eta_series.reserve(std::size_t(total_steps));
  if (options.record_iterates) {
    data.iterates.reserve(std::size_t(total_steps) + 1);
    data.iterates.push_back(state.x);
  }

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto groups = schedule.next_epoch();
    double f_sum = 0;
    double max_step = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      StepTrace trace = lfsgd_step(state, rule, problem, groups[gi],
                                   {options.deterministic_full_grad});
      f_sum += trace.f_component;
      max_step = std::max(max_step, trace.step_norm);
      data.max_grad_plus_momentum = std::max(
          data.max_grad_plus_momentum, trace.g_norm + trace.m_norm_after);
      data.eta_series.push_back(trace.eta);
      if (options.record_iterates) data.iterates.push_back(state.x);
      if (options.on_step) options.on_step(trace, state);

      const bool epoch_end = gi + 1 == groups.size();
      if (trace.k % options.record_every == 0 || epoch_end)
        data.traces.push_back(std::move(trace));
    }
    data.epochs.push_back({epoch, f_sum / double(groups.size()),
                           problem.full_value(state.x), max_step});
  }
  data.final_f = data.epochs.back().f_full;
  return data;
}

}  // namespace lrf
