#include "lrf/sampler.hpp"

#include <numeric>

namespace lrf {

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "random_reshuffle") return ScheduleKind::RandomReshuffle;
  if (s == "sequential") return ScheduleKind::Sequential;
  if (s == "minibatch_reshuffle") return ScheduleKind::MinibatchReshuffle;
  throw ContractViolation("unknown sampler kind: " + s);
}

std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::RandomReshuffle: return "random_reshuffle";
    case ScheduleKind::Sequential: return "sequential";
    case ScheduleKind::MinibatchReshuffle: return "minibatch_reshuffle";
  }
  return "?";
}

IndexSchedule::IndexSchedule(ScheduleKind kind, int n, int batch,
                             std::uint64_t seed)
    : kind_(kind), n_(n), batch_(batch), rng_(seed) {
  if (n < 1) throw ContractViolation("IndexSchedule: n must be >= 1");
  if (batch < 1) throw ContractViolation("IndexSchedule: batch must be >= 1");
  if (batch > n) throw ContractViolation("IndexSchedule: batch > n");
  if (kind != ScheduleKind::MinibatchReshuffle && batch != 1)
    throw ContractViolation("IndexSchedule: batch > 1 requires minibatch_reshuffle");
}

int IndexSchedule::groups_per_epoch() const {
  return (n_ + batch_ - 1) / batch_;
}

std::vector<std::vector<int>> IndexSchedule::next_epoch() {
  std::vector<int> order;
  if (kind_ == ScheduleKind::Sequential) {
    order.resize(static_cast<std::size_t>(n_));
    std::iota(order.begin(), order.end(), 0);
  } else {
    order = fisher_yates_permutation(rng_, n_);
  }

  std::vector<std::vector<int>> groups;
  groups.reserve(static_cast<std::size_t>(groups_per_epoch()));
  for (int start = 0; start < n_; start += batch_) {
    const int end = std::min(start + batch_, n_);
    groups.emplace_back(order.begin() + start, order.begin() + end);
  }
  return groups;
}

}  // namespace lrf
