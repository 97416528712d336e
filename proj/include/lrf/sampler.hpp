#pragma once

#include "lrf/core.hpp"

#include <string>
#include <vector>

namespace lrf {

enum class ScheduleKind { RandomReshuffle, Sequential, MinibatchReshuffle };

ScheduleKind schedule_kind_from_string(const std::string& s);
std::string to_string(ScheduleKind k);

/// Index-stream generator: every epoch visits each component exactly once.
///
/// random_reshuffle   fresh permutation per epoch, singleton groups
/// sequential         identity order, singleton groups
/// minibatch_reshuffle fresh permutation split into consecutive groups of
///                    `batch` indices; a short final group is kept so the
///                    epoch still covers all of {0,...,n-1}
class IndexSchedule {
 public:
  IndexSchedule(ScheduleKind kind, int n, int batch, std::uint64_t seed);

  std::vector<std::vector<int>> next_epoch();

  ScheduleKind kind() const { return kind_; }
  int components() const { return n_; }
  int batch() const { return batch_; }
  int groups_per_epoch() const;
  const SeededRng& rng() const { return rng_; }

 private:
  ScheduleKind kind_;
  int n_;
  int batch_;
  SeededRng rng_;
};

}  // namespace lrf
