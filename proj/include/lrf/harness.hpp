#pragma once

#include "lrf/diagnostics.hpp"
#include "lrf/framework.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lrf {

/// Invalid configuration; `field` names the offending entry.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_, const std::string& message)
      : std::runtime_error(message), field(std::move(field_)) {}
};

/// A monitor request with its resolved knobs.
struct MonitorSpec {
  std::string name;            // step_displacement | lr_ratio | boundedness
  double threshold = 0;        // 0 means "use the monitor default"
  int window = 0;              // step_displacement only; 0 means N
};

/// One experiment: problem + optimizer + sampler + run length.
struct RunConfig {
  nlohmann::json problem;
  nlohmann::json optimizer;
  nlohmann::json sampler;
  int epochs = 1;
  std::uint64_t seed = 0;
  std::vector<MonitorSpec> monitors;
  std::string out;  // artifact directory; empty = compute only
  int record_every = 1;
  bool strict = false;
  bool export_interpolated = false;
  std::optional<std::vector<double>> x0;

  nlohmann::json to_json() const;
};

/// Parses the top-level config document; throws ConfigError on bad fields.
RunConfig parse_run_config(const nlohmann::json& doc);

struct RunRecord {
  nlohmann::json manifest;  // fully resolved config + toolkit version
  RunData data;
  std::vector<MonitorReport> reports;
  double wall_clock_ms = 0;
  double final_f = 0;
  bool monitors_ok = true;  // no monitor reported Fail
};

/// Deterministic given (config, seed). Does not touch the filesystem.
RunRecord run_single(const RunConfig& config);

/// Writes manifest.json, trace.csv, summary.json, monitors.json (and
/// interpolated.csv when requested) under `dir`, creating it if needed.
/// Everything except the wall-clock field in summary.json is byte-stable
/// across repeated runs of the same config on one platform.
void write_run_artifacts(const RunConfig& config, const RunRecord& record,
                         const std::string& dir);

/// run_single + write_run_artifacts when config.out is set.
RunRecord execute_run(const RunConfig& config);

struct SweepGrid {
  std::vector<double> rho;
  std::vector<double> beta;
  std::vector<std::uint64_t> seeds;
};

struct SweepCell {
  double rho = 0;
  double beta = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double final_f = 0;
  std::string error;
  std::string dir;
};

struct SweepResult {
  std::vector<SweepCell> runs;        // one per (rho, beta, seed)
  nlohmann::json summary;             // per-(rho,beta) mean/std of final f
};

/// Grid sweep over the base config; cells run concurrently up to `jobs`.
/// Per-run failures are recorded and the sweep continues.
SweepResult run_sweep(const RunConfig& base, const SweepGrid& grid, int jobs,
                      const std::string& out);

struct CompareArm {
  std::string label;
  nlohmann::json optimizer;
  RunRecord record;
};

struct CompareResult {
  std::vector<CompareArm> arms;
  nlohmann::json table;  // aligned per-epoch f series
};

/// Runs one arm per optimizer block on the identical problem, sampler seed
/// and epoch permutations. Arms must differ only in the optimizer block;
/// full configs with mismatched problem or sampler blocks are rejected.
CompareResult compare_optimizers(const RunConfig& base,
                                 const std::vector<nlohmann::json>& optimizers,
                                 const std::string& out);

/// Validates that `arms` agree on everything but the optimizer block.
void check_comparable(const std::vector<RunConfig>& arms);

}  // namespace lrf
