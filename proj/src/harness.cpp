#include "lrf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace lrf {

namespace {

constexpr const char* kToolkitVersion = "0.1.0";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T json_field(const nlohmann::json& j, const std::string& scope,
             const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(scope + "." + key, "wrong type for " + scope + "." + key);
  }
}

void check_known_keys(const nlohmann::json& block, const std::string& scope,
                      std::initializer_list<const char*> known) {
  if (!block.is_object())
    throw ConfigError(scope, scope + " must be an object");
  for (const auto& [key, value] : block.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(scope + "." + key, "unknown field");
  }
}

struct ResolvedOptimizer {
  ScalingRule rule;
  int batch = 1;
  bool dlfgd = false;
};

ResolvedOptimizer parse_optimizer(const nlohmann::json& block) {
  check_known_keys(block, "optimizer",
                   {"rule", "rho", "beta", "eps0", "r_eps", "fixed_lr",
                    "batch", "dlfgd", "dowg_rescale_history"});
  ResolvedOptimizer opt;
  const std::string rule_name =
      json_field<std::string>(block, "optimizer", "rule", "lfm");
  try {
    opt.rule.kind = rule_kind_from_string(rule_name);
  } catch (const ContractViolation& e) {
    throw ConfigError("optimizer.rule", e.what());
  }
  opt.rule.rho = json_field(block, "optimizer", "rho", 1.0);
  const double default_beta =
      (opt.rule.kind == RuleKind::Dog || opt.rule.kind == RuleKind::Dowg)
          ? 0.0
          : 0.9;
  opt.rule.beta = json_field(block, "optimizer", "beta", default_beta);
  opt.rule.eps0 = json_field(block, "optimizer", "eps0", 1e-8);
  opt.rule.r_eps = json_field(block, "optimizer", "r_eps", 0.0);
  opt.rule.fixed_lr = json_field(block, "optimizer", "fixed_lr", 0.1);
  opt.rule.dowg_rescale_history =
      json_field(block, "optimizer", "dowg_rescale_history", false);
  opt.batch = json_field(block, "optimizer", "batch", 1);
  opt.dlfgd = json_field(block, "optimizer", "dlfgd", false);
  if (opt.batch < 1) throw ConfigError("optimizer.batch", "batch must be >= 1");
  return opt;
}

MonitorSpec parse_monitor(const nlohmann::json& entry) {
  MonitorSpec spec;
  if (entry.is_string()) {
    spec.name = entry.get<std::string>();
  } else if (entry.is_object()) {
    spec.name = json_field<std::string>(entry, "monitors", "name", "");
    spec.threshold = json_field(entry, "monitors", "threshold", 0.0);
    spec.window = json_field(entry, "monitors", "window", 0);
  } else {
    throw ConfigError("monitors", "monitor entries are names or objects");
  }
  if (spec.name != "step_displacement" && spec.name != "lr_ratio" &&
      spec.name != "boundedness")
    throw ConfigError("monitors", "unknown monitor '" + spec.name + "'");
  return spec;
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "config must be an object");
  for (const auto& [key, value] : doc.items()) {
    static constexpr const char* known[] = {
        "problem", "optimizer", "sampler",      "epochs",
        "seed",    "monitors",  "out",          "record_every",
        "strict",  "export_interpolated", "x0"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(key, "unknown top-level field");
  }
  RunConfig cfg;
  if (!doc.contains("problem"))
    throw ConfigError("problem", "missing problem block");
  cfg.problem = doc.at("problem");
  cfg.optimizer = doc.value("optimizer", nlohmann::json::object());
  cfg.sampler = doc.value("sampler", nlohmann::json::object());
  cfg.epochs = json_field(doc, "config", "epochs", 1);
  if (cfg.epochs < 1) throw ConfigError("epochs", "epochs must be >= 1");
  cfg.seed = json_field<std::uint64_t>(doc, "config", "seed", 0);
  cfg.out = json_field<std::string>(doc, "config", "out", "");
  cfg.record_every = json_field(doc, "config", "record_every", 1);
  if (cfg.record_every < 1)
    throw ConfigError("record_every", "record_every must be >= 1");
  cfg.strict = json_field(doc, "config", "strict", false);
  cfg.export_interpolated =
      json_field(doc, "config", "export_interpolated", false);
  if (doc.contains("monitors")) {
    if (!doc.at("monitors").is_array())
      throw ConfigError("monitors", "monitors must be an array");
    for (const auto& entry : doc.at("monitors"))
      cfg.monitors.push_back(parse_monitor(entry));
  }
  if (doc.contains("x0")) {
    try {
      cfg.x0 = doc.at("x0").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("x0", "x0 must be an array of numbers");
    }
  }
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json monitors_json = nlohmann::json::array();
  for (const auto& m : monitors)
    monitors_json.push_back(
        {{"name", m.name}, {"threshold", m.threshold}, {"window", m.window}});
  nlohmann::json j{{"problem", problem},
                   {"optimizer", optimizer},
                   {"sampler", sampler},
                   {"epochs", epochs},
                   {"seed", seed},
                   {"monitors", monitors_json},
                   {"out", out},
                   {"record_every", record_every},
                   {"strict", strict},
                   {"export_interpolated", export_interpolated}};
  if (x0) j["x0"] = *x0;
  return j;
}

RunRecord run_single(const RunConfig& config) {
  std::unique_ptr<Problem> problem;
  try {
    problem = make_problem(config.problem);
  } catch (const ContractViolation& e) {
    throw ConfigError("problem", e.what());
  }

  Vector x0;
  if (config.x0) {
    if (int(config.x0->size()) != problem->dim())
      throw ConfigError("x0", "x0 has dimension " +
                                  std::to_string(config.x0->size()) +
                                  ", problem needs " +
                                  std::to_string(problem->dim()));
    x0 = Eigen::Map<const Vector>(config.x0->data(),
                                  Eigen::Index(config.x0->size()));
  } else {
    x0 = problem->initial_point();
  }

  ResolvedOptimizer opt = parse_optimizer(config.optimizer);
  try {
    opt.rule = resolved(opt.rule, x0);
  } catch (const ContractViolation& e) {
    throw ConfigError("optimizer", e.what());
  }

  check_known_keys(config.sampler, "sampler", {"kind", "batch", "seed"});
  // one resolved batch size, shared by the optimizer and the sampler
  int batch = opt.batch;
  if (config.sampler.contains("batch")) {
    const int sampler_batch =
        json_field(config.sampler, "sampler", "batch", 1);
    if (config.optimizer.contains("batch") && sampler_batch != opt.batch)
      throw ConfigError("sampler.batch",
                        "sampler.batch disagrees with optimizer.batch");
    batch = sampler_batch;
  }
  opt.batch = batch;
  const std::string kind_name = json_field<std::string>(
      config.sampler, "sampler", "kind",
      batch > 1 ? "minibatch_reshuffle" : "random_reshuffle");
  const std::uint64_t sampler_seed =
      json_field<std::uint64_t>(config.sampler, "sampler", "seed", config.seed);

  ScheduleKind kind;
  try {
    kind = schedule_kind_from_string(kind_name);
  } catch (const ContractViolation& e) {
    throw ConfigError("sampler.kind", e.what());
  }
  if (kind != ScheduleKind::MinibatchReshuffle && batch > 1)
    throw ConfigError("sampler.kind", "batch > 1 requires minibatch_reshuffle");

  std::unique_ptr<IndexSchedule> schedule;
  try {
    schedule = std::make_unique<IndexSchedule>(kind, problem->components(),
                                               batch, sampler_seed);
  } catch (const ContractViolation& e) {
    throw ConfigError("sampler", e.what());
  }

  OptimizerState state = OptimizerState::init(x0, opt.rule);
  RunOptions options;
  options.record_every = config.record_every;
  options.deterministic_full_grad = opt.dlfgd;
  options.record_iterates = true;

  const auto t0 = std::chrono::steady_clock::now();
  RunRecord record;
  record.data = run_epochs(state, opt.rule, *problem, *schedule,
                           config.epochs, options);
  record.wall_clock_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - t0)
          .count();
  record.final_f = record.data.final_f;

  for (const auto& spec : config.monitors) {
    MonitorReport report;
    if (spec.name == "step_displacement") {
      const int window =
          spec.window > 0 ? spec.window : problem->components();
      const double threshold = spec.threshold > 0 ? spec.threshold : 1e-3;
      report = step_displacement_monitor(record.data.iterates, window,
                                         threshold);
    } else if (spec.name == "lr_ratio") {
      const double tol = spec.threshold > 0 ? spec.threshold : 1e-2;
      report = lr_ratio_monitor(record.data.eta_series, tol);
    } else {
      const double radius = spec.threshold > 0 ? spec.threshold : 1e6;
      report = boundedness_monitor(record.data.iterates, radius);
    }
    record.monitors_ok =
        record.monitors_ok && report.verdict != Verdict::Fail;
    record.reports.push_back(std::move(report));
  }

  // fully resolved manifest: every default the toolkit filled in is explicit
  nlohmann::json resolved_monitors = nlohmann::json::array();
  for (const auto& spec : config.monitors) {
    nlohmann::json m{{"name", spec.name}};
    if (spec.name == "step_displacement") {
      m["window"] = spec.window > 0 ? spec.window : problem->components();
      m["threshold"] = spec.threshold > 0 ? spec.threshold : 1e-3;
    } else if (spec.name == "lr_ratio") {
      m["threshold"] = spec.threshold > 0 ? spec.threshold : 1e-2;
    } else {
      m["threshold"] = spec.threshold > 0 ? spec.threshold : 1e6;
    }
    resolved_monitors.push_back(std::move(m));
  }
  record.manifest = {
      {"toolkit", {{"name", "lrf"}, {"version", kToolkitVersion}}},
      {"problem", problem->params()},
      {"optimizer",
       {{"rule", to_string(opt.rule.kind)},
        {"rho", opt.rule.rho},
        {"beta", opt.rule.beta},
        {"eps0", opt.rule.eps0},
        {"r_eps", opt.rule.r_eps},
        {"fixed_lr", opt.rule.fixed_lr},
        {"batch", opt.batch},
        {"dlfgd", opt.dlfgd},
        {"dowg_rescale_history", opt.rule.dowg_rescale_history}}},
      {"sampler",
       {{"kind", to_string(kind)}, {"batch", batch}, {"seed", sampler_seed}}},
      {"epochs", config.epochs},
      {"seed", config.seed},
      {"monitors", resolved_monitors},
      {"record_every", config.record_every},
      {"strict", config.strict},
      {"x0", std::vector<double>(x0.begin(), x0.end())}};
  return record;
}

namespace {

void write_trace_csv(const RunConfig& config, const RunRecord& record,
                     std::ostream& os) {
  // groups per epoch, recovered from the trace row count per epoch
  const int epochs = config.epochs;
  const std::int64_t total =
      record.data.eta_series.empty()
          ? 0
          : std::int64_t(record.data.eta_series.size());
  const std::int64_t gpe = total / epochs;

  os << "k,epoch,i_k,f_component,f_full,eta,mu,denom,g_norm,m_norm,step_norm\n";
  for (const auto& t : record.data.traces) {
    const std::int64_t epoch = t.k / gpe;
    const bool epoch_end = (t.k + 1) % gpe == 0;
    os << t.k << ',' << epoch << ',';
    for (std::size_t i = 0; i < t.group.size(); ++i) {
      if (i) os << ';';
      os << t.group[i];
    }
    os << ',' << fmt_double(t.f_component) << ',';
    if (epoch_end)
      os << fmt_double(record.data.epochs[std::size_t(epoch)].f_full);
    os << ',' << fmt_double(t.eta) << ',' << fmt_double(t.mu) << ','
       << fmt_double(t.denom_after) << ',' << fmt_double(t.g_norm) << ','
       << fmt_double(t.m_norm_after) << ',' << fmt_double(t.step_norm)
       << "\n";
  }
}

}  // namespace

void write_run_artifacts(const RunConfig& config, const RunRecord& record,
                         const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream os(fs::path(dir) / "manifest.json");
    os << record.manifest.dump(2) << "\n";
  }
  {
    std::ofstream os(fs::path(dir) / "trace.csv");
    write_trace_csv(config, record, os);
  }
  {
    nlohmann::json epochs_json = nlohmann::json::array();
    for (const auto& e : record.data.epochs)
      epochs_json.push_back({{"epoch", e.epoch},
                             {"mean_f_component", e.mean_f_component},
                             {"f_full", e.f_full},
                             {"max_step_norm", e.max_step_norm}});
    nlohmann::json summary{
        {"final_f", record.final_f},
        {"steps", record.data.eta_series.size()},
        {"trace_rows", record.data.traces.size()},
        {"max_grad_plus_momentum", record.data.max_grad_plus_momentum},
        {"monitors_ok", record.monitors_ok},
        {"wall_clock_ms", record.wall_clock_ms},
        {"epochs", std::move(epochs_json)}};
    std::ofstream os(fs::path(dir) / "summary.json");
    os << summary.dump(2) << "\n";
  }
  {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : record.reports) reports.push_back(r.to_json());
    std::ofstream os(fs::path(dir) / "monitors.json");
    os << reports.dump(2) << "\n";
  }
  if (config.export_interpolated) {
    const auto path = interpolated_process(record.data.eta_series,
                                           record.data.iterates);
    std::ofstream os(fs::path(dir) / "interpolated.csv");
    path.write_csv(os);
  }
}

RunRecord execute_run(const RunConfig& config) {
  RunRecord record = run_single(config);
  if (!config.out.empty()) write_run_artifacts(config, record, config.out);
  return record;
}

SweepResult run_sweep(const RunConfig& base, const SweepGrid& grid, int jobs,
                      const std::string& out) {
  if (grid.rho.empty() || grid.beta.empty() || grid.seeds.empty())
    throw ConfigError("grid", "sweep grid must be nonempty");
  if (jobs < 1) jobs = 1;

  struct Spec {
    double rho, beta;
    std::uint64_t seed;
  };
  std::vector<Spec> specs;
  for (const double rho : grid.rho)
    for (const double beta : grid.beta)
      for (const std::uint64_t seed : grid.seeds)
        specs.push_back({rho, beta, seed});

  SweepResult result;
  result.runs.resize(specs.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= specs.size()) return;
      const Spec& s = specs[idx];
      SweepCell& cell = result.runs[idx];
      cell.rho = s.rho;
      cell.beta = s.beta;
      cell.seed = s.seed;

      RunConfig cfg = base;
      cfg.optimizer["rho"] = s.rho;
      cfg.optimizer["beta"] = s.beta;
      cfg.seed = s.seed;
      cfg.sampler["seed"] = s.seed;
      if (!out.empty()) {
        char name[96];
        std::snprintf(name, sizeof name, "rho%.4g_beta%.4g_seed%llu", s.rho,
                      s.beta, static_cast<unsigned long long>(s.seed));
        cell.dir = out + "/" + name;
        cfg.out = cell.dir;
      } else {
        cfg.out.clear();
      }
      try {
        const RunRecord record = execute_run(cfg);
        cell.ok = std::isfinite(record.final_f);
        cell.final_f = record.final_f;
        if (!cell.ok) cell.error = "non-finite final loss";
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, int(specs.size()));
  pool.reserve(std::size_t(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // per-(rho,beta) aggregation, grid order
  nlohmann::json cells = nlohmann::json::array();
  for (const double rho : grid.rho) {
    for (const double beta : grid.beta) {
      std::vector<double> finals;
      int failures = 0;
      for (const auto& run : result.runs)
        if (run.rho == rho && run.beta == beta) {
          if (run.ok)
            finals.push_back(run.final_f);
          else
            ++failures;
        }
      double mean = 0, stddev = 0;
      if (!finals.empty()) {
        for (const double f : finals) mean += f;
        mean /= double(finals.size());
        for (const double f : finals) stddev += (f - mean) * (f - mean);
        stddev = std::sqrt(stddev / double(finals.size()));
      }
      cells.push_back({{"rho", rho},
                       {"beta", beta},
                       {"runs", finals.size() + std::size_t(failures)},
                       {"failures", failures},
                       {"mean_final_f", mean},
                       {"std_final_f", stddev}});
    }
  }
  result.summary = {{"grid",
                     {{"rho", grid.rho},
                      {"beta", grid.beta},
                      {"seeds", grid.seeds}}},
                    {"cells", std::move(cells)}};

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream os(std::filesystem::path(out) / "sweep.json");
    os << result.summary.dump(2) << "\n";
    std::ofstream csv(std::filesystem::path(out) / "sweep.csv");
    csv << "rho,beta,runs,failures,mean_final_f,std_final_f\n";
    for (const auto& c : result.summary["cells"])
      csv << fmt_double(c["rho"].get<double>()) << ','
          << fmt_double(c["beta"].get<double>()) << ','
          << c["runs"].get<std::size_t>() << ','
          << c["failures"].get<int>() << ','
          << fmt_double(c["mean_final_f"].get<double>()) << ','
          << fmt_double(c["std_final_f"].get<double>()) << "\n";
  }
  return result;
}

void check_comparable(const std::vector<RunConfig>& arms) {
  if (arms.size() < 2)
    throw ContractViolation("compare: need at least two arms");
  for (std::size_t i = 1; i < arms.size(); ++i) {
    if (arms[i].problem != arms[0].problem)
      throw ContractViolation("compare: problem blocks differ");
    if (arms[i].sampler != arms[0].sampler)
      throw ContractViolation("compare: sampler blocks differ");
    if (arms[i].epochs != arms[0].epochs || arms[i].seed != arms[0].seed)
      throw ContractViolation("compare: run length or seed differ");
    if (arms[i].x0 != arms[0].x0)
      throw ContractViolation("compare: start points differ");
  }
}

CompareResult compare_optimizers(const RunConfig& base,
                                 const std::vector<nlohmann::json>& optimizers,
                                 const std::string& out) {
  if (optimizers.empty())
    throw ContractViolation("compare: empty optimizer list");

  std::vector<RunConfig> arm_configs;
  for (const auto& block : optimizers) {
    RunConfig cfg = base;
    cfg.optimizer = block;
    cfg.out.clear();
    arm_configs.push_back(std::move(cfg));
  }
  if (arm_configs.size() >= 2) check_comparable(arm_configs);

  CompareResult result;
  for (std::size_t a = 0; a < arm_configs.size(); ++a) {
    CompareArm arm;
    arm.optimizer = optimizers[a];
    arm.label = arm.optimizer.value("rule", "lfm");
    for (const auto& other : result.arms)
      if (other.label == arm.label)
        arm.label += "_" + std::to_string(a);
    if (!out.empty()) arm_configs[a].out = out + "/" + arm.label;
    arm.record = execute_run(arm_configs[a]);
    result.arms.push_back(std::move(arm));
  }

  nlohmann::json rows = nlohmann::json::array();
  for (int e = 0; e < base.epochs; ++e) {
    nlohmann::json row{{"epoch", e}};
    for (const auto& arm : result.arms)
      row[arm.label] = arm.record.data.epochs[std::size_t(e)].f_full;
    rows.push_back(std::move(row));
  }
  result.table = std::move(rows);

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream os(std::filesystem::path(out) / "compare.json");
    os << result.table.dump(2) << "\n";
    std::ofstream csv(std::filesystem::path(out) / "compare.csv");
    csv << "epoch";
    for (const auto& arm : result.arms) csv << ',' << arm.label;
    csv << "\n";
    for (int e = 0; e < base.epochs; ++e) {
      csv << e;
      for (const auto& arm : result.arms)
        csv << ','
            << fmt_double(arm.record.data.epochs[std::size_t(e)].f_full);
      csv << "\n";
    }
  }
  return result;
}

}  // namespace lrf
