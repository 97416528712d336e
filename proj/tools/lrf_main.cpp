// Command-line experiment runner: seeded single runs, rho x beta sweeps and
// aligned optimizer comparisons, with CSV/JSON artifacts per run.

#include "lrf/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitMonitor = 4;

void fail_config(const std::string& field, const std::string& message) {
  json err{{"error", "config"}, {"field", field}, {"message", message}};
  std::cerr << err.dump() << "\n";
  std::exit(kExitConfig);
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) fail_config("config", "cannot open config file: " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail_config("config", std::string("malformed JSON: ") + e.what());
  }
  return {};
}

std::vector<double> parse_list(const std::string& csv, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (...) {
      fail_config(flag, "not a number: " + item);
    }
  }
  return values;
}

struct CommonFlags {
  std::string config_path, problem, rule, out;
  double rho = -1, beta = -1, eps0 = -1, fixed_lr = -1, scale = -1,
         lambda = -1;
  int batch = -1, epochs = -1, record_every = -1, dim = -1, components = -1;
  long long seed = -1, problem_seed = -1;
  bool strict = false;
  bool dlfgd = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--problem", f.problem,
                  "problem name: lad | hinge | pwnc | relu-mlp");
  cmd->add_option("--dim", f.dim, "problem dimension");
  cmd->add_option("--components", f.components, "number of components N");
  cmd->add_option("--problem-seed", f.problem_seed, "problem data seed");
  cmd->add_option("--scale", f.scale, "problem scale (lad, pwnc)");
  cmd->add_option("--lambda", f.lambda, "ridge weight (hinge)");
  cmd->add_option("--rule", f.rule, "dog | dowg | lfm | constant");
  cmd->add_option("--rho", f.rho, "scaling parameter");
  cmd->add_option("--beta", f.beta, "momentum parameter");
  cmd->add_option("--eps0", f.eps0, "denominator stabilizer");
  cmd->add_option("--fixed-lr", f.fixed_lr, "learning rate (constant rule)");
  cmd->add_option("--batch", f.batch, "mini-batch size");
  cmd->add_option("--epochs", f.epochs, "number of epochs");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--record-every", f.record_every,
                  "keep every s-th trace row");
  cmd->add_flag("--strict", f.strict, "exit 4 when a monitor fails");
  cmd->add_flag("--dlfgd", f.dlfgd,
                "deterministic full-gradient mode (D-LFGD)");
}

// flags override file values
json merge_flags(const CommonFlags& f) {
  json doc = load_config_file(f.config_path);
  if (!doc.contains("problem")) doc["problem"] = json::object();
  if (!doc.contains("optimizer")) doc["optimizer"] = json::object();
  auto& problem = doc["problem"];
  auto& optimizer = doc["optimizer"];
  if (!f.problem.empty()) problem["name"] = f.problem;
  if (f.dim >= 0) problem["dim"] = f.dim;
  if (f.components >= 0) problem["components"] = f.components;
  if (f.problem_seed >= 0) problem["seed"] = f.problem_seed;
  if (f.scale >= 0) problem["scale"] = f.scale;
  if (f.lambda >= 0) problem["lambda"] = f.lambda;
  if (!f.rule.empty()) optimizer["rule"] = f.rule;
  if (f.rho >= 0) optimizer["rho"] = f.rho;
  if (f.beta >= 0) optimizer["beta"] = f.beta;
  if (f.eps0 >= 0) optimizer["eps0"] = f.eps0;
  if (f.fixed_lr >= 0) optimizer["fixed_lr"] = f.fixed_lr;
  if (f.batch >= 0) optimizer["batch"] = f.batch;
  if (f.dlfgd) optimizer["dlfgd"] = true;
  if (f.epochs >= 0) doc["epochs"] = f.epochs;
  if (f.seed >= 0) doc["seed"] = static_cast<std::uint64_t>(f.seed);
  if (!f.out.empty()) doc["out"] = f.out;
  if (f.record_every >= 0) doc["record_every"] = f.record_every;
  if (f.strict) doc["strict"] = true;
  return doc;
}

int run_command(const CommonFlags& flags) {
  lrf::RunConfig config = lrf::parse_run_config(merge_flags(flags));
  const lrf::RunRecord record = lrf::execute_run(config);
  std::cout << "final_f=" << record.final_f
            << " steps=" << record.data.eta_series.size();
  for (const auto& report : record.reports)
    std::cout << " " << report.name << "=" << lrf::to_string(report.verdict);
  std::cout << "\n";
  if (config.strict && !record.monitors_ok) return kExitMonitor;
  return kExitOk;
}

int sweep_command(const CommonFlags& flags, const std::string& rho_csv,
                  const std::string& beta_csv, const std::string& seeds_csv,
                  int jobs) {
  json doc = merge_flags(flags);
  lrf::SweepGrid grid;
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    grid.rho = g.value("rho", std::vector<double>{});
    grid.beta = g.value("beta", std::vector<double>{});
    grid.seeds = g.value("seeds", std::vector<std::uint64_t>{});
  }
  if (!rho_csv.empty()) grid.rho = parse_list(rho_csv, "--rho-grid");
  if (!beta_csv.empty()) grid.beta = parse_list(beta_csv, "--beta-grid");
  if (!seeds_csv.empty()) {
    grid.seeds.clear();
    for (const double s : parse_list(seeds_csv, "--seeds"))
      grid.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  doc.erase("grid");

  lrf::RunConfig base = lrf::parse_run_config(doc);
  const std::string out = base.out;
  base.out.clear();
  const lrf::SweepResult result = lrf::run_sweep(base, grid, jobs, out);

  std::size_t failures = 0;
  for (const auto& run : result.runs)
    if (!run.ok) ++failures;
  std::cout << "sweep: " << result.runs.size() << " runs, " << failures
            << " failures\n";
  return kExitOk;
}

int compare_command(const CommonFlags& flags, const std::string& rules_csv) {
  json doc = merge_flags(flags);
  std::vector<json> arms;
  if (doc.contains("arms")) {
    for (const auto& a : doc["arms"]) arms.push_back(a);
    doc.erase("arms");
  }
  if (!rules_csv.empty()) {
    arms.clear();
    std::stringstream ss(rules_csv);
    std::string rule;
    while (std::getline(ss, rule, ',')) {
      json block = doc["optimizer"];
      block["rule"] = rule;
      if (rule == "dog" || rule == "dowg") block.erase("beta");
      arms.push_back(std::move(block));
    }
  }
  if (arms.empty())
    fail_config("arms", "compare needs --rules or an 'arms' config list");

  lrf::RunConfig base = lrf::parse_run_config(doc);
  const std::string out = base.out;
  base.out.clear();
  const lrf::CompareResult result =
      lrf::compare_optimizers(base, arms, out);
  for (const auto& arm : result.arms)
    std::cout << arm.label << ": final_f=" << arm.record.final_f << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-rate-free stochastic subgradient toolkit"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, compare_flags;
  std::string rho_grid, beta_grid, seeds_csv, rules_csv;
  int jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "execute a single seeded run");
  add_common_flags(run_cmd, run_flags);

  auto* sweep_cmd = app.add_subcommand("sweep", "rho x beta x seed grid");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--rho-grid", rho_grid, "comma-separated rho values");
  sweep_cmd->add_option("--beta-grid", beta_grid, "comma-separated beta values");
  sweep_cmd->add_option("--seeds", seeds_csv, "comma-separated seeds");
  sweep_cmd->add_option("--jobs", jobs, "concurrent runs");

  auto* compare_cmd =
      app.add_subcommand("compare", "optimizers on shared permutations");
  add_common_flags(compare_cmd, compare_flags);
  compare_cmd->add_option("--rules", rules_csv,
                          "comma-separated rules to compare");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_command(run_flags);
    if (sweep_cmd->parsed())
      return sweep_command(sweep_flags, rho_grid, beta_grid, seeds_csv, jobs);
    return compare_command(compare_flags, rules_csv);
  } catch (const lrf::ConfigError& e) {
    json err{{"error", "config"}, {"field", e.field}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitConfig;
  } catch (const lrf::NumericError& e) {
    json err{{"error", "numeric"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitNumeric;
  } catch (const lrf::ContractViolation& e) {
    json err{{"error", "config"}, {"field", ""}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitConfig;
  }
}
