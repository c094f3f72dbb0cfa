// apor: reach | oracle-check | bench | independence

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "apor/config.hpp"
#include "apor/discrepancy.hpp"
#include "apor/errors.hpp"
#include "apor/independence.hpp"
#include "apor/models.hpp"
#include "apor/oracle.hpp"
#include "apor/reach.hpp"
#include "apor/report.hpp"

namespace fs = std::filesystem;
using namespace apor;

namespace {

constexpr int kExitUnsafe = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitViolation = 4;

struct Options {
  std::string config;
  std::string model;
  std::string out = ".";
  bool svg = false;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  bool full_history = false;
  bool require_safe = false;
  double mutate_radii = 1.0;
};

struct Setup {
  RunConfig config;
  ModelPreset model;
  std::vector<DiscrepancyFn> betas;
  IndependenceTable table;
};

Setup prepare(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? RunConfig{} : load_config(opt.config);
  if (!opt.model.empty()) cfg.model = opt.model;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.samples) cfg.oracle_samples = *opt.samples;
  if (opt.full_history) cfg.full_history = true;
  if (cfg.model == "inline" && !cfg.system) throw ConfigError("model 'inline' needs a config file with a system");
  ModelPreset model = resolve_model(cfg);
  auto betas = action_discrepancies(model.system, model.discrepancy_decimals);
  auto table = build_independence_table(model.system, model.epsilon);
  if (model.system.invariant_radius()) {
    const auto cert = certify_invariant_radius(model.system);
    if (!cert.certified) std::cerr << "warning: invariant radius not certified: " << cert.reason << "\n";
  }
  return {std::move(cfg), std::move(model), std::move(betas), std::move(table)};
}

ReachResult run_reach(const Setup& s, bool force_history) {
  ReachParams p;
  p.horizon = s.model.horizon;
  p.delta0 = s.model.delta0;
  p.workers = s.config.workers;
  p.tuple_budget = s.config.tuple_budget;
  p.full_history = s.config.full_history || force_history;
  return reach(s.model.system, s.betas, s.table, p);
}

fs::path out_dir(const Options& opt) {
  fs::path dir(opt.out);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

int cmd_reach(const Options& opt) {
  const auto s = prepare(opt);
  // Safety windows before the last step need every table.
  const bool need_history = s.model.safety && s.model.safety->first_step < s.model.horizon;
  const auto result = run_reach(s, need_history);
  const auto dir = out_dir(opt);

  std::ostringstream csv;
  write_bounds_csv(csv, result);
  write_file(dir / "bounds.csv", csv.str());

  std::optional<SafetyResult> safety;
  if (s.model.safety) safety = check_safety(result, *s.model.safety);
  write_file(dir / "report.txt", format_report(s.model, result, safety));
  if (opt.svg) {
    const auto samples = random_valid_executions(s.model.system, s.model.horizon, 20, s.config.seed);
    write_file(dir / "bounds.svg", render_svg(result, samples));
  }
  std::cout << "explored " << result.explored_traces() << " traces over " << result.covers.size()
            << " covers, nominal per state " << result.nominal.to_string() << ", " << result.wall_ms << " ms\n";
  if (safety) std::cout << "safety " << to_string(safety->verdict) << "\n";
  if (result.partial()) {
    std::cerr << "error: tuple budget of " << s.config.tuple_budget << " exhausted; outputs are partial\n";
    return kExitBudget;
  }
  if (opt.require_safe && safety && safety->verdict != Verdict::Safe) return kExitUnsafe;
  return 0;
}

int cmd_oracle_check(const Options& opt) {
  const auto s = prepare(opt);
  if (s.config.oracle_samples == 0) throw ConfigError("oracle-check needs at least one sample");
  auto result = run_reach(s, true);
  if (result.partial()) {
    std::cerr << "error: tuple budget exhausted; cannot audit a partial reach set\n";
    return kExitBudget;
  }
  if (opt.mutate_radii != 1.0) scale_radii(result, opt.mutate_radii);
  const auto samples = random_valid_executions(s.model.system, s.model.horizon, s.config.oracle_samples,
                                               s.config.seed, std::max<std::size_t>(1, s.config.workers));
  const auto report = validate_soundness(result, samples);
  const auto dir = out_dir(opt);
  const auto text = report.to_text(s.model.system);
  write_file(dir / "soundness.txt", text);
  std::cout << "samples " << report.sample_count << ", violations " << report.violations() << ", min slack "
            << report.min_slack() << "\n";
  return report.passed() ? 0 : kExitViolation;
}

int cmd_bench(const Options& opt) {
  const auto s = prepare(opt);
  const auto result = run_reach(s, false);
  const State q0 = sample_initial(s.model.system.initial(), s.model.system.norm(), s.config.seed);
  std::string ex_traces;
  double ex_ms = 0.0;
  const auto start = std::chrono::steady_clock::now();
  try {
    ex_traces = std::to_string(count_executions(s.model.system, q0, s.model.horizon, s.config.node_budget));
  } catch (const BudgetExceeded&) {
    ex_traces = "BUDGET";
  }
  ex_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream csv;
  csv << "mode,traces,wall_ms\n";
  csv << "por," << result.explored_traces() << "," << result.wall_ms << "\n";
  csv << "exhaustive," << ex_traces << "," << ex_ms << "\n";
  write_file(out_dir(opt) / "bench.csv", csv.str());
  std::cout << csv.str();
  if (result.wall_ms > 0) std::cout << "speedup " << ex_ms / result.wall_ms << "\n";
  return result.partial() ? kExitBudget : 0;
}

int cmd_independence(const Options& opt) {
  const auto s = prepare(opt);
  std::ostringstream csv;
  write_independence_csv(csv, s.model.system, s.table);
  write_file(out_dir(opt) / "independence.csv", csv.str());
  std::cout << csv.str();
  for (std::size_t i = 0; i < s.betas.size(); ++i) {
    std::cout << "beta " << s.model.system.action(static_cast<ActionId>(i)).name << " "
              << s.betas[i].coefficient() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate partial order reduction reachability"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--model", opt.model, "preset name (consensus, heating, platoon2, platoon2-40, platoon2-25, "
                                          "platoon4) or inline");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--workers", opt.workers, "worker threads (0 = all cores)");
    sub->add_option("--seed", opt.seed, "sampling seed");
  };

  auto* reach_cmd = app.add_subcommand("reach", "compute reach-set bounds");
  add_common(reach_cmd);
  reach_cmd->add_flag("--svg", opt.svg, "also write bounds.svg");
  reach_cmd->add_flag("--full-history", opt.full_history, "keep every R_t table");
  reach_cmd->add_flag("--require-safe", opt.require_safe, "exit 1 unless the safety verdict is SAFE");

  auto* oracle_cmd = app.add_subcommand("oracle-check", "audit a reach run against random valid executions");
  add_common(oracle_cmd);
  oracle_cmd->add_option("--samples", opt.samples, "number of sampled executions");
  oracle_cmd->add_option("--mutate-radii", opt.mutate_radii)->group("");

  auto* bench_cmd = app.add_subcommand("bench", "time reduced vs exhaustive exploration");
  add_common(bench_cmd);

  auto* ind_cmd = app.add_subcommand("independence", "pairwise commutation bounds");
  add_common(ind_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (reach_cmd->parsed()) return cmd_reach(opt);
    if (oracle_cmd->parsed()) return cmd_oracle_check(opt);
    if (bench_cmd->parsed()) return cmd_bench(opt);
    return cmd_independence(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
