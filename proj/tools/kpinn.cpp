// kpinn command line: training, bound inspection, audits and the two reproductions.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpinn/app/experiments.hpp"
#include "kpinn/bound/bound_report.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/network/snapshot.hpp"
#include "kpinn/train/config.hpp"
#include "kpinn/train/trainer.hpp"
#include "kpinn/version.hpp"

namespace fs = std::filesystem;
using namespace kpinn;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
  std::string reg;
  std::optional<std::size_t> steps;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI config file");
  cmd->add_option("--seed", c.seed, "run seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--mode", c.mode, "vpinn or pinn")->check(CLI::IsMember({"vpinn", "pinn"}));
  cmd->add_option("--reg", c.reg, "regularizer on or off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--steps", c.steps, "training steps");
}

TrainConfig resolve(const Common& c, TrainConfig fallback) {
  TrainConfig cfg = c.config.empty() ? std::move(fallback) : load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.seeds = {*c.seed};
  }
  if (!c.mode.empty()) cfg.mode = parse_mode(c.mode);
  if (!c.reg.empty()) cfg.regularize = c.reg == "on";
  if (c.steps) cfg.steps = *c.steps;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Common& c, const char* fallback) {
  fs::path p = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  fs::create_directories(p);
  return p;
}

int cmd_train(const Common& c) {
  const TrainConfig cfg = resolve(c, default_ns_config());
  const fs::path out = out_dir(c, "out/train");
  RunManifest manifest;
  manifest.command = "train";
  manifest.config_ini = config_to_ini(cfg);
  manifest.config_hash = config_hash(cfg);
  manifest.seeds = {cfg.seed};
  manifest.started = utc_timestamp();

  TrainOptions opts;
  opts.snapshot_dir = out / "snapshots";
  opts.on_log = [](const LogRow& r) {
    std::cerr << "step " << r.step << " total=" << r.total << " res=" << r.res << " bc=" << r.bc
              << " test=" << r.test << "\n";
  };
  const ExperimentLog log = train(cfg, opts);
  write_log_csv(log, out / "log.csv");
  manifest.files.push_back("log.csv");
  if (fs::exists(out / "snapshots" / "final.json")) manifest.files.push_back("snapshots/final.json");
  if (log.has_bound) {
    std::ofstream(out / "bound.json") << bound_report_json(log.final_bound) << "\n";
    manifest.files.push_back("bound.json");
  }
  manifest.finished = utc_timestamp();
  write_manifest(manifest, out);
  if (log.aborted) throw NumericError("training aborted: " + log.error);
  std::cout << "final test loss " << log.last().test << "\n";
  return 0;
}

int cmd_bound(const Common& c, const std::string& snapshot) {
  const TrainConfig cfg = resolve(c, default_ns_config());
  const Snapshot snap = load_snapshot(snapshot);
  const TrainingProblem problem = build_problem(cfg, cfg.seed);
  const BoundReport report = final_bound_report(problem, cfg, snap.params);
  std::cout << bound_report_table(report);
  if (!c.out.empty()) {
    const fs::path out = out_dir(c, "");
    std::ofstream(out / "bound.json") << bound_report_json(report) << "\n";
  }
  return 0;
}

int cmd_verify(const Common& c) {
  const fs::path out = out_dir(c, "out/verify");
  const VerifySuite suite = run_verify_suite(out, c.seed.value_or(0), &std::cerr);
  std::cout << (suite.all_pass ? "all audits pass" : "audit failure") << "\n";
  return suite.all_pass ? 0 : 3;
}

int cmd_correlate(const Common& c, const std::string& scatter) {
  const fs::path in = scatter.empty() ? fs::path(c.out.empty() ? "out/pma" : c.out) / "pma_scatter.csv" : fs::path(scatter);
  const auto corr = correlations_from_scatter(in);
  std::cout << kCorrelationHeader << "\n";
  for (std::size_t i = 0; i < corr.size(); ++i) std::cout << i + 1 << "," << corr[i] << "\n";
  if (!c.out.empty()) write_correlations(corr, out_dir(c, "") / "pma_correlations.csv");
  return 0;
}

int cmd_reproduce_ns(const Common& c) {
  const TrainConfig cfg = resolve(c, default_ns_config());
  const auto rep = reproduce_ns(cfg, out_dir(c, "out/ns"), &std::cerr);
  std::cout << kNsSummaryHeader << "\n";
  for (const auto& s : rep.summary) {
    std::cout << to_string(s.mode) << "," << (s.regularized ? "on" : "off") << "," << s.runs << ","
              << s.mean_final_test << "," << s.std_final_test << "\n";
  }
  return 0;
}

int cmd_reproduce_pma(const Common& c) {
  const TrainConfig cfg = resolve(c, default_pma_config());
  const auto rep = reproduce_pma(cfg, out_dir(c, "out/pma"), &std::cerr);
  std::cout << kCorrelationHeader << "\n";
  for (std::size_t i = 0; i < rep.correlations.size(); ++i) std::cout << i + 1 << "," << rep.correlations[i] << "\n";
  return 0;
}

void error_line(const char* kind, const std::string& msg) {
  nlohmann::json j{{"error", kind}, {"message", msg}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman-bound PINN/VPINN toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Common common;
  std::string snapshot, scatter;

  auto* train_cmd = app.add_subcommand("train", "train one configuration");
  auto* bound_cmd = app.add_subcommand("bound", "per-layer factors and assembled bound for a snapshot");
  auto* verify_cmd = app.add_subcommand("verify", "Koopman, adjoint and Rademacher audits");
  auto* corr_cmd = app.add_subcommand("correlate", "Pearson correlations from a scatter CSV");
  auto* ns_cmd = app.add_subcommand("reproduce-ns", "cavity-flow comparison, 12 runs");
  auto* pma_cmd = app.add_subcommand("reproduce-pma", "Monge-Ampere sweep and correlations");
  for (auto* cmd : {train_cmd, bound_cmd, verify_cmd, corr_cmd, ns_cmd, pma_cmd}) add_common(cmd, common);
  bound_cmd->add_option("--snapshot", snapshot, "weight snapshot JSON")->required();
  corr_cmd->add_option("--scatter", scatter, "pma_scatter.csv path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    error_line("usage", e.what());
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(common);
    if (*bound_cmd) return cmd_bound(common, snapshot);
    if (*verify_cmd) return cmd_verify(common);
    if (*corr_cmd) return cmd_correlate(common, scatter);
    if (*ns_cmd) return cmd_reproduce_ns(common);
    if (*pma_cmd) return cmd_reproduce_pma(common);
  } catch (const Error& e) {
    error_line(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 1;
}
