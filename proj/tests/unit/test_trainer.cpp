#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "kpinn/core/error.hpp"
#include "kpinn/network/snapshot.hpp"
#include "kpinn/train/adam.hpp"
#include "kpinn/train/config.hpp"
#include "kpinn/train/trainer.hpp"

using namespace kpinn;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny_ns() {
  TrainConfig c = default_ns_config();
  c.hidden = {6, 6};
  c.n_collocation = 8;
  c.n_test = 8;
  c.n_boundary = 40;
  c.grid = 8;
  c.steps = 20;
  c.log_every = 5;
  c.seed = 3;
  return c;
}

TrainConfig tiny_pma() {
  TrainConfig c = default_pma_config();
  c.hidden = {5, 5};
  c.n_collocation = 6;
  c.n_test = 6;
  c.n_boundary = 40;
  c.grid = 5;
  c.time_nodes = 3;
  c.steps = 10;
  c.log_every = 5;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kpinn_trainer_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, Defaults) {
  const TrainConfig c = default_ns_config();
  EXPECT_EQ(c.reynolds, 100.0);
  EXPECT_EQ(c.concentration, 0.1);
  EXPECT_EQ(c.grid, 25u);
  EXPECT_EQ(c.n_collocation, 100u);
  EXPECT_EQ(c.n_boundary, 240u);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.lambda_bc, 0.1);
  EXPECT_EQ(c.lambda_p, 0.1);
  EXPECT_EQ(c.layer_dims(), (std::vector<std::size_t>{2, 64, 64, 64, 3}));
  EXPECT_EQ(default_pma_config().n_boundary, 720u);
  EXPECT_EQ(default_pma_config().kind, OperatorKind::ParabolicMongeAmpere);
}

TEST(Config, IniRoundTripAndHash) {
  TrainConfig c = tiny_ns();
  c.regularize = true;
  c.mode = TrainMode::Pinn;
  const TrainConfig back = parse_config(config_to_ini(c));
  EXPECT_EQ(config_to_ini(back), config_to_ini(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  TrainConfig d = c;
  d.seed += 1;
  EXPECT_NE(config_hash(d), config_hash(c));
  EXPECT_EQ(hash_hex(0xabcULL).size(), 16u);
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  const TrainConfig c = parse_config("[loss]\nmode = pinn\nregularizer = on\n[network]\nhidden = 8, 8\n");
  EXPECT_EQ(c.mode, TrainMode::Pinn);
  EXPECT_TRUE(c.regularize);
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{8, 8}));
  EXPECT_THROW(parse_config("[loss]\nlamda_bc = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("[optim]\nlearning_rate = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("[optim]\nsteps = -5\n"), ConfigError);
  EXPECT_THROW(parse_config("[data]\nn_boundary = 241\n"), ConfigError);
  EXPECT_EQ(parse_config("[problem]\noperator = monge-ampere\n").n_boundary, 720u);
  EXPECT_THROW(load_config("/nonexistent.ini"), IoError);
}

TEST(Trainer, ZeroStepsLogsInitialEvaluationOnly) {
  TrainConfig c = tiny_ns();
  c.steps = 0;
  const ExperimentLog log = train(c);
  ASSERT_EQ(log.rows.size(), 1u);
  EXPECT_EQ(log.rows[0].step, 0u);
  EXPECT_FALSE(log.aborted);
}

TEST(Trainer, LogCadenceAndFinalRow) {
  const ExperimentLog log = train(tiny_ns());
  std::vector<std::size_t> steps;
  for (const auto& r : log.rows) steps.push_back(r.step);
  EXPECT_EQ(steps, (std::vector<std::size_t>{0, 5, 10, 15, 20}));
  for (const auto& r : log.rows) {
    EXPECT_NEAR(r.total, r.res + 0.1 * r.bc + 0.1 * r.p, 1e-12 * r.total);
    EXPECT_GT(r.reg, 0.0);  // logged even when not in the objective
  }
  EXPECT_LT(log.last().total, log.rows[0].total);
}

TEST(Trainer, RegularizerEntersObjectiveWhenOn) {
  TrainConfig c = tiny_ns();
  c.regularize = true;
  const ExperimentLog log = train(c);
  const LogRow& r = log.rows[0];
  EXPECT_NEAR(r.total, r.res + 0.1 * r.bc + 0.1 * r.p + r.reg, 1e-12 * r.total);
}

TEST(Trainer, BitIdenticalReruns) {
  for (TrainConfig c : {tiny_ns(), tiny_pma()}) {
    const ExperimentLog a = train(c), b = train(c);
    EXPECT_EQ(log_to_csv(a), log_to_csv(b));
    EXPECT_EQ(a.final_params.flatten(), b.final_params.flatten());
  }
}

TEST(Trainer, PmaRunsAndReportsBound) {
  const ExperimentLog log = train(tiny_pma());
  EXPECT_FALSE(log.aborted);
  ASSERT_TRUE(log.has_bound);
  EXPECT_EQ(log.final_bound.theorem, BoundTheorem::NonlinearOfLinear);
  EXPECT_GT(log.final_bound.F, 0.0);
  EXPECT_TRUE(std::isfinite(log.final_bound.log_assembled_bound));
}

TEST(Trainer, ExactSolutionWithoutPenaltiesIsStationary) {
  // The zero field solves homogeneous Navier-Stokes; with the boundary and
  // pressure penalties off nothing moves it. Its regularizer is undefined (no
  // positive singular values), so the logged-quantities pass is skipped.
  TrainConfig c = tiny_ns();
  c.lambda_bc = 0.0;
  c.lambda_p = 0.0;
  const TrainingProblem prob = build_problem(c, c.seed);
  MlpParams p = init_glorot(c.layer_dims(), c.layer_activations(), 1);
  for (auto& l : p.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  for (TrainMode m : {TrainMode::Vpinn, TrainMode::Pinn}) {
    c.mode = m;
    const StepEvaluation ev = evaluate_step(prob, c, p, true, false);
    EXPECT_EQ(ev.row.total, 0.0);
    EXPECT_TRUE(ev.gradient.isZero(0.0));
    EXPECT_EQ(adam_step(adam_init(p.flatten()), ev.gradient).params, p.flatten());
  }
}

TEST(Trainer, SnapshotsAndCsvRoundTrip) {
  const fs::path dir = scratch("snap");
  TrainConfig c = tiny_ns();
  c.snapshot_every = 10;
  TrainOptions opt;
  opt.snapshot_dir = dir;
  const ExperimentLog log = train(c, opt);
  EXPECT_TRUE(fs::exists(dir / "step_10.json"));
  EXPECT_EQ(load_snapshot(dir / "final.json").params.flatten(), log.final_params.flatten());

  write_log_csv(log, dir / "log.csv");
  const auto rows = read_log_csv(dir / "log.csv");
  ASSERT_EQ(rows.size(), log.rows.size());
  EXPECT_EQ(rows.back().test, log.last().test);
  std::ifstream in(dir / "log.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kLogCsvHeader);
}

TEST(Trainer, CsvSchemaViolations) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  std::ofstream(dir / "bad_header.csv") << "step,loss\n0,1\n";
  std::ofstream(dir / "bad_order.csv") << kLogCsvHeader << "\n5,1,1,1,1,1,1\n2,1,1,1,1,1,1\n";
  std::ofstream(dir / "short.csv") << kLogCsvHeader << "\n5,1,1\n";
  EXPECT_THROW(read_log_csv(dir / "bad_header.csv"), IoError);
  EXPECT_THROW(read_log_csv(dir / "bad_order.csv"), IoError);
  EXPECT_THROW(read_log_csv(dir / "short.csv"), IoError);
}
