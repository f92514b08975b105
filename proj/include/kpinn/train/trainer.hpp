#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kpinn/bound/bound_report.hpp"
#include "kpinn/network/mlp.hpp"
#include "kpinn/train/config.hpp"
#include "kpinn/train/losses.hpp"

namespace kpinn {

inline constexpr const char* kLogCsvHeader = "step,loss_total,loss_res,loss_bc,loss_p,loss_reg,loss_test";

struct LogRow {
  std::size_t step = 0;
  double total = 0.0;
  double res = 0.0;
  double bc = 0.0;
  double p = 0.0;
  double reg = 0.0;
  double test = 0.0;
};

struct ExperimentLog {
  std::vector<LogRow> rows;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::size_t clamp_events = 0;
  bool aborted = false;
  std::string error;
  MlpParams final_params;
  BoundReport final_bound;
  bool has_bound = false;

  const LogRow& last() const;
};

std::string log_to_csv(const ExperimentLog& log);
void write_log_csv(const ExperimentLog& log, const std::filesystem::path& path);
/// Parses a log CSV; throws IoError unless the header matches kLogCsvHeader.
std::vector<LogRow> read_log_csv(const std::filesystem::path& path);

/// Everything a run needs that does not change during training.
struct TrainingProblem {
  PdeOperator op;
  DomainBox box;
  InputNormalizer normalizer;
  QuadratureGrid grid;
  CollocationSet train_points;
  CollocationSet test_points;
  std::vector<TestFunction> train_tfs;
  Eigen::MatrixXd train_matrix;
  Eigen::MatrixXd test_matrix;
  BoundarySet boundary;
};

/// Collocation sets use derive_seed(seed, "train") and derive_seed(seed, "test").
TrainingProblem build_problem(const TrainConfig& config, std::uint64_t seed);

struct StepEvaluation {
  LogRow row;
  Eigen::VectorXd gradient;
  std::size_t clamp_events = 0;
};

/// All loss components at `params`; the test loss only when `with_test`.
StepEvaluation evaluate_step(const TrainingProblem& problem, const TrainConfig& config,
                             const MlpParams& params, bool with_gradient, bool with_test);

/// Bound report for a trained network (F from the training test functions).
BoundReport final_bound_report(const TrainingProblem& problem, const TrainConfig& config,
                               const MlpParams& params);

struct TrainOptions {
  /// Snapshots go here when non-empty.
  std::filesystem::path snapshot_dir;
  bool compute_bound = true;
  std::function<void(const LogRow&)> on_log;
};

/// Adam on the total loss res + l_bc bc + l_p p + l_K reg. Rows are logged at
/// steps divisible by log_every (before that step's update) and at `steps`.
/// A numeric failure stops training and returns the partial log.
ExperimentLog train(const TrainConfig& config, const TrainOptions& options = {});

}  // namespace kpinn
