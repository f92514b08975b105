#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpinn/train/config.hpp"
#include "kpinn/train/trainer.hpp"
#include "kpinn/verify/koopman_audit.hpp"
#include "kpinn/verify/rademacher.hpp"

namespace kpinn {

inline constexpr const char* kNsSummaryHeader = "mode,regularizer,runs,mean_final_test,std_final_test";
inline constexpr const char* kPmaScatterHeader = "run,seed,steps,test_error,reg_sum";
inline constexpr const char* kCorrelationHeader = "r,pearson";

/// Files written by a command, with the configuration that produced them.
struct RunManifest {
  std::string command;
  std::string config_ini;
  std::uint64_t config_hash = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> files;  // relative to the output directory
  std::string started;
  std::string finished;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);
/// Throws IoError if manifest.json is malformed or lists a missing file.
RunManifest read_manifest(const std::filesystem::path& out_dir);

struct RunRecord {
  std::string label;
  TrainMode mode = TrainMode::Vpinn;
  bool regularized = false;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double final_test = 0.0;
  double final_reg = 0.0;
  std::size_t clamp_events = 0;
  bool aborted = false;
  std::string log_file;
};

/// Trains one configuration and writes <label>.csv and <label>-bound.json under out_dir/runs.
RunRecord run_and_record(const TrainConfig& config, const std::string& label, const std::filesystem::path& out_dir,
                         RunManifest& manifest);

struct NsSummaryRow {
  TrainMode mode = TrainMode::Vpinn;
  bool regularized = false;
  std::size_t runs = 0;
  double mean_final_test = 0.0;
  double std_final_test = 0.0;
};

struct NsReproduction {
  std::vector<RunRecord> runs;
  std::vector<NsSummaryRow> summary;
};

/// VPINN and PINN, regularizer off and on, one run per seed in config.seeds.
/// Writes runs/*.csv, ns_summary.csv and manifest.json.
NsReproduction reproduce_ns(const TrainConfig& base, const std::filesystem::path& out_dir,
                            std::ostream* progress = nullptr);

struct PmaReproduction {
  std::vector<RunRecord> runs;
  std::vector<double> correlations;  // r = 1, 2, 3
};

/// Run i uses steps = sweep_steps[i % S] and seed = base.seed + i / S.
/// Writes runs/*.csv, pma_scatter.csv, pma_correlations.csv and manifest.json.
PmaReproduction reproduce_pma(const TrainConfig& base, const std::filesystem::path& out_dir,
                              std::ostream* progress = nullptr);

/// Pearson correlation of test_error with reg_sum^r for r = 1..max_r.
std::vector<double> correlations_from_scatter(const std::filesystem::path& scatter_csv, int max_r = 3);
void write_correlations(const std::vector<double>& corr, const std::filesystem::path& path);

struct VerifySuite {
  std::vector<KoopmanAuditResult> koopman;
  double adjoint_discrepancy = 0.0;         // random smooth fields, 50^2
  double adjoint_affine_discrepancy = 0.0;  // affine field, 50^2
  /// Random-field discrepancy at 50^2, 100^2, 200^2.
  std::vector<double> adjoint_refinement;
  double cauchy_schwarz_slack = 0.0;
  std::vector<AuditReport> audits;
  bool all_pass = false;
};

/// Koopman audits (tanh, a in {0.5, 1, 2}), the adjoint identity with c = 4
/// (affine field below 1e-4 on 50^2, at least second-order decay from 50^2 to
/// 200^2), and the default Rademacher audits with their corrupted-F
/// inversions. Writes verify.json.
VerifySuite run_verify_suite(const std::filesystem::path& out_dir, std::uint64_t seed,
                             std::ostream* progress = nullptr);

}  // namespace kpinn
