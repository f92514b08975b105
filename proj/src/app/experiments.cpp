#include "kpinn/app/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kpinn/app/stats.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"
#include "kpinn/bound/koopman.hpp"
#include "kpinn/verify/adjoint_check.hpp"
#include "kpinn/version.hpp"

namespace kpinn {

namespace fs = std::filesystem;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const RunManifest& m, const fs::path& out_dir) {
  nlohmann::json j;
  j["toolkit_version"] = kVersion;
  j["command"] = m.command;
  j["config"] = m.config_ini;
  j["config_hash"] = hash_hex(m.config_hash);
  j["seeds"] = m.seeds;
  j["files"] = m.files;
  j["started"] = m.started;
  j["finished"] = m.finished;
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + out_dir.string());
  out << j.dump(2) << "\n";
}

RunManifest read_manifest(const fs::path& out_dir) {
  std::ifstream in(out_dir / "manifest.json");
  if (!in) throw IoError("no manifest.json in " + out_dir.string());
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.command = j.at("command").get<std::string>();
    m.config_ini = j.at("config").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.files = j.at("files").get<std::vector<std::string>>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    const std::string hash = j.at("config_hash").get<std::string>();
    m.config_hash = std::stoull(hash, nullptr, 16);
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  if (!m.config_ini.empty() && config_hash(parse_config(m.config_ini)) != m.config_hash) {
    throw IoError("manifest config hash does not match its config");
  }
  for (const auto& f : m.files) {
    if (!fs::exists(out_dir / f)) throw IoError("manifest lists missing file " + f);
  }
  return m;
}

RunRecord run_and_record(const TrainConfig& config, const std::string& label, const fs::path& out_dir,
                         RunManifest& manifest) {
  fs::create_directories(out_dir / "runs");
  const ExperimentLog log = train(config);
  RunRecord rec;
  rec.label = label;
  rec.mode = config.mode;
  rec.regularized = config.regularize;
  rec.seed = config.seed;
  rec.steps = config.steps;
  rec.clamp_events = log.clamp_events;
  rec.aborted = log.aborted;
  if (!log.rows.empty()) {
    rec.final_test = log.last().test;
    rec.final_reg = log.last().reg;
  }
  rec.log_file = "runs/" + label + ".csv";
  write_log_csv(log, out_dir / rec.log_file);
  manifest.files.push_back(rec.log_file);
  nlohmann::json meta;
  meta["seed"] = config.seed;
  meta["config_hash"] = hash_hex(log.config_hash);
  meta["clamp_events"] = log.clamp_events;
  meta["aborted"] = log.aborted;
  meta["error"] = log.error;
  if (log.has_bound) meta["bound"] = nlohmann::json::parse(bound_report_json(log.final_bound));
  const std::string meta_file = "runs/" + label + "-bound.json";
  std::ofstream(out_dir / meta_file) << meta.dump(2) << "\n";
  manifest.files.push_back(meta_file);
  if (log.aborted) throw NumericError("run " + label + " aborted: " + log.error);
  return rec;
}

NsReproduction reproduce_ns(const TrainConfig& base, const fs::path& out_dir, std::ostream* progress) {
  base.validate();
  if (base.kind != OperatorKind::NavierStokes2D) throw ConfigError("reproduce-ns needs the navier-stokes operator");
  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = "reproduce-ns";
  manifest.config_ini = config_to_ini(base);
  manifest.config_hash = config_hash(base);
  manifest.seeds = base.seeds;
  manifest.started = utc_timestamp();

  NsReproduction out;
  for (TrainMode mode : {TrainMode::Vpinn, TrainMode::Pinn}) {
    for (bool reg : {false, true}) {
      std::vector<double> finals;
      for (std::uint64_t seed : base.seeds) {
        TrainConfig c = base;
        c.mode = mode;
        c.regularize = reg;
        c.seed = seed;
        const std::string label = "ns-" + to_string(mode) + "-reg" + (reg ? "on" : "off") + "-s" + std::to_string(seed);
        const auto t0 = std::chrono::steady_clock::now();
        RunRecord rec = run_and_record(c, label, out_dir, manifest);
        if (progress) {
          *progress << label << " final_test=" << rec.final_test << " ("
                    << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)\n";
        }
        finals.push_back(rec.final_test);
        out.runs.push_back(std::move(rec));
      }
      out.summary.push_back({mode, reg, finals.size(), mean(finals), sample_std(finals)});
    }
  }
  std::ofstream csv(out_dir / "ns_summary.csv");
  csv << kNsSummaryHeader << "\n" << std::setprecision(17);
  for (const auto& s : out.summary) {
    csv << to_string(s.mode) << "," << (s.regularized ? "on" : "off") << "," << s.runs << "," << s.mean_final_test
        << "," << s.std_final_test << "\n";
  }
  csv.close();
  manifest.files.push_back("ns_summary.csv");
  manifest.finished = utc_timestamp();
  write_manifest(manifest, out_dir);
  return out;
}

PmaReproduction reproduce_pma(const TrainConfig& base, const fs::path& out_dir, std::ostream* progress) {
  base.validate();
  if (base.kind != OperatorKind::ParabolicMongeAmpere) {
    throw ConfigError("reproduce-pma needs the monge-ampere operator");
  }
  if (base.sweep_runs < 3) throw ConfigError("the sweep needs at least 3 runs");
  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = "reproduce-pma";
  manifest.config_ini = config_to_ini(base);
  manifest.config_hash = config_hash(base);
  manifest.started = utc_timestamp();

  PmaReproduction out;
  const std::size_t S = base.sweep_steps.size();
  std::ofstream scatter(out_dir / "pma_scatter.csv");
  scatter << kPmaScatterHeader << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < base.sweep_runs; ++i) {
    TrainConfig c = base;
    c.steps = base.sweep_steps[i % S];
    c.seed = base.seed + i / S;
    if (manifest.seeds.empty() || manifest.seeds.back() != c.seed) manifest.seeds.push_back(c.seed);
    std::ostringstream label;
    label << "pma-" << std::setw(2) << std::setfill('0') << i << "-s" << c.seed << "-t" << c.steps;
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec = run_and_record(c, label.str(), out_dir, manifest);
    const double reg_sum = rec.final_reg / kRegularizerWeight;
    scatter << i << "," << c.seed << "," << c.steps << "," << rec.final_test << "," << reg_sum << "\n";
    if (progress) {
      *progress << label.str() << " test=" << rec.final_test << " reg_sum=" << reg_sum << " clamps="
                << rec.clamp_events << " ("
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)\n";
    }
    out.runs.push_back(std::move(rec));
  }
  scatter.close();
  manifest.files.push_back("pma_scatter.csv");
  out.correlations = correlations_from_scatter(out_dir / "pma_scatter.csv");
  write_correlations(out.correlations, out_dir / "pma_correlations.csv");
  manifest.files.push_back("pma_correlations.csv");
  manifest.finished = utc_timestamp();
  write_manifest(manifest, out_dir);
  return out;
}

std::vector<double> correlations_from_scatter(const fs::path& scatter_csv, int max_r) {
  std::ifstream in(scatter_csv);
  if (!in) throw IoError("cannot read " + scatter_csv.string());
  std::string line;
  if (!std::getline(in, line) || line != kPmaScatterHeader) throw IoError("scatter header mismatch");
  std::vector<double> test, reg;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw IoError("scatter row has wrong column count");
    try {
      test.push_back(std::stod(cells[3]));
      reg.push_back(std::stod(cells[4]));
    } catch (const std::exception&) {
      throw IoError("unparsable scatter row: " + line);
    }
  }
  std::vector<double> corr;
  for (int r = 1; r <= max_r; ++r) {
    std::vector<double> x;
    for (double v : reg) x.push_back(std::pow(v, r));
    corr.push_back(pearson(test, x));
  }
  return corr;
}

void write_correlations(const std::vector<double>& corr, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kCorrelationHeader << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < corr.size(); ++i) out << i + 1 << "," << corr[i] << "\n";
}

VerifySuite run_verify_suite(const fs::path& out_dir, std::uint64_t seed, std::ostream* progress) {
  fs::create_directories(out_dir);
  VerifySuite suite;
  bool ok = true;
  nlohmann::json j;
  j["toolkit_version"] = kVersion;
  j["seed"] = seed;
  j["koopman"] = nlohmann::json::array();
  for (double a : {0.5, 1.0, 2.0}) {
    const KoopmanAuditResult r = koopman_audit(Activation::Tanh, a, 200, derive_seed(seed, "koopman"));
    const bool pass = r.margin >= 0.0 && std::abs(r.grid_sup - r.closed_form) <= 1e-6 * r.closed_form;
    ok = ok && pass;
    j["koopman"].push_back({{"a", a}, {"empirical_norm", r.empirical_norm}, {"bound", r.bound},
                            {"grid_sup", r.grid_sup}, {"closed_form", r.closed_form}, {"pass", pass}});
    suite.koopman.push_back(r);
    if (progress) *progress << "koopman a=" << a << " empirical=" << r.empirical_norm << " bound=" << r.bound << "\n";
  }

  const DomainBox box = DomainBox::unit(2);
  const std::uint64_t adj_seed = derive_seed(seed, "adjoint");
  for (std::size_t n : {50, 100, 200}) {
    const QuadratureGrid g = QuadratureGrid::uniform(box, n);
    const TestFunction t = TestFunction::normalized({0.5, 0.5}, 4.0, g);
    suite.adjoint_refinement.push_back(adjoint_identity_check(t, g, 20, adj_seed).max_discrepancy);
  }
  const QuadratureGrid grid = QuadratureGrid::uniform(box, 50);
  const TestFunction tf = TestFunction::normalized({0.5, 0.5}, 4.0, grid);
  suite.adjoint_discrepancy = suite.adjoint_refinement[0];
  suite.adjoint_affine_discrepancy =
      adjoint_identity_check(tf, {SmoothField::affine({0.7, -1.3}, 0.4)}, grid).max_discrepancy;
  std::vector<SmoothField> fields;
  for (int k = 0; k < 20; ++k) fields.push_back(SmoothField::random(2, 3, derive_seed(seed, "cs-" + std::to_string(k))));
  suite.cauchy_schwarz_slack = cauchy_schwarz_slack(tf, fields, grid);
  bool decay_ok = true;
  for (std::size_t k = 1; k < suite.adjoint_refinement.size(); ++k) {
    decay_ok = decay_ok && suite.adjoint_refinement[k - 1] >= 4.0 * suite.adjoint_refinement[k];
  }
  const bool adj_ok = suite.adjoint_affine_discrepancy < 1e-4 && decay_ok && suite.cauchy_schwarz_slack <= 1e-12;
  ok = ok && adj_ok;
  j["adjoint"] = {{"grid", 50}, {"c", 4.0}, {"max_discrepancy", suite.adjoint_discrepancy},
                  {"affine_discrepancy", suite.adjoint_affine_discrepancy},
                  {"refinement_grids", {50, 100, 200}}, {"refinement_discrepancy", suite.adjoint_refinement},
                  {"cauchy_schwarz_excess", suite.cauchy_schwarz_slack}, {"pass", adj_ok}};
  if (progress) {
    *progress << "adjoint identity affine=" << suite.adjoint_affine_discrepancy << " random 50/100/200="
              << suite.adjoint_refinement[0] << "/" << suite.adjoint_refinement[1] << "/" << suite.adjoint_refinement[2]
              << "\n";
  }

  j["rademacher"] = nlohmann::json::array();
  for (auto& [name, cfg] : default_audit_configs(seed)) {
    AuditReport rep = run_rademacher_audit(cfg);
    rep.name = name;
    const bool pass = rep.result.pass && !rep.corrupted.pass;
    ok = ok && pass;
    j["rademacher"].push_back(nlohmann::json::parse(audit_report_json(rep)));
    if (progress) {
      *progress << "rademacher " << name << " estimate=" << rep.estimate.estimate << " bound=" << rep.bound.bound
                << " corrupted=" << rep.corrupted.bound << (pass ? " PASS" : " FAIL") << "\n";
    }
    suite.audits.push_back(std::move(rep));
  }
  suite.all_pass = ok;
  j["all_pass"] = ok;
  std::ofstream(out_dir / "verify.json") << j.dump(2) << "\n";
  return suite;
}

}  // namespace kpinn
