#include "kpinn/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kpinn/bound/koopman.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"
#include "kpinn/network/snapshot.hpp"
#include "kpinn/operators/adjoint_terms.hpp"
#include "kpinn/operators/taylor.hpp"
#include "kpinn/train/adam.hpp"

namespace kpinn {

const LogRow& ExperimentLog::last() const {
  if (rows.empty()) throw Error("empty experiment log");
  return rows.back();
}

std::string log_to_csv(const ExperimentLog& log) {
  std::ostringstream os;
  os << kLogCsvHeader << "\n" << std::setprecision(17);
  for (const auto& r : log.rows) {
    os << r.step << "," << r.total << "," << r.res << "," << r.bc << "," << r.p << "," << r.reg << ","
       << r.test << "\n";
  }
  return os.str();
}

void write_log_csv(const ExperimentLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write log " + path.string());
  out << log_to_csv(log);
}

std::vector<LogRow> read_log_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kLogCsvHeader) throw IoError("log header mismatch in " + path.string());
  std::vector<LogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw IoError("log row has " + std::to_string(cells.size()) + " columns");
    LogRow r;
    try {
      r.step = std::stoull(cells[0]);
      r.total = std::stod(cells[1]);
      r.res = std::stod(cells[2]);
      r.bc = std::stod(cells[3]);
      r.p = std::stod(cells[4]);
      r.reg = std::stod(cells[5]);
      r.test = std::stod(cells[6]);
    } catch (const std::exception&) {
      throw IoError("unparsable log row: " + line);
    }
    if (!rows.empty() && r.step <= rows.back().step) throw IoError("log steps are not increasing");
    rows.push_back(r);
  }
  return rows;
}

TrainingProblem build_problem(const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  TrainingProblem p{config.make_operator(), config.domain(), {}, config.make_grid(), {}, {}, {}, {}, {}, {}};
  p.normalizer = p.box.normalizer();
  p.train_points = draw_collocation(p.box, config.n_collocation, derive_seed(seed, "train"));
  p.test_points = draw_collocation(p.box, config.n_test, derive_seed(seed, "test"));
  p.train_tfs = make_test_functions(p.train_points, config.concentration, p.grid);
  p.train_matrix = test_matrix(p.train_tfs, p.grid);
  if (config.mode == TrainMode::Vpinn) {
    p.test_matrix = test_matrix(make_test_functions(p.test_points, config.concentration, p.grid), p.grid);
  }
  if (config.kind == OperatorKind::NavierStokes2D) {
    p.boundary = cavity_boundary(config.n_boundary, config.lid_u, config.lid_v);
  } else {
    p.boundary = pma_boundary(config.n_boundary, config.boundary_value);
  }
  return p;
}

StepEvaluation evaluate_step(const TrainingProblem& problem, const TrainConfig& config,
                             const MlpParams& params, bool with_gradient, bool with_test) {
  const double w = with_gradient ? 1.0 : 0.0;
  GradTape tape(params);
  StepEvaluation ev;
  LogRow& row = ev.row;
  if (config.mode == TrainMode::Vpinn) {
    const WeakResidualTerm t =
        record_vpinn(tape, problem.normalizer, problem.op, problem.train_matrix, problem.grid, w);
    row.res = t.loss;
    ev.clamp_events += t.clamp_events;
    if (with_test) row.test = projected_loss(problem.test_matrix * t.nodal);
  } else {
    row.res = record_pinn(tape, problem.normalizer, problem.op, problem.train_points.points, w, &ev.clamp_events);
    if (with_test) {
      const ResidualBatch r = network_residual(problem.op, params, problem.normalizer, problem.test_points.points);
      row.test = pinn_loss_from_residual(r.values);
    }
  }
  row.bc = record_bc(tape, problem.normalizer, problem.boundary, w * config.lambda_bc);
  if (problem.op.kind == OperatorKind::NavierStokes2D) {
    row.p = record_pressure_pin(tape, problem.normalizer, w * config.lambda_p);
  }
  // The regularizer is always logged; off the log steps it is only needed when on.
  const bool reg_grad = with_gradient && config.regularize;
  if (config.regularize || with_test) {
    const RegularizerValue reg = regularizer(params, reg_grad);
    row.reg = reg.value;
    if (reg_grad) tape.add_direct(config.lambda_k() * reg.gradient);
  }
  row.total = row.res + config.lambda_bc * row.bc + config.lambda_p * row.p + config.lambda_k() * row.reg;
  if (!std::isfinite(row.total)) throw NumericError("non-finite loss");
  if (with_gradient) {
    tape.terminate(row.total);
    ev.gradient = loss_param_grad(tape);
  }
  return ev;
}

BoundReport final_bound_report(const TrainingProblem& problem, const TrainConfig& config,
                               const MlpParams& params) {
  PdeOperator op = problem.op;
  BoundInputs in;
  in.N = problem.train_points.size();
  in.theorem = op.theorem();
  in.r = op.nonlinearity_order;
  std::vector<std::string> notes;
  if (op.kind == OperatorKind::ParabolicMongeAmpere) {
    // Remainder of log about z0 over the observed range of det D^2u on the grid.
    const JetBatch jets = propagate_jets(params, problem.normalizer, problem.grid.nodes(), 2);
    const double z0 = op.expansion_point;
    double radius = 0.0;
    for (std::size_t b = 0; b < jets.batch(); ++b) {
      const double det = jets.hessian(b, 0, 0, 0) * jets.hessian(b, 0, 1, 1) -
                         jets.hessian(b, 0, 0, 1) * jets.hessian(b, 0, 1, 0);
      radius = std::max(radius, std::abs(det - z0));
    }
    const double cap = std::min(config.taylor_radius, 1.0 - 1e-6) * z0;
    if (radius > cap) {
      notes.push_back("det range exceeds the Taylor radius cap; epsilon covers |z - z0| <= " + std::to_string(cap));
      radius = cap;
    }
    radius = std::max(radius, 1e-3 * z0);
    const auto derivs = log_derivatives(z0, op.nonlinearity_order);
    const auto rem = estimate_taylor_remainder([](double z) { return std::log(z); }, derivs, z0, radius, 2001);
    op.remainder_bound = rem.epsilon;
    in.expansion_point = z0;
    notes.push_back("log expanded about z0 = " + std::to_string(z0) + ", radius " + std::to_string(radius));
  }
  in.epsilon = op.remainder_bound;
  in.F = estimate_F(op, problem.train_tfs, problem.grid).F;
  BoundReport rep = assemble_bound(params, in);
  rep.notes.insert(rep.notes.end(), notes.begin(), notes.end());
  rep.notes.push_back("alpha(f_l) := 1");
  return rep;
}

ExperimentLog train(const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  const TrainingProblem problem = build_problem(config, config.seed);
  ExperimentLog log;
  log.seed = config.seed;
  log.config_hash = config_hash(config);
  MlpParams params = init_glorot(config.layer_dims(), config.layer_activations(), derive_seed(config.seed, "init"));
  AdamState state = adam_init(params.flatten());
  AdamOptions opt;
  opt.learning_rate = config.learning_rate;

  auto emit = [&](const LogRow& row) {
    log.rows.push_back(row);
    if (options.on_log) options.on_log(row);
  };
  auto snapshot = [&](const std::string& name) {
    if (options.snapshot_dir.empty()) return;
    std::filesystem::create_directories(options.snapshot_dir);
    save_snapshot(options.snapshot_dir / name, Snapshot{params, problem.normalizer});
  };

  try {
    for (std::size_t t = 0; t < config.steps; ++t) {
      const bool log_now = t % config.log_every == 0;
      StepEvaluation ev = evaluate_step(problem, config, params, true, log_now);
      ev.row.step = t;
      log.clamp_events += ev.clamp_events;
      if (log_now) emit(ev.row);
      if (config.snapshot_every > 0 && t > 0 && t % config.snapshot_every == 0) {
        snapshot("step_" + std::to_string(t) + ".json");
      }
      state = adam_step(state, ev.gradient, opt);
      params = params.with_flat(state.params);
    }
    StepEvaluation ev = evaluate_step(problem, config, params, false, true);
    ev.row.step = config.steps;
    log.clamp_events += ev.clamp_events;
    emit(ev.row);
  } catch (const Error& e) {
    log.aborted = true;
    log.error = std::string(e.kind()) + ": " + e.what();
  }
  log.final_params = params;
  snapshot("final.json");
  if (options.compute_bound && !log.aborted) {
    log.final_bound = final_bound_report(problem, config, params);
    log.has_bound = true;
  }
  return log;
}

}  // namespace kpinn
