// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
//
//   kpinn_acceptance --out DIR [--ns-dir DIR] [--pma-dir DIR] [--strict]
//
// --ns-dir / --pma-dir reuse finished reproductions instead of rerunning them.
// The exit code is 0 once every criterion has been evaluated; --strict makes
// any FAIL exit with 4.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpinn/app/experiments.hpp"
#include "kpinn/autodiff/fd_check.hpp"
#include "kpinn/autodiff/jets.hpp"
#include "kpinn/bound/bound_report.hpp"
#include "kpinn/bound/koopman.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"
#include "kpinn/train/losses.hpp"
#include "kpinn/verify/adjoint_check.hpp"
#include "kpinn/verify/koopman_audit.hpp"
#include "kpinn/verify/rademacher.hpp"

namespace fs = std::filesystem;
using namespace kpinn;

namespace {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(4) << v;
  return ss.str();
}

void report(std::vector<Criterion>& out, Criterion c) {
  std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << std::endl;
  out.push_back(std::move(c));
}

std::vector<NsSummaryRow> read_ns_summary(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line != kNsSummaryHeader) throw IoError("bad header in " + path.string());
  std::vector<NsSummaryRow> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string mode, reg, runs, m, s;
    std::getline(ss, mode, ',');
    std::getline(ss, reg, ',');
    std::getline(ss, runs, ',');
    std::getline(ss, m, ',');
    std::getline(ss, s, ',');
    NsSummaryRow r;
    r.mode = mode == "pinn" ? TrainMode::Pinn : TrainMode::Vpinn;
    r.regularized = reg == "on";
    r.runs = std::stoul(runs);
    r.mean_final_test = std::stod(m);
    r.std_final_test = std::stod(s);
    rows.push_back(r);
  }
  return rows;
}

std::vector<NsSummaryRow> ns_summary(const fs::path& out, const std::string& reuse) {
  if (!reuse.empty()) {
    read_manifest(reuse);
    return read_ns_summary(fs::path(reuse) / "ns_summary.csv");
  }
  return reproduce_ns(default_ns_config(), out / "ns", &std::cerr).summary;
}

void ns_trend(std::vector<Criterion>& out, const std::vector<NsSummaryRow>& rows, TrainMode mode,
              const std::string& name) {
  const NsSummaryRow* on = nullptr;
  const NsSummaryRow* off = nullptr;
  for (const auto& r : rows) {
    if (r.mode != mode) continue;
    (r.regularized ? on : off) = &r;
  }
  if (!on || !off) {
    report(out, {name, false, "missing summary rows"});
    return;
  }
  const bool pass = on->runs >= 3 && off->runs >= 3 && on->mean_final_test < off->mean_final_test;
  report(out, {name, pass,
               "mean final test loss reg on " + fmt(on->mean_final_test) + " (sd " + fmt(on->std_final_test) +
                   ") vs off " + fmt(off->mean_final_test) + " (sd " + fmt(off->std_final_test) + "), " +
                   std::to_string(on->runs) + " seeds"});
}

void pma_correlation(std::vector<Criterion>& out, const fs::path& dir, const std::string& reuse) {
  fs::path scatter;
  if (!reuse.empty()) {
    read_manifest(reuse);
    scatter = fs::path(reuse) / "pma_scatter.csv";
  } else {
    reproduce_pma(default_pma_config(), dir / "pma", &std::cerr);
    scatter = dir / "pma" / "pma_scatter.csv";
  }
  std::size_t runs = 0;
  {
    std::ifstream in(scatter);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) ++runs;
  }
  const std::vector<double> c = correlations_from_scatter(scatter);
  const bool pass = runs >= 30 && c[0] > 0.0 && c[1] >= c[0] && c[2] >= c[1];
  report(out, {"pma-correlation-monotonic", pass,
               std::to_string(runs) + " runs, pearson r=1,2,3: " + fmt(c[0]) + ", " + fmt(c[1]) + ", " + fmt(c[2])});
}

void koopman(std::vector<Criterion>& out) {
  bool pass = true;
  std::string detail;
  for (double a : {0.5, 1.0, 2.0}) {
    const KoopmanAuditResult r = koopman_audit(Activation::Tanh, a, 200, 11);
    const double gap = std::abs(r.grid_sup - r.closed_form);
    pass = pass && r.margin >= 0.0 && gap <= 1e-6 * r.closed_form;
    detail += "a=" + fmt(a) + " norm " + fmt(r.empirical_norm) + " <= " + fmt(r.bound) + ", sup gap " + fmt(gap) + "; ";
  }
  report(out, {"koopman-norm-audit", pass, detail});
}

void rademacher(std::vector<Criterion>& out, nlohmann::json& extra) {
  bool holds = true, inverts = true;
  std::string detail;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    for (const auto& [name, cfg] : default_audit_configs(seed)) {
      const AuditReport r = run_rademacher_audit(cfg);
      holds = holds && r.result.pass;
      inverts = inverts && !r.corrupted.pass;
      extra["rademacher"].push_back(nlohmann::json::parse(audit_report_json(r)));
      if (seed == 0)
        detail += name + ": est " + fmt(r.estimate.estimate) + " bound " + fmt(r.bound.bound) + " corrupted " +
                  fmt(r.corrupted.bound) + (r.corrupted.pass ? " (not inverted)" : " (inverted)") + "; ";
    }
  }
  report(out, {"rademacher-bound-holds", holds, "seeds 0-2, " + detail});
  report(out, {"rademacher-corrupted-inversion", inverts, "F/1e6 must fail every audit"});
}

void adjoint(std::vector<Criterion>& out) {
  const std::vector<SmoothField> affine{SmoothField::affine({0.7, -1.3}, 0.4)};
  std::vector<double> rand, aff;
  for (std::size_t n : {50u, 100u, 200u}) {
    const QuadratureGrid g = QuadratureGrid::uniform(DomainBox::unit(2), n);
    const TestFunction tf = TestFunction::normalized({0.5, 0.5}, 4.0, g);
    rand.push_back(adjoint_identity_check(tf, g, 20, 5).max_discrepancy);
    aff.push_back(adjoint_identity_check(tf, affine, g).max_discrepancy);
  }
  bool pass = aff[0] < 1e-4;
  for (std::size_t i = 1; i < rand.size(); ++i) pass = pass && rand[i] <= rand[i - 1] / 4.0 && aff[i] <= aff[i - 1] / 4.0;
  report(out, {"adjoint-identity", pass,
               "affine 50/100/200: " + fmt(aff[0]) + ", " + fmt(aff[1]) + ", " + fmt(aff[2]) +
                   "; random 50/100/200: " + fmt(rand[0]) + ", " + fmt(rand[1]) + ", " + fmt(rand[2])});
}

// Glorot weights with random biases.
MlpParams random_net(const std::vector<std::size_t>& dims, Activation act, Rng& rng) {
  std::vector<Activation> acts(dims.size() - 1, act);
  acts.back() = Activation::None;
  MlpParams p = init_glorot(dims, acts, rng.next());
  for (auto& l : p.layers)
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = 0.3 * rng.uniform(-1.0, 1.0);
  return p;
}

Tensor random_points(std::size_t n, std::size_t d, Rng& rng) {
  Tensor x({n, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.uniform(0.05, 0.95);
  return x;
}

double normwise(const FdCheckResult& r) { return (r.analytic - r.numeric).norm() / (r.numeric.norm() + 1e-12); }

void autodiff(std::vector<Criterion>& out) {
  double worst = 0.0;
  std::string worst_term;
  bool symmetric = true;
  std::size_t checks = 0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    Rng rng(derive_seed(inst, "acceptance-autodiff"));
    const OperatorKind kind = static_cast<OperatorKind>(inst % 3);
    const Activation act = rng.uniform(0.0, 1.0) < 0.5 ? Activation::Tanh : Activation::Sigmoid;
    PdeOperator op = kind == OperatorKind::NavierStokes2D   ? PdeOperator::navier_stokes()
                     : kind == OperatorKind::DerivativeSum ? PdeOperator::derivative_sum(2)
                                                            : PdeOperator::monge_ampere();
    const std::size_t in = op.input_dim(), outs = op.output_dim();
    std::vector<std::size_t> dims{in};
    const std::size_t depth = 1 + rng.next() % 2;
    for (std::size_t k = 0; k < depth; ++k) dims.push_back(2 + rng.next() % 4);
    dims.push_back(outs);
    const MlpParams p = random_net(dims, act, rng);
    const QuadratureGrid grid = in == 2 ? QuadratureGrid::uniform(DomainBox::unit(2), 8)
                                        : QuadratureGrid(DomainBox::unit(3), {5, 5, 3});
    const InputNormalizer norm = grid.box().normalizer();
    const Eigen::MatrixXd tm = test_matrix(make_test_functions(draw_collocation(grid.box(), 3, inst), 0.5, grid), grid);
    const Tensor x = random_points(4, in, rng);
    BoundarySet bc;
    if (kind == OperatorKind::NavierStokes2D) {
      bc = cavity_boundary(8);
    } else if (kind == OperatorKind::ParabolicMongeAmpere) {
      bc = pma_boundary(8, 0.2);
    } else {
      bc.points = random_points(5, 2, rng);
      bc.targets = Eigen::MatrixXd::Constant(5, 1, 0.3);
    }

    auto check = [&](const std::string& term, const std::function<LossValue(const MlpParams&, bool)>& loss) {
      ScalarObjective f{[&](const Eigen::VectorXd& t) { return loss(p.with_flat(t), false).value; },
                        [&](const Eigen::VectorXd& t) { return loss(p.with_flat(t), true).gradient; }};
      const double e = normwise(fd_check_detailed(f, p.flatten(), 1e-6));
      ++checks;
      if (!(e <= worst)) {
        worst = e;
        worst_term = term + "#" + std::to_string(inst);
      }
    };
    check("vpinn", [&](const MlpParams& q, bool g) { return vpinn_loss(q, norm, op, tm, grid, g); });
    check("pinn", [&](const MlpParams& q, bool g) { return pinn_loss(q, norm, op, x, g); });
    check("bc", [&](const MlpParams& q, bool g) { return bc_loss(q, norm, bc, g); });
    if (kind == OperatorKind::NavierStokes2D)
      check("pressure", [&](const MlpParams& q, bool g) { return pressure_pin_loss(q, norm, g); });
    check("regularizer", [&](const MlpParams& q, bool g) {
      const RegularizerValue r = regularizer(q, g);
      return LossValue{r.value, r.gradient, 0};
    });

    const JetBatch j = propagate_jets(p, norm, x, 2);
    for (std::size_t b = 0; b < j.batch(); ++b)
      for (std::size_t o = 0; o < j.out_dim(); ++o)
        for (std::size_t i = 0; i < in; ++i)
          for (std::size_t k = 0; k < i; ++k) symmetric = symmetric && j.hessian(b, o, i, k) == j.hessian(b, o, k, i);
  }
  report(out, {"autodiff-gradients", worst < 1e-4,
               std::to_string(checks) + " gradient checks on 100 instances, worst normwise rel. error " + fmt(worst) +
                   " (" + worst_term + ")"});
  report(out, {"autodiff-hessian-symmetry", symmetric, "exact equality of mixed partials"});
}

void vpinn_limit(std::vector<Criterion>& out) {
  Rng rng(derive_seed(17, "acceptance-limit"));
  const MlpParams p = random_net({2, 8, 1}, Activation::Tanh, rng);
  const PdeOperator op = PdeOperator::derivative_sum(2);
  const InputNormalizer n = InputNormalizer::unit_box(2);
  // centres keep the c = 4 support inside the unit square
  const CollocationSet pts = draw_collocation(DomainBox::unit(2), 5, 0.25 + 1e-9, 3);
  const double pinn = pinn_loss(p, n, op, pts.points, false).value;
  std::vector<double> gaps;
  for (auto [c, nodes] : {std::pair{4.0, 100}, {8.0, 200}, {16.0, 400}}) {
    const QuadratureGrid g = QuadratureGrid::uniform(DomainBox::unit(2), static_cast<std::size_t>(nodes));
    gaps.push_back(std::abs(vpinn_loss(p, n, op, test_matrix(make_test_functions(pts, c, g), g), g, false).value - pinn));
  }
  report(out, {"vpinn-to-pinn-limit", gaps[1] < gaps[0] && gaps[2] < gaps[1],
               "gap at c=4,8,16: " + fmt(gaps[0]) + ", " + fmt(gaps[1]) + ", " + fmt(gaps[2])});
}

void bound_formulas(std::vector<Criterion>& out) {
  const double poly = assemble_from_proxy(BoundTheorem::Polynomial, 1.0, 1, 1.0, 2, 1.0);
  const double nl = assemble_from_proxy(BoundTheorem::NonlinearOfLinear, 1.0, 1, 2.0, 3);
  bool increasing = true;
  for (BoundTheorem t : {BoundTheorem::Polynomial, BoundTheorem::NonlinearOfLinear}) {
    for (double u : {1.01, 1.5, 3.0}) {
      double prev = 0.0;
      for (int r = 1; r <= 8; ++r) {
        const double b = assemble_from_proxy(t, 1.0, 4, u, r);
        increasing = increasing && b > prev;
        prev = b;
      }
    }
  }
  report(out, {"bound-formulas", poly == std::sqrt(5.0) && nl == std::sqrt(149.0) && increasing,
               "poly " + fmt(poly) + ", nonlinear-linear " + fmt(nl) + (increasing ? ", increasing in r" : ", NOT increasing in r")});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpinn acceptance suite"};
  std::string out_dir = "acceptance_out", ns_dir, pma_dir;
  bool strict = false;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--ns-dir", ns_dir, "reuse a finished reproduce-ns output");
  app.add_option("--pma-dir", pma_dir, "reuse a finished reproduce-pma output");
  app.add_flag("--strict", strict, "exit 4 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const fs::path out(out_dir);
  fs::create_directories(out);
  std::vector<Criterion> results;
  nlohmann::json extra;
  try {
    bound_formulas(results);
    koopman(results);
    adjoint(results);
    vpinn_limit(results);
    autodiff(results);
    rademacher(results, extra);
    const std::vector<NsSummaryRow> ns = ns_summary(out, ns_dir);
    ns_trend(results, ns, TrainMode::Vpinn, "ns-regularizer-trend-vpinn");
    ns_trend(results, ns, TrainMode::Pinn, "ns-regularizer-trend-pinn");
    pma_correlation(results, out, pma_dir);
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << "\n";
    return 1;
  }

  nlohmann::json j;
  std::size_t failed = 0;
  for (const auto& c : results) {
    j["criteria"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    failed += c.pass ? 0 : 1;
  }
  j["failed"] = failed;
  j["audits"] = extra;
  std::ofstream(out / "acceptance.json") << j.dump(2) << "\n";
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return strict && failed > 0 ? 4 : 0;
}
