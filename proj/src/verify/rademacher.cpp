#include "kpinn/verify/rademacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>
#include <json.hpp>

#include "kpinn/bound/koopman.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"
#include "kpinn/operators/adjoint_terms.hpp"
#include "kpinn/operators/taylor.hpp"

namespace kpinn {

namespace {

// log |det W^T W|^{1/4} with the singular-value offset.
double log_det_quarter(const Eigen::MatrixXd& w) {
  const SingularSummary s = geo_mean_singular(w);
  return 0.5 * s.log_sum;
}

}  // namespace

double theta_value(const MlpParams& params) {
  double worst = 0.0;
  for (const auto& layer : params.layers) worst = std::max(worst, std::exp(-log_det_quarter(layer.weight)));
  return worst;
}

bool satisfies_theta(const MlpParams& params, double theta_constant) {
  return theta_value(params) <= theta_constant;
}

ParamFamily make_family(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts,
                        std::size_t size, double theta_constant, std::uint64_t seed) {
  if (size == 0) throw DomainError("family size must be positive");
  if (!(theta_constant > 0.0)) throw DomainError("Theta constant must be positive");
  ParamFamily fam;
  fam.theta_constant = theta_constant;
  fam.seed = seed;
  const double target = -std::log(theta_constant);
  for (std::size_t i = 0; i < size; ++i) {
    MlpParams p = init_glorot(dims, acts, derive_seed(seed, "member-" + std::to_string(i)));
    for (auto& layer : p.layers) {
      std::size_t tries = 0;
      while (log_det_quarter(layer.weight) < target) {
        if (++tries > 200) throw NumericError("could not rescale a family member into Theta");
        layer.weight *= 1.25;
        ++fam.rescales;
      }
    }
    fam.members.push_back(std::move(p));
  }
  verify_family(fam);
  return fam;
}

void verify_family(const ParamFamily& family) {
  if (family.members.empty()) throw DomainError("empty parameter family");
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    if (!satisfies_theta(family.members[i], family.theta_constant)) {
      throw DomainError("family member " + std::to_string(i) + " violates the Theta constraint");
    }
  }
}

Eigen::MatrixXd family_weak_values(const ParamFamily& family, const InputNormalizer& normalizer,
                                   const PdeOperator& op, const Eigen::MatrixXd& test_mat,
                                   const QuadratureGrid& grid, std::size_t* clamp_events) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(family.members.size()), test_mat.rows());
  for (std::size_t m = 0; m < family.members.size(); ++m) {
    const ResidualBatch r = network_residual(op, family.members[m], normalizer, grid.nodes());
    if (clamp_events) *clamp_events += r.clamp_events;
    out.row(static_cast<Eigen::Index>(m)) = (test_mat * r.values.rowwise().sum()).transpose();
  }
  return out;
}

RademacherEstimate empirical_rademacher(const Eigen::MatrixXd& values, std::size_t draws, std::uint64_t seed) {
  if (values.rows() == 0 || values.cols() == 0) throw DomainError("empty value matrix");
  if (draws < 2) throw DomainError("need at least two Rademacher draws");
  Rng rng(seed);
  const double n = static_cast<double>(values.cols());
  Eigen::VectorXd eps(values.cols());
  // Welford: a constant sup (e.g. a sign-symmetric pair) gives exactly zero spread.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.rademacher();
    const double s = (values * eps).maxCoeff() / n;
    const double delta = s - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (s - mean);
  }
  const double dn = static_cast<double>(draws);
  RademacherEstimate est;
  est.estimate = mean;
  est.std_error = std::sqrt(m2 / (dn - 1.0) / dn);
  est.draws = draws;
  est.seed = seed;
  return est;
}

RademacherEstimate empirical_rademacher(const ParamFamily& family, const InputNormalizer& normalizer,
                                        const PdeOperator& op, const Eigen::MatrixXd& test_mat,
                                        const QuadratureGrid& grid, std::size_t draws, std::uint64_t seed) {
  return empirical_rademacher(family_weak_values(family, normalizer, op, test_mat, grid), draws, seed);
}

FamilyBound family_bound(const ParamFamily& family, const BoundInputs& inputs, const Provenance& prov) {
  verify_family(family);
  FamilyBound fb;
  fb.provenance = prov;
  fb.log_bound = -std::numeric_limits<double>::infinity();
  for (const auto& member : family.members) {
    BoundReport rep = assemble_bound(member, inputs);
    if (rep.log_assembled_bound > fb.log_bound) {
      fb.log_bound = rep.log_assembled_bound;
      fb.bound = rep.assembled_bound;
      fb.worst = std::move(rep);
    }
  }
  return fb;
}

AuditResult audit_bound(const RademacherEstimate& est, double bound) {
  AuditResult r;
  r.estimate = est.estimate;
  r.std_error = est.std_error;
  r.bound = bound;
  r.margin = bound - (est.estimate - 3.0 * est.std_error);
  r.pass = r.margin >= 0.0;
  return r;
}

AuditResult audit_bound(const RademacherEstimate& est, const Provenance& est_prov, const FamilyBound& bound) {
  if (!(est_prov == bound.provenance)) throw DomainError("estimate and bound have mismatched provenance");
  return audit_bound(est, bound.bound);
}

AuditReport run_rademacher_audit(const AuditConfig& cfg) {
  AuditReport rep;
  rep.config = cfg;
  PdeOperator op;
  switch (cfg.kind) {
    case OperatorKind::NavierStokes2D:
      op = PdeOperator::navier_stokes();
      break;
    case OperatorKind::ParabolicMongeAmpere:
      op = PdeOperator::monge_ampere({}, cfg.taylor_order, cfg.expansion_point);
      break;
    case OperatorKind::DerivativeSum:
      op = PdeOperator::derivative_sum(2);
      break;
  }
  const DomainBox box = DomainBox::unit(op.input_dim());
  const InputNormalizer normalizer = box.normalizer();
  const QuadratureGrid grid =
      op.input_dim() == 3 ? QuadratureGrid(box, {cfg.grid, cfg.grid, cfg.time_nodes})
                          : QuadratureGrid(box, std::vector<std::size_t>(op.input_dim(), cfg.grid));

  std::vector<std::size_t> dims{op.input_dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(op.output_dim());
  std::vector<Activation> acts(cfg.hidden.size(), cfg.activation);
  acts.push_back(Activation::None);

  const ParamFamily family = make_family(dims, acts, cfg.family_size, cfg.theta_constant,
                                         derive_seed(cfg.seed, "family"));
  rep.rescales = family.rescales;

  const std::uint64_t colloc_seed = derive_seed(cfg.seed, "centres");
  const CollocationSet centres = draw_collocation(box, cfg.N, 1.0 / cfg.concentration + 1e-9, colloc_seed);
  const auto tfs = make_test_functions(centres, cfg.concentration, grid);
  const Eigen::MatrixXd tm = test_matrix(tfs, grid);

  if (op.kind == OperatorKind::ParabolicMongeAmpere) {
    // Remainder of log about z0 over the det range seen by the family.
    const double z0 = op.expansion_point;
    double radius = 0.0;
    for (const auto& m : family.members) {
      const JetBatch j = propagate_jets(m, normalizer, grid.nodes(), 2);
      for (std::size_t b = 0; b < j.batch(); ++b) {
        const double det = j.hessian(b, 0, 0, 0) * j.hessian(b, 0, 1, 1) - j.hessian(b, 0, 0, 1) * j.hessian(b, 0, 1, 0);
        radius = std::max(radius, std::abs(det - z0));
      }
    }
    const double cap = std::min(cfg.taylor_radius, 1.0 - 1e-6) * z0;
    if (radius > cap) {
      rep.notes.push_back("det range exceeds the Taylor radius cap; clamped points fall outside the expansion");
      radius = cap;
    }
    radius = std::max(radius, 1e-3 * z0);
    const auto rem = estimate_taylor_remainder([](double z) { return std::log(z); },
                                               log_derivatives(z0, op.nonlinearity_order), z0, radius, 2001);
    op.remainder_bound = rem.epsilon;
  }
  rep.epsilon = op.remainder_bound;

  rep.estimate = empirical_rademacher(family_weak_values(family, normalizer, op, tm, grid, &rep.clamp_events),
                                      cfg.draws, derive_seed(cfg.seed, "signs"));

  const double F = estimate_F(op, tfs, grid).F;
  const Provenance prov{to_string(op.kind), cfg.N, colloc_seed, F};
  BoundInputs in;
  in.F = F;
  in.r = op.nonlinearity_order;
  in.epsilon = op.remainder_bound;
  in.theorem = op.theorem();
  in.N = cfg.N;
  in.expansion_point = op.kind == OperatorKind::ParabolicMongeAmpere ? op.expansion_point : 0.0;
  rep.bound = family_bound(family, in, prov);
  rep.result = audit_bound(rep.estimate, prov, rep.bound);

  BoundInputs bad = in;
  bad.F = F / 1e6;
  Provenance bad_prov = prov;
  bad_prov.F = bad.F;
  const FamilyBound corrupted = family_bound(family, bad, bad_prov);
  Provenance est_bad = prov;
  est_bad.F = bad.F;
  rep.corrupted = audit_bound(rep.estimate, est_bad, corrupted);

  for (const auto& m : family.members) {
    const Tensor u = evaluate(m, normalizer, grid.nodes());
    double s = 0.0;
    for (double v : u.data()) s += v * v;
    rep.max_l2_norm = std::max(rep.max_l2_norm, std::sqrt(s * grid.weight()));
  }
  rep.notes.push_back("the family is a finite subset of Theta, so the audit can confirm but not refute the bound");
  return rep;
}

std::vector<std::pair<std::string, AuditConfig>> default_audit_configs(std::uint64_t seed) {
  AuditConfig ns;
  ns.kind = OperatorKind::NavierStokes2D;
  ns.seed = seed;
  AuditConfig lin;
  lin.kind = OperatorKind::DerivativeSum;
  lin.seed = seed;
  AuditConfig pma;
  pma.kind = OperatorKind::ParabolicMongeAmpere;
  pma.grid = 16;
  pma.time_nodes = 16;
  pma.seed = seed;
  return {{"navier-stokes-poly", ns}, {"derivative-sum-linear", lin}, {"monge-ampere-nonlinear-linear", pma}};
}

std::string audit_report_json(const AuditReport& rep) {
  auto finite = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["name"] = rep.name;
  j["operator"] = to_string(rep.config.kind);
  j["theorem"] = to_string(rep.bound.worst.theorem);
  j["N"] = rep.config.N;
  j["family_size"] = rep.config.family_size;
  j["draws"] = rep.estimate.draws;
  j["seed"] = rep.config.seed;
  j["concentration"] = rep.config.concentration;
  j["theta_constant"] = rep.config.theta_constant;
  j["rescales"] = rep.rescales;
  j["clamp_events"] = rep.clamp_events;
  j["epsilon"] = rep.epsilon;
  j["F"] = rep.bound.provenance.F;
  j["estimate"] = rep.estimate.estimate;
  j["std_error"] = rep.estimate.std_error;
  j["bound"] = finite(rep.bound.bound);
  j["log_bound"] = finite(rep.bound.log_bound);
  j["norm_proxy_of_worst"] = finite(rep.bound.worst.norm_proxy);
  j["max_l2_norm"] = rep.max_l2_norm;
  j["pass"] = rep.result.pass;
  j["margin"] = finite(rep.result.margin);
  j["corrupted_bound"] = finite(rep.corrupted.bound);
  j["corrupted_pass"] = rep.corrupted.pass;
  j["notes"] = rep.notes;
  return j.dump(2);
}

}  // namespace kpinn
