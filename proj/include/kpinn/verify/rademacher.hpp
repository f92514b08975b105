#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kpinn/bound/bound_report.hpp"
#include "kpinn/network/mlp.hpp"
#include "kpinn/operators/pde_operator.hpp"
#include "kpinn/quadrature/quadrature.hpp"

namespace kpinn {

/// Finite sample of networks, each satisfying |det W_l^T W_l|^{-1/4} <= D.
struct ParamFamily {
  std::vector<MlpParams> members;
  double theta_constant = 2.0;  // D
  std::uint64_t seed = 0;
  /// Number of 1.25x weight rescales needed to enter Theta.
  std::size_t rescales = 0;
};

/// max_l |det W_l^T W_l|^{-1/4}, with |det|^{1/4} := prod_k (s_k + 1e-8)^{1/2}.
double theta_value(const MlpParams& params);
bool satisfies_theta(const MlpParams& params, double theta_constant);

/// Glorot draws; each weight matrix is scaled by 1.25 until it satisfies the
/// constraint. Throws NumericError if 200 rescales do not suffice.
ParamFamily make_family(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts,
                        std::size_t size, double theta_constant, std::uint64_t seed);

/// Throws DomainError when a member violates the constraint or the family is empty.
void verify_family(const ParamFamily& family);

struct RademacherEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

/// Scalar weak outputs V_theta(x_n) (summed over residual channels) for every
/// member: (members x N).
Eigen::MatrixXd family_weak_values(const ParamFamily& family, const InputNormalizer& normalizer,
                                   const PdeOperator& op, const Eigen::MatrixXd& test_mat,
                                   const QuadratureGrid& grid, std::size_t* clamp_events = nullptr);

/// mean over draws of max_members (1/N) sum_n eps_n V(member, n), eps_n = +-1.
RademacherEstimate empirical_rademacher(const Eigen::MatrixXd& values, std::size_t draws, std::uint64_t seed);

RademacherEstimate empirical_rademacher(const ParamFamily& family, const InputNormalizer& normalizer,
                                        const PdeOperator& op, const Eigen::MatrixXd& test_mat,
                                        const QuadratureGrid& grid, std::size_t draws, std::uint64_t seed);

/// What an estimate or bound was computed from.
struct Provenance {
  std::string op;
  std::size_t N = 0;
  std::uint64_t collocation_seed = 0;
  double F = 0.0;

  bool operator==(const Provenance&) const = default;
};

struct FamilyBound {
  double bound = 0.0;      // max over members
  double log_bound = 0.0;
  BoundReport worst;       // member attaining the max
  Provenance provenance;
};

FamilyBound family_bound(const ParamFamily& family, const BoundInputs& inputs, const Provenance& prov);

struct AuditResult {
  bool pass = false;
  double margin = 0.0;  // bound - (estimate - 3 stderr)
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
};

/// pass iff estimate - 3 stderr <= bound. Throws DomainError on mismatched provenance.
AuditResult audit_bound(const RademacherEstimate& est, const Provenance& est_prov, const FamilyBound& bound);
/// Without provenance: plain comparison against a bound value.
AuditResult audit_bound(const RademacherEstimate& est, double bound);

/// One end-to-end audit on a tiny instance.
struct AuditConfig {
  OperatorKind kind = OperatorKind::NavierStokes2D;
  std::vector<std::size_t> hidden = {4};
  Activation activation = Activation::Tanh;
  std::size_t N = 5;
  std::size_t family_size = 50;
  std::size_t draws = 4000;
  double concentration = 4.0;
  std::size_t grid = 25;
  std::size_t time_nodes = 10;
  double theta_constant = 2.0;
  int taylor_order = 2;
  double expansion_point = 1.0;
  double taylor_radius = 0.9;
  std::uint64_t seed = 0;
};

struct AuditReport {
  std::string name;
  AuditConfig config;
  RademacherEstimate estimate;
  FamilyBound bound;
  AuditResult result;
  /// Same audit with F replaced by F / 1e6; expected to fail.
  AuditResult corrupted;
  std::size_t rescales = 0;
  std::size_t clamp_events = 0;
  double epsilon = 0.0;
  /// Largest quadrature L2 norm of a member on the grid, for comparison with U.
  double max_l2_norm = 0.0;
  std::vector<std::string> notes;
};

/// Centres are drawn so every support ball lies inside the domain.
AuditReport run_rademacher_audit(const AuditConfig& config);

/// Shipped tiny configurations: navier-stokes (poly), derivative-sum (linear),
/// monge-ampere (nonlinear-linear).
std::vector<std::pair<std::string, AuditConfig>> default_audit_configs(std::uint64_t seed);

std::string audit_report_json(const AuditReport& report);

}  // namespace kpinn
