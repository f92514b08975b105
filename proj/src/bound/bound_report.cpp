#include "kpinn/bound/bound_report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kpinn/core/error.hpp"

namespace kpinn {

std::vector<LayerBoundFactors> layer_factors(const MlpParams& params) {
  const auto boxes = propagate_boxes(params);
  std::vector<LayerBoundFactors> out;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const auto& layer = params.layers[l];
    LayerBoundFactors f;
    f.layer = l;
    f.activation = layer.activation;
    f.box = boxes[l];
    f.log_a = log_koopman_factor(layer.activation, f.box.intervals);
    f.a = std::exp(f.log_a);
    f.a_tilde = a_tilde_from_log(f.log_a);
    const SingularSummary s = geo_mean_singular(layer.weight);
    f.geo_mean = s.geo_mean;
    f.singular_values = s.singular_values;
    f.log_det_quarter = 0.5 * s.log_sum;
    out.push_back(std::move(f));
  }
  return out;
}

double final_map_norm(const MlpParams& params, const std::vector<LayerBox>& boxes) {
  const auto& last = params.layers.back();
  const LayerBox& box = boxes.back();
  const double row = box.spectral_norm * box.input_bound;
  double s = 0.0;
  for (Eigen::Index k = 0; k < last.bias.size(); ++k) s += row * row / 3.0 + last.bias(k) * last.bias(k);
  return std::sqrt(s);
}

double assemble_from_proxy(BoundTheorem theorem, double F, std::size_t N, double U, int r,
                           double g_term) {
  if (N == 0) throw DomainError("sample count must be positive");
  if (!(F >= 0.0) || !(U >= 0.0)) throw DomainError("F and U must be nonnegative");
  const double scale = F / std::sqrt(static_cast<double>(N));
  if (theorem == BoundTheorem::Linear) return scale * U;
  if (r < 1) throw DomainError("nonlinearity order must be >= 1");
  const double u2 = U * U;
  double s = 0.0;
  double p = 1.0;
  for (int i = 0; i <= r; ++i) {
    s += p;
    if (i < r) p *= u2;
  }
  s += p;  // U^{2r}
  if (theorem == BoundTheorem::Polynomial) s += g_term * g_term;
  return scale * std::sqrt(s);
}

double log_assemble_from_proxy(BoundTheorem theorem, double F, std::size_t N, double log_u, int r,
                               double g_term) {
  if (N == 0) throw DomainError("sample count must be positive");
  if (!(F > 0.0)) throw DomainError("F must be positive for the log bound");
  const double log_scale = std::log(F) - 0.5 * std::log(static_cast<double>(N));
  if (theorem == BoundTheorem::Linear) return log_scale + log_u;
  if (r < 1) throw DomainError("nonlinearity order must be >= 1");
  std::vector<double> logs;
  for (int i = 0; i <= r; ++i) logs.push_back(2.0 * i * log_u);
  logs.push_back(2.0 * r * log_u);
  if (theorem == BoundTheorem::Polynomial && g_term > 0.0) logs.push_back(2.0 * std::log(g_term));
  const double mx = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return log_scale + 0.5 * (mx + std::log(s));
}

void check_theorem(const PdeOperator& op, BoundTheorem theorem) {
  if (op.theorem() != theorem) {
    throw ConfigError("theorem '" + to_string(theorem) + "' does not apply to " + to_string(op.kind));
  }
}

BoundReport assemble_bound(const MlpParams& params, const BoundInputs& in) {
  BoundReport rep;
  rep.layers = layer_factors(params);
  rep.F = in.F;
  rep.r = in.r;
  rep.epsilon = in.epsilon;
  rep.expansion_point = in.expansion_point;
  rep.theorem = in.theorem;
  rep.N = in.N;
  rep.g_term = in.g_term;

  std::vector<LayerBox> boxes;
  for (const auto& f : rep.layers) boxes.push_back(f.box);
  rep.v_norm = final_map_norm(params, boxes);

  double log_u = std::log(rep.v_norm);
  double max_neg = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < rep.layers.size(); ++l) {
    const auto& f = rep.layers[l];
    if (l + 1 < rep.layers.size()) log_u += 0.5 * f.log_a;
    log_u -= f.log_det_quarter;
    max_neg = std::max(max_neg, -f.log_det_quarter);
  }
  rep.log_norm_proxy = log_u;
  rep.norm_proxy = std::exp(log_u);
  rep.theta_constant = std::exp(max_neg);
  rep.regularizer = regularizer(params).value;
  rep.assembled_bound = assemble_from_proxy(in.theorem, in.F, in.N, rep.norm_proxy, in.r, in.g_term);
  if (in.F > 0.0) {
    rep.log_assembled_bound = log_assemble_from_proxy(in.theorem, in.F, in.N, log_u, in.r, in.g_term);
  } else {
    rep.log_assembled_bound = -std::numeric_limits<double>::infinity();
  }
  return rep;
}

namespace {

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

std::string bound_report_json(const BoundReport& rep) {
  nlohmann::json j;
  j["theorem"] = to_string(rep.theorem);
  j["F"] = rep.F;
  j["r"] = rep.r;
  j["epsilon"] = rep.epsilon;
  j["expansion_point"] = rep.expansion_point;
  j["N"] = rep.N;
  j["g_term"] = rep.g_term;
  j["alpha"] = 1.0;
  j["koopman_norm_convention"] = "A_l^(1/2)";
  j["v_norm"] = rep.v_norm;
  j["v_norm_convention"] = "volume-normalized L2 over the input box, row norms <= spectral norm";
  j["log_norm_proxy"] = rep.log_norm_proxy;
  j["norm_proxy"] = finite_or_null(rep.norm_proxy);
  j["theta_constant"] = finite_or_null(rep.theta_constant);
  j["regularizer"] = rep.regularizer;
  j["assembled_bound"] = finite_or_null(rep.assembled_bound);
  j["log_assembled_bound"] = finite_or_null(rep.log_assembled_bound);
  j["notes"] = rep.notes;
  j["layers"] = nlohmann::json::array();
  for (const auto& f : rep.layers) {
    nlohmann::json l;
    l["layer"] = f.layer;
    l["activation"] = std::string(to_string(f.activation));
    l["box_half_width"] = f.box.half_width;
    l["spectral_norm"] = f.box.spectral_norm;
    l["bias_inf"] = f.box.bias_inf;
    l["log_A"] = f.log_a;
    l["A"] = finite_or_null(f.a);
    l["A_tilde"] = f.a_tilde;
    l["D"] = f.geo_mean;
    l["log_det_quarter"] = f.log_det_quarter;
    l["singular_values"] = std::vector<double>(f.singular_values.data(),
                                               f.singular_values.data() + f.singular_values.size());
    j["layers"].push_back(std::move(l));
  }
  return j.dump(2);
}

std::string bound_report_table(const BoundReport& rep) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "layer  act      box_a        A            A_tilde      D\n";
  for (const auto& f : rep.layers) {
    os << std::left << std::setw(7) << f.layer << std::setw(9) << to_string(f.activation)
       << std::setw(13) << f.box.half_width << std::setw(13) << f.a << std::setw(13) << f.a_tilde
       << f.geo_mean << "\n";
  }
  os << "theorem " << to_string(rep.theorem) << "  F " << rep.F << "  r " << rep.r << "  eps "
     << rep.epsilon << "  N " << rep.N << "\n";
  os << "||v|| " << rep.v_norm << "  U " << rep.norm_proxy << "  (alpha := 1)\n";
  os << "bound " << rep.assembled_bound << "  (log " << rep.log_assembled_bound << ")\n";
  for (const auto& n : rep.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace kpinn
