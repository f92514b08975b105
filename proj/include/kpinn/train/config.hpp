#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpinn/network/mlp.hpp"
#include "kpinn/operators/pde_operator.hpp"
#include "kpinn/quadrature/quadrature.hpp"

namespace kpinn {

enum class TrainMode { Vpinn, Pinn };

std::string to_string(TrainMode m);
TrainMode parse_mode(const std::string& s);

/// Every experiment constant, with defaults for the lid-driven cavity.
///
/// INI layout (all keys optional):
///   [problem]  operator = navier-stokes | monge-ampere, reynolds, source_constant,
///              source_x, expansion_point, det_floor, taylor_order, taylor_radius,
///              boundary_value, lid_u, lid_v
///   [network]  hidden = 64,64,64   activation = tanh | sigmoid
///   [data]     n_collocation, n_boundary, n_test, grid, time_nodes, concentration
///   [loss]     mode = vpinn | pinn, lambda_bc, lambda_p, regularizer = on | off
///   [optim]    learning_rate, steps, log_every, snapshot_every
///   [run]      seed, seeds = 0,1,2
///   [sweep]    runs, steps = 500,1000,...
struct TrainConfig {
  OperatorKind kind = OperatorKind::NavierStokes2D;
  double reynolds = 100.0;
  PmaSource source;
  double expansion_point = 1.0;
  double det_floor = 1e-8;
  int taylor_order = 1;
  /// Largest Taylor radius used for epsilon (capped below the expansion point).
  double taylor_radius = 0.9;
  /// Monge-Ampere boundary value of u on the spatial boundary.
  double boundary_value = 0.0;
  /// Navier-Stokes velocity on the lid y = 1.
  double lid_u = 1.0;
  double lid_v = 0.0;

  std::vector<std::size_t> hidden = {64, 64, 64};
  Activation activation = Activation::Tanh;

  std::size_t n_collocation = 100;
  std::size_t n_boundary = 240;
  std::size_t n_test = 100;
  std::size_t grid = 25;        // nodes per spatial dimension
  std::size_t time_nodes = 25;  // nodes along t (Monge-Ampere)
  double concentration = 0.1;

  TrainMode mode = TrainMode::Vpinn;
  double lambda_bc = 0.1;
  double lambda_p = 0.1;
  bool regularize = false;

  double learning_rate = 1e-3;
  std::size_t steps = 5000;
  std::size_t log_every = 50;
  std::size_t snapshot_every = 0;  // 0: final snapshot only

  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2};

  std::size_t sweep_runs = 30;
  std::vector<std::size_t> sweep_steps = {200, 400, 700, 1000, 1500, 2000};

  /// Weight of the Koopman regularizer in the total loss (0 or 1).
  double lambda_k() const { return regularize ? 1.0 : 0.0; }

  PdeOperator make_operator() const;
  DomainBox domain() const;
  QuadratureGrid make_grid() const;
  std::vector<std::size_t> layer_dims() const;
  std::vector<Activation> layer_activations() const;

  void validate() const;
};

TrainConfig default_ns_config();
TrainConfig default_pma_config();

TrainConfig parse_config(const std::string& ini_text);
TrainConfig load_config(const std::filesystem::path& path);
/// Canonical INI text; parse_config(config_to_ini(c)) reproduces c.
std::string config_to_ini(const TrainConfig& c);
/// FNV-1a of the canonical INI text.
std::uint64_t config_hash(const TrainConfig& c);
std::string hash_hex(std::uint64_t h);

}  // namespace kpinn
