#include "kpinn/train/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kpinn/core/error.hpp"

namespace kpinn {

namespace pt = boost::property_tree;

std::string to_string(TrainMode m) { return m == TrainMode::Vpinn ? "vpinn" : "pinn"; }

TrainMode parse_mode(const std::string& s) {
  if (s == "vpinn") return TrainMode::Vpinn;
  if (s == "pinn") return TrainMode::Pinn;
  throw ConfigError("unknown mode '" + s + "' (expected vpinn or pinn)");
}

PdeOperator TrainConfig::make_operator() const {
  if (kind == OperatorKind::NavierStokes2D) return PdeOperator::navier_stokes(reynolds);
  if (kind == OperatorKind::ParabolicMongeAmpere) {
    PdeOperator op = PdeOperator::monge_ampere(source, taylor_order, expansion_point);
    op.det_floor = det_floor;
    op.validate();
    return op;
  }
  throw ConfigError("operator " + to_string(kind) + " cannot be trained");
}

DomainBox TrainConfig::domain() const { return DomainBox::unit(make_operator().input_dim()); }

QuadratureGrid TrainConfig::make_grid() const {
  const DomainBox box = domain();
  if (box.dim() == 3) return QuadratureGrid(box, {grid, grid, time_nodes});
  return QuadratureGrid(box, std::vector<std::size_t>(box.dim(), grid));
}

std::vector<std::size_t> TrainConfig::layer_dims() const {
  const PdeOperator op = make_operator();
  std::vector<std::size_t> dims{op.input_dim()};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(op.output_dim());
  return dims;
}

std::vector<Activation> TrainConfig::layer_activations() const {
  std::vector<Activation> acts(hidden.size(), activation);
  acts.push_back(Activation::None);
  return acts;
}

void TrainConfig::validate() const {
  make_operator();
  if (activation == Activation::None) throw ConfigError("hidden activation must be tanh or sigmoid");
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("hidden widths must be positive");
  }
  if (n_collocation == 0 || n_boundary == 0 || n_test == 0) {
    throw ConfigError("N, N_BC and the test count must be positive");
  }
  if (n_boundary % 4 != 0) throw ConfigError("n_boundary must split evenly over the four edges");
  if (grid == 0 || time_nodes == 0) throw ConfigError("grid sizes must be positive");
  if (!(concentration > 0.0)) throw ConfigError("concentration c must be positive");
  if (!(lambda_bc >= 0.0) || !(lambda_p >= 0.0)) throw ConfigError("penalty weights must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (log_every == 0) throw ConfigError("log_every must be positive");
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (!(taylor_radius > 0.0)) throw ConfigError("taylor_radius must be positive");
  if (sweep_steps.empty()) throw ConfigError("sweep step list is empty");
}

TrainConfig default_ns_config() { return TrainConfig{}; }

TrainConfig default_pma_config() {
  TrainConfig c;
  c.kind = OperatorKind::ParabolicMongeAmpere;
  c.n_boundary = 720;
  c.hidden = {32, 32, 32};
  c.grid = 12;
  c.time_nodes = 8;
  c.steps = 1000;
  c.log_every = 50;
  return c;
}

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* key) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    try {
      out.push_back(static_cast<T>(std::stoull(item.substr(b))));
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad list entry for ") + key + ": '" + item + "'");
    }
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

OperatorKind parse_kind(const std::string& s) {
  if (s == "navier-stokes") return OperatorKind::NavierStokes2D;
  if (s == "monge-ampere") return OperatorKind::ParabolicMongeAmpere;
  throw ConfigError("unknown operator '" + s + "'");
}

// ptree's get(path, default) silently returns the default on a malformed
// value; this throws instead.
template <typename T>
void read(const pt::ptree& tree, const char* key, T& out) {
  if (!tree.get_child_optional(key)) return;
  const std::string raw = tree.get<std::string>(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (raw.find('-') != std::string::npos) throw ConfigError(std::string("negative value for ") + key);
  }
  out = tree.get<T>(key);
}

bool parse_switch(const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError("expected on/off, got '" + s + "'");
}

}  // namespace

TrainConfig parse_config(const std::string& ini_text) {
  pt::ptree tree;
  try {
    std::istringstream in(ini_text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  static const std::vector<std::string> known = {
      "problem.operator", "problem.reynolds", "problem.source_constant", "problem.source_x",
      "problem.expansion_point", "problem.det_floor", "problem.taylor_order", "problem.taylor_radius",
      "problem.boundary_value", "problem.lid_u", "problem.lid_v", "network.hidden", "network.activation",
      "data.n_collocation", "data.n_boundary", "data.n_test", "data.grid", "data.time_nodes",
      "data.concentration", "loss.mode", "loss.lambda_bc", "loss.lambda_p", "loss.regularizer",
      "optim.learning_rate", "optim.steps", "optim.log_every", "optim.snapshot_every", "run.seed",
      "run.seeds", "sweep.runs", "sweep.steps"};
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (std::find(known.begin(), known.end(), full) == known.end()) {
        throw ConfigError("unknown config key '" + full + "'");
      }
    }
  }

  TrainConfig c;
  const std::string op = tree.get<std::string>("problem.operator", "navier-stokes");
  if (parse_kind(op) == OperatorKind::ParabolicMongeAmpere) c = default_pma_config();
  try {
    read(tree, "problem.reynolds", c.reynolds);
    read(tree, "problem.source_constant", c.source.constant);
    read(tree, "problem.source_x", c.source.x_coeff);
    read(tree, "problem.expansion_point", c.expansion_point);
    read(tree, "problem.det_floor", c.det_floor);
    read(tree, "problem.taylor_order", c.taylor_order);
    read(tree, "problem.taylor_radius", c.taylor_radius);
    read(tree, "problem.boundary_value", c.boundary_value);
    read(tree, "problem.lid_u", c.lid_u);
    read(tree, "problem.lid_v", c.lid_v);
    if (auto h = tree.get_optional<std::string>("network.hidden")) c.hidden = parse_list<std::size_t>(*h, "hidden");
    if (auto a = tree.get_optional<std::string>("network.activation")) c.activation = parse_activation(*a);
    read(tree, "data.n_collocation", c.n_collocation);
    read(tree, "data.n_boundary", c.n_boundary);
    read(tree, "data.n_test", c.n_test);
    read(tree, "data.grid", c.grid);
    read(tree, "data.time_nodes", c.time_nodes);
    read(tree, "data.concentration", c.concentration);
    if (auto m = tree.get_optional<std::string>("loss.mode")) c.mode = parse_mode(*m);
    read(tree, "loss.lambda_bc", c.lambda_bc);
    read(tree, "loss.lambda_p", c.lambda_p);
    if (auto r = tree.get_optional<std::string>("loss.regularizer")) c.regularize = parse_switch(*r);
    read(tree, "optim.learning_rate", c.learning_rate);
    read(tree, "optim.steps", c.steps);
    read(tree, "optim.log_every", c.log_every);
    read(tree, "optim.snapshot_every", c.snapshot_every);
    read(tree, "run.seed", c.seed);
    if (auto s = tree.get_optional<std::string>("run.seeds")) c.seeds = parse_list<std::uint64_t>(*s, "seeds");
    read(tree, "sweep.runs", c.sweep_runs);
    if (auto s = tree.get_optional<std::string>("sweep.steps")) c.sweep_steps = parse_list<std::size_t>(*s, "sweep.steps");
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_ini(const TrainConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[problem]\n"
     << "operator = " << to_string(c.kind) << "\n"
     << "reynolds = " << c.reynolds << "\n"
     << "source_constant = " << c.source.constant << "\n"
     << "source_x = " << c.source.x_coeff << "\n"
     << "expansion_point = " << c.expansion_point << "\n"
     << "det_floor = " << c.det_floor << "\n"
     << "taylor_order = " << c.taylor_order << "\n"
     << "taylor_radius = " << c.taylor_radius << "\n"
     << "boundary_value = " << c.boundary_value << "\n"
     << "lid_u = " << c.lid_u << "\n"
     << "lid_v = " << c.lid_v << "\n"
     << "[network]\n"
     << "hidden = " << join(c.hidden) << "\n"
     << "activation = " << to_string(c.activation) << "\n"
     << "[data]\n"
     << "n_collocation = " << c.n_collocation << "\n"
     << "n_boundary = " << c.n_boundary << "\n"
     << "n_test = " << c.n_test << "\n"
     << "grid = " << c.grid << "\n"
     << "time_nodes = " << c.time_nodes << "\n"
     << "concentration = " << c.concentration << "\n"
     << "[loss]\n"
     << "mode = " << to_string(c.mode) << "\n"
     << "lambda_bc = " << c.lambda_bc << "\n"
     << "lambda_p = " << c.lambda_p << "\n"
     << "regularizer = " << (c.regularize ? "on" : "off") << "\n"
     << "[optim]\n"
     << "learning_rate = " << c.learning_rate << "\n"
     << "steps = " << c.steps << "\n"
     << "log_every = " << c.log_every << "\n"
     << "snapshot_every = " << c.snapshot_every << "\n"
     << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "seeds = " << join(c.seeds) << "\n"
     << "[sweep]\n"
     << "runs = " << c.sweep_runs << "\n"
     << "steps = " << join(c.sweep_steps) << "\n";
  return os.str();
}

std::uint64_t config_hash(const TrainConfig& c) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : config_to_ini(c)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace kpinn
