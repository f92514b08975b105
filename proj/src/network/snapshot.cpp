#include "kpinn/network/snapshot.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kpinn/core/error.hpp"

namespace kpinn {

using nlohmann::json;

std::string snapshot_to_string(const Snapshot& snap) {
  snap.params.validate();
  json j;
  j["format"] = "kpinn-mlp";
  j["version"] = kSnapshotVersion;
  j["seed"] = snap.params.seed;
  j["domain"]["lo"] = std::vector<double>(snap.normalizer.lo().begin(), snap.normalizer.lo().end());
  j["domain"]["hi"] = std::vector<double>(snap.normalizer.hi().begin(), snap.normalizer.hi().end());
  json layers = json::array();
  for (const auto& layer : snap.params.layers) {
    json lj;
    lj["rows"] = layer.weight.rows();
    lj["cols"] = layer.weight.cols();
    lj["activation"] = std::string(to_string(layer.activation));
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
    }
    lj["weight"] = w;
    lj["bias"] = std::vector<double>(layer.bias.begin(), layer.bias.end());
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j.dump(1);
}

Snapshot snapshot_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "kpinn-mlp") throw IoError("not a kpinn-mlp snapshot");
    if (j.at("version").get<int>() != kSnapshotVersion) {
      throw IoError("unsupported snapshot version " + std::to_string(j.at("version").get<int>()));
    }
    Snapshot snap;
    snap.params.seed = j.at("seed").get<std::uint64_t>();
    const auto lo = j.at("domain").at("lo").get<std::vector<double>>();
    const auto hi = j.at("domain").at("hi").get<std::vector<double>>();
    snap.normalizer = InputNormalizer(Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                                      Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
    for (const auto& lj : j.at("layers")) {
      DenseLayer layer;
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weight").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
        throw IoError("snapshot layer arrays do not match declared shape");
      }
      layer.weight.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      }
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
      layer.activation = parse_activation(lj.at("activation").get<std::string>());
      snap.params.layers.push_back(std::move(layer));
    }
    snap.params.validate();
    if (snap.params.input_dim() != snap.normalizer.dim()) {
      throw IoError("snapshot domain dimension does not match network input");
    }
    return snap;
  } catch (const json::exception& e) {
    throw IoError(std::string("snapshot schema violation: ") + e.what());
  }
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write snapshot " + path.string());
  out << snapshot_to_string(snap) << '\n';
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read snapshot " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return snapshot_from_string(ss.str());
}

}  // namespace kpinn
