#pragma once

#include <filesystem>
#include <string>

#include "kpinn/network/mlp.hpp"

namespace kpinn {

/// Weight snapshot, JSON text:
///
///   {
///     "format": "kpinn-mlp", "version": 1, "seed": <u64>,
///     "domain": {"lo": [..], "hi": [..]},
///     "layers": [{"rows": r, "cols": c, "activation": "tanh",
///                 "weight": [row-major r*c], "bias": [r]}, ...]
///   }
///
/// Doubles are written in shortest round-trip form, so save/load is exact.
struct Snapshot {
  MlpParams params;
  InputNormalizer normalizer;
};

inline constexpr int kSnapshotVersion = 1;

std::string snapshot_to_string(const Snapshot& snap);
Snapshot snapshot_from_string(const std::string& text);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace kpinn
