#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sparsenet/dataset.hpp"
#include "sparsenet/model.hpp"
#include "sparsenet/pruning.hpp"
#include "sparsenet/sweep.hpp"
#include "sparsenet/training.hpp"

namespace sparsenet {

inline constexpr int kConfigSchemaVersion = 1;

struct DataConfig {
  enum class Source { blobs, mnist };
  Source source = Source::blobs;

  // blobs
  std::size_t classes = 4;
  std::size_t dims = 16;
  std::size_t train_samples = 2000;
  std::size_t test_samples = 1000;
  double noise = 0.25;

  // mnist: IDX files; relative paths resolve against the config file's directory.
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
};

struct PruneConfig {
  PruneStrategy strategy = PruneStrategy::global;
  double rate = 4.0;
};

/// Everything a run needs, read from one JSON file.
///
///   {
///     "schema_version": 1,
///     "seed": 1,
///     "data": {"source": "blobs", "classes": 4, "dims": 16, ...}
///           | {"source": "mnist", "dir": "data/mnist"},
///     "network": {"hidden": [32, 16]},
///     "train": {"eta": 0.05, "epochs": 10, "batch_size": 32, "shuffle": true},
///     "regularizer": {"kind": "l2l0", "alpha_l2": 1e-4, "alpha_l0": 1e-4,
///                     "beta": 10, "strategy": "NORM", "overrides": [[a2, a0, beta], ...]},
///     "finetune": {"eta": 0.025, "epochs": 3, "batch_size": 32, "regularizer": {...}},
///     "prune": {"strategy": "GP", "rate": 4},
///     "sweep": {"rates": [2, 4, 8], "strategies": ["GP", "LP", "RP"],
///               "seeds": [1, 2, 3], "fine_tune": true}
///   }
///
/// Unknown keys at any level are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  std::vector<std::size_t> hidden = {32, 16};
  TrainConfig train;
  TrainConfig finetune;
  PruneConfig prune;
  SweepConfig sweep;

  /// The fast synthetic profile used when no config file is given.
  static RunConfig ci_profile();
};

/// Throws ConfigError with the offending key on any schema violation.
RunConfig parse_run_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct Datasets {
  Dataset train;
  Dataset test;
};

Datasets load_datasets(const RunConfig& cfg);

/// Untrained network for the configured topology, weights drawn from `seed`.
Network build_network(const RunConfig& cfg, std::size_t input_dim, std::size_t classes,
                      std::uint64_t seed);

}  // namespace sparsenet
