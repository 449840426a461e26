#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sparsenet/dataset.hpp"
#include "sparsenet/model.hpp"
#include "sparsenet/pruning.hpp"
#include "sparsenet/training.hpp"

namespace sparsenet {

/// One point of an accuracy-vs-compression curve.
struct SweepRecord {
  PruneStrategy strategy = PruneStrategy::global;
  double rate = 1.0;
  bool fine_tuned = false;
  double accuracy = 0.0;
  std::size_t nnz = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct SweepConfig {
  std::vector<double> rates;  // ascending, each >= 1
  std::vector<PruneStrategy> strategies;
  std::vector<std::uint64_t> seeds;
  bool fine_tune = false;
  TrainConfig ft_cfg;  // its seed is replaced by the record seed

  void validate() const;
};

/// For every (strategy, rate, seed): prune the base network, score it on
/// `eval`, and optionally fine-tune the pruned copy on `train` and score again.
/// Records come back ordered by (strategy, rate, seed, fine_tuned). The base
/// network is not modified.
std::vector<SweepRecord> sweep(const Network& base, const Dataset& train, const Dataset& eval,
                               const SweepConfig& cfg);

/// Header: strategy,rate,fine_tuned,accuracy,nnz,seed. Reals use 17 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
/// Inverse of write_sweep_csv. Throws FormatError on malformed input.
std::vector<SweepRecord> read_sweep_csv(std::istream& in);

}  // namespace sparsenet
