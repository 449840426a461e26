#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sparsenet/model.hpp"
#include "sparsenet/numerics.hpp"

namespace sparsenet {

/// Keep flags for one layer's weight matrix, row-major (1 = keep).
struct LayerMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;

  bool operator()(std::size_t r, std::size_t c) const noexcept { return keep[r * cols + c] != 0; }
  std::size_t kept() const noexcept;

  friend bool operator==(const LayerMask&, const LayerMask&) = default;
};

/// Per-layer keep flags congruent with a Network's weight matrices.
struct PruneMask {
  std::vector<LayerMask> layers;

  static PruneMask all(const Network& net, bool keep);
  /// Keeps exactly the weights that are not zero.
  static PruneMask from_nonzero(const Network& net);

  std::size_t kept() const noexcept;
  std::size_t total() const noexcept;
  /// Throws ShapeError unless every layer matches `net`'s weight shapes.
  void check_congruent(const Network& net) const;

  friend bool operator==(const PruneMask&, const PruneMask&) = default;
};

enum class PruneStrategy { global, layerwise, random };

std::string_view to_string(PruneStrategy s) noexcept;
/// Parses "GP", "LP", "RP" (case-insensitive). Throws ConfigError otherwise.
PruneStrategy parse_prune_strategy(std::string_view s);

/// Number of weights a keep-k prune retains: round(count / rate).
std::size_t keep_count(std::size_t count, double rate);

/// Keeps the round(total / rate) largest |w| across all layers. Ties go to the
/// lower (layer, row-major position).
PruneMask global_prune(const Network& net, double rate);
/// Keeps the round(n_l / rate) largest |w| within each layer independently.
PruneMask layerwise_prune(const Network& net, double rate);
/// Keeps round(total / rate) weights drawn uniformly without replacement.
PruneMask random_prune(const Network& net, double rate, Rng& rng);
/// Dispatches on `strategy`; `rng` is only drawn from for random pruning.
PruneMask prune(const Network& net, PruneStrategy strategy, double rate, Rng& rng);

/// Dropped weights become exactly zero; biases are untouched.
Network apply_mask(Network net, const PruneMask& mask);

/// total / remaining. Throws ArithmeticError when remaining is 0.
double compression_rate(std::size_t total_params, std::size_t remaining_nonzero);

/// Both counting conventions for a pruned network.
struct CompressionStats {
  std::size_t total_weights = 0;
  std::size_t kept_weights = 0;
  std::size_t total_biases = 0;
  /// total_weights / kept_weights.
  double weight_rate = 0.0;
  /// (total_weights + biases) / (kept_weights + biases).
  double param_rate = 0.0;
};

CompressionStats compression_stats(const Network& net, const PruneMask& mask);

/// One layer in compressed sparse row form.
struct CsrLayer {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  Activation activation = Activation::identity;
  std::vector<std::uint64_t> row_offsets;  // rows + 1 entries
  std::vector<std::uint32_t> col_indices;  // nnz entries, increasing within a row
  std::vector<double> values;              // nnz entries
  std::vector<double> biases;              // rows entries

  std::size_t nnz() const noexcept { return values.size(); }
  /// Throws FormatError if offsets, indices or array lengths are inconsistent.
  void validate() const;

  friend bool operator==(const CsrLayer&, const CsrLayer&) = default;
};

/// Pruned network stored as CSR blocks, for inference and persistence.
struct SparseModel {
  std::vector<CsrLayer> layers;

  std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().cols; }
  std::size_t output_dim() const noexcept { return layers.empty() ? 0 : layers.back().rows; }
  std::size_t nnz() const noexcept;
  void validate() const;

  friend bool operator==(const SparseModel&, const SparseModel&) = default;
};

/// Stores exactly the kept entries (including kept entries that happen to be zero).
SparseModel to_sparse(const Network& net, const PruneMask& mask);
/// Dense network with every unstored weight set to zero.
Network densify(const SparseModel& model);
/// The stored positions as a mask.
PruneMask sparsity_mask(const SparseModel& model);

/// Logits for each row of `batch`, computed from the CSR blocks.
Matrix sparse_forward(const SparseModel& model, const Matrix& batch);

}  // namespace sparsenet
