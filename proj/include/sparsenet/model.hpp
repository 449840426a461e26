#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sparsenet/numerics.hpp"

namespace sparsenet {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

std::string_view to_string(Activation a) noexcept;

/// Fully-connected layer computing act(W x + b); W is out x in.
struct DenseLayer {
  Matrix weights;
  std::vector<double> biases;
  Activation activation = Activation::identity;

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward stack of dense layers ending in identity-activated logits.
class Network {
 public:
  Network() = default;
  /// Throws ShapeError / ConfigError if the layers do not chain or the last
  /// layer is not identity-activated.
  explicit Network(std::vector<DenseLayer> layers);

  /// Zero-initialized MLP with ReLU hidden layers: sizes = {in, h1, ..., out}.
  static Network mlp(std::span<const std::size_t> sizes);

  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  std::size_t num_layers() const noexcept { return layers_.size(); }

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
  /// Mutable access; callers must keep shapes unchanged.
  DenseLayer& layer(std::size_t i) { return layers_.at(i); }

  /// Number of weight-matrix entries (the penalized and prunable set).
  std::size_t weight_count() const noexcept;
  std::size_t bias_count() const noexcept;
  std::size_t param_count() const noexcept { return weight_count() + bias_count(); }
  /// Weight entries per layer, in layer order.
  std::vector<std::size_t> layer_weight_counts() const;
  /// Weight entries that are not exactly zero.
  std::size_t nonzero_weight_count() const noexcept;
  /// Weight entries with |w| < threshold.
  std::size_t small_weight_count(double threshold) const noexcept;

  /// FNV-1a over the raw bytes of every weight and bias, in layer order.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Per-layer loss gradients, shaped like the owning Network.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const Network& net);
};

/// Logits for each row of `batch`.
Matrix forward(const Network& net, const Matrix& batch);

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
  Matrix logits;
};

/// Mean softmax cross-entropy over the batch and its exact gradient with
/// respect to every weight and bias.
BackwardResult backward(const Network& net, const Matrix& batch, std::span<const int> labels);

enum class InitScheme { uniform_he };

/// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), so Var = 2 / fan_in.
/// Biases are zeroed. Layers are filled in order, row-major.
Network init_weights(Network net, Rng& rng, InitScheme scheme = InitScheme::uniform_he);

}  // namespace sparsenet
