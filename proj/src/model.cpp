#include "sparsenet/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

void add_bias_and_activate(Matrix& z, const DenseLayer& layer) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] += layer.biases[c];
      if (layer.activation == Activation::relu && row[c] < 0.0) row[c] = 0.0;
    }
  }
}

void check_input(const Network& net, const Matrix& batch) {
  if (net.num_layers() == 0) throw ShapeError("network has no layers");
  if (batch.cols() != net.input_dim()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) +
                     " features but the network expects " + std::to_string(net.input_dim()));
  }
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::relu:
      return "relu";
  }
  return "unknown";
}

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.activation != Activation::identity && l.activation != Activation::relu) {
      throw ConfigError("layer " + std::to_string(i) + " has an unknown activation tag");
    }
    if (l.weights.rows() == 0 || l.weights.cols() == 0) {
      throw ShapeError("layer " + std::to_string(i) + " has an empty weight matrix");
    }
    if (l.biases.size() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " has " + std::to_string(l.biases.size()) +
                       " biases for " + std::to_string(l.out_dim()) + " outputs");
    }
    if (i > 0 && layers_[i - 1].out_dim() != l.in_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " + std::to_string(l.in_dim()) +
                       " inputs but layer " + std::to_string(i - 1) + " produces " +
                       std::to_string(layers_[i - 1].out_dim()));
    }
  }
  if (layers_.back().activation != Activation::identity) {
    throw ConfigError("final layer must use identity activation");
  }
}

Network Network::mlp(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) throw ShapeError("mlp needs at least input and output sizes");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    layers.push_back(DenseLayer{Matrix(sizes[i + 1], sizes[i]),
                                std::vector<double>(sizes[i + 1], 0.0),
                                last ? Activation::identity : Activation::relu});
  }
  return Network(std::move(layers));
}

std::size_t Network::input_dim() const noexcept {
  return layers_.empty() ? 0 : layers_.front().in_dim();
}

std::size_t Network::output_dim() const noexcept {
  return layers_.empty() ? 0 : layers_.back().out_dim();
}

std::size_t Network::weight_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size();
  return n;
}

std::size_t Network::bias_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.biases.size();
  return n;
}

std::vector<std::size_t> Network::layer_weight_counts() const {
  std::vector<std::size_t> out;
  out.reserve(layers_.size());
  for (const auto& l : layers_) out.push_back(l.weights.size());
  return out;
}

std::size_t Network::nonzero_weight_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_)
    for (double w : l.weights.data()) n += (w != 0.0);
  return n;
}

std::size_t Network::small_weight_count(double threshold) const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_)
    for (double w : l.weights.data()) n += (std::abs(w) < threshold);
  return n;
}

std::uint64_t Network::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : layers_) {
    for (double w : l.weights.data()) mix(w);
    for (double b : l.biases) mix(b);
  }
  return h;
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const auto& l : net.layers()) {
    g.weights.emplace_back(l.weights.rows(), l.weights.cols());
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

Matrix forward(const Network& net, const Matrix& batch) {
  check_input(net, batch);
  Matrix x = batch;
  for (const auto& layer : net.layers()) {
    Matrix z = matmul_nt(x, layer.weights);
    add_bias_and_activate(z, layer);
    x = std::move(z);
  }
  return x;
}

BackwardResult backward(const Network& net, const Matrix& batch, std::span<const int> labels) {
  check_input(net, batch);
  const auto& layers = net.layers();

  // activations[0] is the input; activations[k + 1] is the output of layer k.
  std::vector<Matrix> activations;
  activations.reserve(layers.size() + 1);
  activations.push_back(batch);
  for (const auto& layer : layers) {
    Matrix z = matmul_nt(activations.back(), layer.weights);
    add_bias_and_activate(z, layer);
    activations.push_back(std::move(z));
  }

  auto [loss, delta] = softmax_cross_entropy(activations.back(), labels);
  BackwardResult result;
  result.loss = loss;
  result.grads.weights.resize(layers.size());
  result.grads.biases.resize(layers.size());

  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    if (layer.activation == Activation::relu) {
      // Post-activation output is zero exactly where the unit was inactive.
      const Matrix& out = activations[k + 1];
      for (std::size_t i = 0; i < delta.size(); ++i) {
        if (out.data()[i] <= 0.0) delta.data()[i] = 0.0;
      }
    }
    result.grads.weights[k] = matmul_tn(delta, activations[k]);
    auto& db = result.grads.biases[k];
    db.assign(layer.out_dim(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) db[c] += row[c];
    }
    if (k > 0) delta = matmul(delta, layer.weights);
  }
  result.logits = std::move(activations.back());
  return result;
}

Network init_weights(Network net, Rng& rng, InitScheme scheme) {
  switch (scheme) {
    case InitScheme::uniform_he:
      for (std::size_t k = 0; k < net.num_layers(); ++k) {
        auto& layer = net.layer(k);
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim()));
        for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
        std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
      }
      break;
  }
  return net;
}

}  // namespace sparsenet
