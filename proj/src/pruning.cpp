#include "sparsenet/pruning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

// Position of one weight in the whole network.
struct WeightRef {
  std::uint32_t layer;
  std::uint32_t index;  // row-major within the layer
  double magnitude;
};

// Larger magnitude first, then lower (layer, index).
bool stronger(const WeightRef& a, const WeightRef& b) noexcept {
  if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
  if (a.layer != b.layer) return a.layer < b.layer;
  return a.index < b.index;
}

void keep_top(std::vector<WeightRef>& refs, std::size_t k, PruneMask& mask) {
  if (k < refs.size()) {
    std::nth_element(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(k), refs.end(),
                     stronger);
  }
  for (std::size_t i = 0; i < std::min(k, refs.size()); ++i) {
    mask.layers[refs[i].layer].keep[refs[i].index] = 1;
  }
}

void append_layer(std::vector<WeightRef>& refs, const Network& net, std::size_t layer) {
  const auto w = net.layer(layer).weights.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    refs.push_back({static_cast<std::uint32_t>(layer), static_cast<std::uint32_t>(i),
                    std::abs(w[i])});
  }
}

void check_rate(double rate) {
  if (!std::isfinite(rate) || rate < 1.0) {
    throw ConfigError("compression rate must be a finite value >= 1, got " + std::to_string(rate));
  }
}

}  // namespace

std::size_t LayerMask::kept() const noexcept {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), std::uint8_t{1}));
}

PruneMask PruneMask::all(const Network& net, bool keep) {
  PruneMask m;
  for (const auto& l : net.layers()) {
    m.layers.push_back({l.weights.rows(), l.weights.cols(),
                        std::vector<std::uint8_t>(l.weights.size(), keep ? 1 : 0)});
  }
  return m;
}

PruneMask PruneMask::from_nonzero(const Network& net) {
  PruneMask m = all(net, false);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const auto w = net.layer(k).weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) m.layers[k].keep[i] = w[i] != 0.0;
  }
  return m;
}

std::size_t PruneMask::kept() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.kept();
  return n;
}

std::size_t PruneMask::total() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.keep.size();
  return n;
}

void PruneMask::check_congruent(const Network& net) const {
  if (layers.size() != net.num_layers()) {
    throw ShapeError("mask has " + std::to_string(layers.size()) + " layers, network has " +
                     std::to_string(net.num_layers()));
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& w = net.layer(k).weights;
    const auto& m = layers[k];
    if (m.rows != w.rows() || m.cols != w.cols() || m.keep.size() != w.size()) {
      throw ShapeError("mask layer " + std::to_string(k) + " is " + std::to_string(m.rows) + "x" +
                       std::to_string(m.cols) + " but the weights are " +
                       std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    }
  }
}

std::string_view to_string(PruneStrategy s) noexcept {
  switch (s) {
    case PruneStrategy::global:
      return "GP";
    case PruneStrategy::layerwise:
      return "LP";
    case PruneStrategy::random:
      return "RP";
  }
  return "unknown";
}

PruneStrategy parse_prune_strategy(std::string_view s) {
  std::string upper(s);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto st : {PruneStrategy::global, PruneStrategy::layerwise, PruneStrategy::random}) {
    if (upper == to_string(st)) return st;
  }
  throw ConfigError("unknown pruning strategy '" + std::string(s) + "' (expected GP, LP or RP)");
}

std::size_t keep_count(std::size_t count, double rate) {
  check_rate(rate);
  return static_cast<std::size_t>(std::llround(static_cast<double>(count) / rate));
}

PruneMask global_prune(const Network& net, double rate) {
  const std::size_t k = keep_count(net.weight_count(), rate);
  if (k == 0) throw ConfigError("compression rate " + std::to_string(rate) + " keeps no weights");
  std::vector<WeightRef> refs;
  refs.reserve(net.weight_count());
  for (std::size_t l = 0; l < net.num_layers(); ++l) append_layer(refs, net, l);
  PruneMask mask = PruneMask::all(net, false);
  keep_top(refs, k, mask);
  return mask;
}

PruneMask layerwise_prune(const Network& net, double rate) {
  PruneMask mask = PruneMask::all(net, false);
  std::vector<WeightRef> refs;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t k = keep_count(net.layer(l).weights.size(), rate);
    if (k == 0) {
      throw ConfigError("compression rate " + std::to_string(rate) + " keeps no weights in layer " +
                        std::to_string(l));
    }
    refs.clear();
    append_layer(refs, net, l);
    keep_top(refs, k, mask);
  }
  return mask;
}

PruneMask random_prune(const Network& net, double rate, Rng& rng) {
  const std::size_t total = net.weight_count();
  const std::size_t k = keep_count(total, rate);
  if (k == 0) throw ConfigError("compression rate " + std::to_string(rate) + " keeps no weights");
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(order[i], order[j]);
  }
  PruneMask mask = PruneMask::all(net, false);
  std::vector<std::size_t> layer_start;
  std::size_t acc = 0;
  for (const auto& l : net.layers()) {
    layer_start.push_back(acc);
    acc += l.weights.size();
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t flat = order[i];
    const auto it = std::upper_bound(layer_start.begin(), layer_start.end(), flat);
    const auto layer = static_cast<std::size_t>(std::distance(layer_start.begin(), it)) - 1;
    mask.layers[layer].keep[flat - layer_start[layer]] = 1;
  }
  return mask;
}

PruneMask prune(const Network& net, PruneStrategy strategy, double rate, Rng& rng) {
  switch (strategy) {
    case PruneStrategy::global:
      return global_prune(net, rate);
    case PruneStrategy::layerwise:
      return layerwise_prune(net, rate);
    case PruneStrategy::random:
      return random_prune(net, rate, rng);
  }
  throw ConfigError("unknown pruning strategy");
}

Network apply_mask(Network net, const PruneMask& mask) {
  mask.check_congruent(net);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    auto w = net.layer(k).weights.data();
    const auto& keep = mask.layers[k].keep;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!keep[i]) w[i] = 0.0;
    }
  }
  return net;
}

double compression_rate(std::size_t total_params, std::size_t remaining_nonzero) {
  if (remaining_nonzero == 0) throw ArithmeticError("compression rate with zero remaining parameters");
  return static_cast<double>(total_params) / static_cast<double>(remaining_nonzero);
}

CompressionStats compression_stats(const Network& net, const PruneMask& mask) {
  mask.check_congruent(net);
  CompressionStats s;
  s.total_weights = net.weight_count();
  s.kept_weights = mask.kept();
  s.total_biases = net.bias_count();
  s.weight_rate = compression_rate(s.total_weights, s.kept_weights);
  s.param_rate = compression_rate(s.total_weights + s.total_biases, s.kept_weights + s.total_biases);
  return s;
}

void CsrLayer::validate() const {
  const auto fail = [](const std::string& what) { throw FormatError("CSR layer: " + what); };
  if (row_offsets.size() != static_cast<std::size_t>(rows) + 1) fail("row offset count != rows + 1");
  if (row_offsets.front() != 0) fail("first row offset is not 0");
  if (col_indices.size() != values.size()) fail("column index and value counts differ");
  if (row_offsets.back() != values.size()) fail("final row offset != nnz");
  if (biases.size() != rows) fail("bias count != rows");
  if (activation != Activation::identity && activation != Activation::relu) {
    fail("unknown activation tag");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_offsets[r] > row_offsets[r + 1]) fail("row offsets decrease at row " + std::to_string(r));
    for (std::uint64_t i = row_offsets[r]; i < row_offsets[r + 1]; ++i) {
      if (col_indices[i] >= cols) fail("column index out of range in row " + std::to_string(r));
      if (i > row_offsets[r] && col_indices[i] <= col_indices[i - 1]) {
        fail("column indices not strictly increasing in row " + std::to_string(r));
      }
    }
  }
}

std::size_t SparseModel::nnz() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.nnz();
  return n;
}

void SparseModel::validate() const {
  if (layers.empty()) throw FormatError("sparse model has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].validate();
    if (k > 0 && layers[k].cols != layers[k - 1].rows) {
      throw FormatError("sparse layer " + std::to_string(k) + " does not chain with its predecessor");
    }
  }
  if (layers.back().activation != Activation::identity) {
    throw FormatError("final sparse layer must use identity activation");
  }
}

SparseModel to_sparse(const Network& net, const PruneMask& mask) {
  mask.check_congruent(net);
  SparseModel model;
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const auto& layer = net.layer(k);
    const auto& keep = mask.layers[k];
    CsrLayer csr;
    csr.rows = static_cast<std::uint32_t>(layer.out_dim());
    csr.cols = static_cast<std::uint32_t>(layer.in_dim());
    csr.activation = layer.activation;
    csr.biases = layer.biases;
    csr.row_offsets.reserve(csr.rows + 1);
    csr.row_offsets.push_back(0);
    for (std::size_t r = 0; r < csr.rows; ++r) {
      for (std::size_t c = 0; c < csr.cols; ++c) {
        if (keep(r, c)) {
          csr.col_indices.push_back(static_cast<std::uint32_t>(c));
          csr.values.push_back(layer.weights(r, c));
        }
      }
      csr.row_offsets.push_back(csr.values.size());
    }
    model.layers.push_back(std::move(csr));
  }
  return model;
}

Network densify(const SparseModel& model) {
  model.validate();
  std::vector<DenseLayer> layers;
  for (const auto& csr : model.layers) {
    DenseLayer d{Matrix(csr.rows, csr.cols), csr.biases, csr.activation};
    for (std::size_t r = 0; r < csr.rows; ++r) {
      for (std::uint64_t i = csr.row_offsets[r]; i < csr.row_offsets[r + 1]; ++i) {
        d.weights(r, csr.col_indices[i]) = csr.values[i];
      }
    }
    layers.push_back(std::move(d));
  }
  return Network(std::move(layers));
}

PruneMask sparsity_mask(const SparseModel& model) {
  PruneMask mask;
  for (const auto& csr : model.layers) {
    LayerMask m{csr.rows, csr.cols, std::vector<std::uint8_t>(std::size_t{csr.rows} * csr.cols, 0)};
    for (std::size_t r = 0; r < csr.rows; ++r) {
      for (std::uint64_t i = csr.row_offsets[r]; i < csr.row_offsets[r + 1]; ++i) {
        m.keep[r * csr.cols + csr.col_indices[i]] = 1;
      }
    }
    mask.layers.push_back(std::move(m));
  }
  return mask;
}

Matrix sparse_forward(const SparseModel& model, const Matrix& batch) {
  if (model.layers.empty()) throw ShapeError("sparse model has no layers");
  if (batch.cols() != model.input_dim()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) +
                     " features but the sparse model expects " + std::to_string(model.input_dim()));
  }
  Matrix x = batch;
  for (const auto& csr : model.layers) {
    Matrix y(x.rows(), csr.rows);
    for (std::size_t s = 0; s < x.rows(); ++s) {
      const auto in = x.row(s);
      auto out = y.row(s);
      for (std::size_t r = 0; r < csr.rows; ++r) {
        double acc = 0.0;
        for (std::uint64_t i = csr.row_offsets[r]; i < csr.row_offsets[r + 1]; ++i) {
          acc += csr.values[i] * in[csr.col_indices[i]];
        }
        acc += csr.biases[r];
        out[r] = (csr.activation == Activation::relu && acc < 0.0) ? 0.0 : acc;
      }
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace sparsenet
