#include "sparsenet/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

constexpr std::size_t kEvalChunk = 1000;

template <typename Forward>
double accuracy_by_chunks(const Dataset& data, Forward&& fwd) {
  if (data.size() == 0) throw InputError("cannot evaluate on an empty dataset");
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < data.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(data.size(), begin + kEvalChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Matrix logits = fwd(data.gather(idx));
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      correct += argmax(logits.row(r)) == static_cast<std::size_t>(data.labels[begin + r]);
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult run_sgd(Network net, const PruneMask* mask, const Dataset& data,
                    const TrainConfig& cfg, const Dataset* eval) {
  cfg.validate();
  if (data.size() == 0) throw InputError("training dataset is empty");
  if (data.dims() != net.input_dim()) {
    throw ShapeError("dataset has " + std::to_string(data.dims()) +
                     " features but the network expects " + std::to_string(net.input_dim()));
  }
  if (mask) net = apply_mask(std::move(net), *mask);

  const ResolvedReg reg = resolve(cfg.reg, net.layer_weight_counts());
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const std::vector<int> labels = data.gather_labels(idx);
      const BackwardResult br = backward(net, data.gather(idx), labels);
      for (std::size_t r = 0; r < br.logits.rows(); ++r) {
        correct += argmax(br.logits.row(r)) == static_cast<std::size_t>(labels[r]);
      }
      loss_sum += br.loss;
      ++batches;
      sgd_step(net, br.grads, cfg.reg.kind, reg, cfg.eta, mask);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(batches);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(data.size());
    if (eval) rec.eval_acc = evaluate(net, *eval);
    rec.small_weight_count = net.small_weight_count(report.small_weight_threshold);
    report.epochs.push_back(rec);
  }
  return {std::move(net), std::move(report)};
}

}  // namespace

void TrainConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be a finite value > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  reg.validate();
}

TrainConfig default_fine_tune_config(const TrainConfig& train_cfg) {
  TrainConfig ft = train_cfg;
  ft.eta = train_cfg.eta / 2.0;
  ft.reg.kind = RegKind::l2;
  return ft;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,loss,train_acc,eval_acc,small_weight_count\n";
  out << std::setprecision(17);
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.loss << ',' << e.train_acc << ',';
    if (e.eval_acc) out << *e.eval_acc;
    out << ',' << e.small_weight_count << '\n';
  }
}

void sgd_step(Network& net, const Gradients& grads, RegKind kind, const ResolvedReg& reg,
              double eta, const PruneMask* mask) {
  if (grads.weights.size() != net.num_layers() || grads.biases.size() != net.num_layers() ||
      reg.size() != net.num_layers()) {
    throw ShapeError("sgd_step: gradients or regularizer do not match the network");
  }
  if (mask) mask->check_congruent(net);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    auto& layer = net.layer(k);
    auto w = layer.weights.data();
    const auto gw = grads.weights[k].data();
    if (gw.size() != w.size() || grads.biases[k].size() != layer.biases.size()) {
      throw ShapeError("sgd_step: gradient shape mismatch in layer " + std::to_string(k));
    }
    const LayerRegParams& p = reg[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double old = w[i];
      w[i] = old - eta * penalty_gradient(kind, old, p) - eta * gw[i];
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) {
      layer.biases[i] -= eta * grads.biases[k][i];
    }
    if (mask) {
      const auto& keep = mask->layers[k].keep;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!keep[i]) w[i] = 0.0;
      }
    }
  }
}

TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg, const Dataset* eval) {
  return run_sgd(std::move(net), nullptr, data, cfg, eval);
}

TrainResult fine_tune(Network net, const PruneMask& mask, const Dataset& data,
                      const TrainConfig& cfg, const Dataset* eval) {
  mask.check_congruent(net);
  return run_sgd(std::move(net), &mask, data, cfg, eval);
}

double evaluate(const Network& net, const Dataset& data) {
  return accuracy_by_chunks(data, [&](const Matrix& batch) { return forward(net, batch); });
}

double evaluate(const SparseModel& model, const Dataset& data) {
  return accuracy_by_chunks(data, [&](const Matrix& batch) { return sparse_forward(model, batch); });
}

}  // namespace sparsenet
