#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sparsenet/dataset.hpp"
#include "sparsenet/model.hpp"
#include "sparsenet/pruning.hpp"
#include "sparsenet/regularizers.hpp"

namespace sparsenet {

struct TrainConfig {
  double eta = 0.05;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  RegularizerSpec reg;
  bool shuffle = true;

  /// Throws ConfigError unless eta > 0, epochs >= 1, batch_size >= 1 and the
  /// regularizer is valid.
  void validate() const;
};

/// Fine-tuning settings derived from a training config: the regularizer kind
/// becomes l2 (strategy and overrides kept, so each layer sees the alpha_l2 it
/// was trained with) and the learning rate is halved.
TrainConfig default_fine_tune_config(const TrainConfig& train_cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;       // mean mini-batch data loss (no penalty)
  double train_acc = 0.0;  // running accuracy over the epoch's mini-batches
  std::optional<double> eval_acc;
  std::size_t small_weight_count = 0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  double small_weight_threshold = 1e-2;
  std::vector<EpochRecord> epochs;
};

/// CSV with header epoch,loss,train_acc,eval_acc,small_weight_count. A missing
/// eval accuracy is written as an empty field.
void write_report_csv(std::ostream& out, const TrainReport& report);

struct TrainResult {
  Network net;
  TrainReport report;
};

/// One simultaneous update over every parameter:
///   w <- w - eta * penalty_gradient(w) - eta * dJ/dw   (weights)
///   b <- b - eta * dJ/db                               (biases)
/// Both weight terms use the pre-update value. With a mask, dropped weights are
/// set back to zero afterwards.
void sgd_step(Network& net, const Gradients& grads, RegKind kind, const ResolvedReg& reg,
              double eta, const PruneMask* mask = nullptr);

/// Mini-batch SGD with the configured regularizer. `eval` (optional) is
/// scored after every epoch.
TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg,
                  const Dataset* eval = nullptr);

/// train() with `mask` re-applied after every update so dropped weights stay
/// exactly zero. The network is masked on entry.
TrainResult fine_tune(Network net, const PruneMask& mask, const Dataset& data,
                      const TrainConfig& cfg, const Dataset* eval = nullptr);

/// Fraction of rows whose argmax logit equals the label (ties -> lowest class).
double evaluate(const Network& net, const Dataset& data);
double evaluate(const SparseModel& model, const Dataset& data);

}  // namespace sparsenet
