#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "sparsenet/errors.hpp"
#include "sparsenet/training.hpp"
#include "test_support.hpp"

namespace sparsenet {
namespace {

Network one_weight(double w) {
  std::vector<DenseLayer> layers;
  layers.push_back({Matrix{{w}}, {0.0}, Activation::identity});
  return Network(std::move(layers));
}

double step_once(RegKind kind, LayerRegParams p) {
  Network net = one_weight(0.5);
  const Gradients zero = Gradients::zeros_like(net);
  sgd_step(net, zero, kind, ResolvedReg{{p}}, 0.1);
  return net.layer(0).weights(0, 0);
}

TEST(SgdStep, SingleWeightUpdateRules) {
  EXPECT_NEAR(step_once(RegKind::l2, {.alpha_l2 = 0.1}), 0.49, 1e-12);
  EXPECT_NEAR(step_once(RegKind::l1, {.alpha_l1 = 0.1}), 0.49, 1e-12);
  EXPECT_NEAR(step_once(RegKind::l0, {.alpha_l0 = 0.1, .beta = 5.0}), 0.495895750068805, 1e-12);
  EXPECT_NEAR(step_once(RegKind::l2l0, {.alpha_l2 = 0.1, .alpha_l0 = 0.1, .beta = 5.0}),
              0.485895750068805, 1e-12);
  EXPECT_EQ(step_once(RegKind::none, {.alpha_l2 = 0.1}), 0.5);
}

// With frozen loss gradients, the penalty moves each weight by exactly
// -eta * penalty_gradient on top of the plain gradient step.
TEST(SgdStep, DecomposesIntoLossAndPenaltyTerms) {
  Rng rng(1);
  const std::array<std::size_t, 3> sizes{6, 5, 3};
  const Network start = testing::random_net(sizes, rng);
  const Matrix x = testing::random_matrix(10, 6, rng);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const Gradients g = backward(start, x, labels).grads;
  const double eta = 0.07;
  const LayerRegParams p{.alpha_l2 = 0.03, .alpha_l0 = 0.02, .beta = 8.0, .alpha_l1 = 0.01};
  const ResolvedReg reg{{p, p}};

  Network plain = start;
  sgd_step(plain, g, RegKind::none, reg, eta);
  for (RegKind kind : {RegKind::l2, RegKind::l1, RegKind::l0, RegKind::l2l0}) {
    Network pen = start;
    sgd_step(pen, g, kind, reg, eta);
    for (std::size_t k = 0; k < start.num_layers(); ++k) {
      const auto w0 = start.layer(k).weights.data();
      for (std::size_t i = 0; i < w0.size(); ++i) {
        EXPECT_NEAR(plain.layer(k).weights.data()[i], w0[i] - eta * g.weights[k].data()[i],
                    1e-15);
        EXPECT_NEAR(pen.layer(k).weights.data()[i] - plain.layer(k).weights.data()[i],
                    -eta * penalty_gradient(kind, w0[i], p), 1e-15);
      }
      EXPECT_EQ(pen.layer(k).biases, plain.layer(k).biases);
    }
  }
}

TEST(SgdStep, ShapeMismatchThrows) {
  Network net = one_weight(1.0);
  Gradients g;
  EXPECT_THROW(sgd_step(net, g, RegKind::l2, ResolvedReg{{{}}}, 0.1), ShapeError);
}

struct Fixture {
  Dataset data = synth_blobs(3, 300, 6, 5);
  Network net;
  Fixture() {
    const std::array<std::size_t, 3> sizes{6, 8, 3};
    Rng rng(2);
    net = init_weights(Network::mlp(sizes), rng);
  }
};

TrainConfig small_cfg(RegKind kind = RegKind::l2l0) {
  TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 9;
  cfg.reg = {.kind = kind, .alpha_l2 = 1e-3, .alpha_l0 = 1e-3, .beta = 10.0, .alpha_l1 = 1e-3};
  return cfg;
}

TEST(Train, SameSeedIsBitIdentical) {
  Fixture f;
  const auto a = train(f.net, f.data, small_cfg());
  const auto b = train(f.net, f.data, small_cfg());
  EXPECT_EQ(a.net, b.net);
  EXPECT_EQ(a.report.epochs, b.report.epochs);
  TrainConfig other = small_cfg();
  other.seed = 10;
  EXPECT_NE(train(f.net, f.data, other).net, a.net);
}

TEST(Train, ReportHasOneRecordPerEpoch) {
  Fixture f;
  const auto r = train(f.net, f.data, small_cfg(), &f.data);
  ASSERT_EQ(r.report.epochs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.report.epochs[i].epoch, i + 1);
    ASSERT_TRUE(r.report.epochs[i].eval_acc.has_value());
    EXPECT_GE(*r.report.epochs[i].eval_acc, 0.0);
    EXPECT_LE(*r.report.epochs[i].eval_acc, 1.0);
  }
  EXPECT_LT(r.report.epochs.back().loss, r.report.epochs.front().loss);

  std::ostringstream csv;
  write_report_csv(csv, r.report);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "epoch,loss,train_acc,eval_acc,small_weight_count");
}

TEST(Train, InvalidConfigIsConfigError) {
  Fixture f;
  TrainConfig cfg = small_cfg();
  cfg.eta = 0.0;
  EXPECT_THROW(train(f.net, f.data, cfg), ConfigError);
  cfg = small_cfg();
  cfg.batch_size = 0;
  EXPECT_THROW(train(f.net, f.data, cfg), ConfigError);
  cfg = small_cfg();
  cfg.reg.beta = 0.1;
  EXPECT_THROW(train(f.net, f.data, cfg), ConfigError);
}

TEST(FineTune, PrunedWeightsStayExactlyZero) {
  Fixture f;
  const Network trained = train(f.net, f.data, small_cfg()).net;
  const PruneMask m = global_prune(trained, 4.0);
  TrainConfig cfg = default_fine_tune_config(small_cfg());
  for (std::size_t epochs : {1u, 2u, 5u}) {
    cfg.epochs = epochs;
    const auto r = fine_tune(apply_mask(trained, m), m, f.data, cfg);
    double dropped = 0.0;
    for (std::size_t k = 0; k < r.net.num_layers(); ++k) {
      const auto w = r.net.layer(k).weights.data();
      for (std::size_t i = 0; i < w.size(); ++i)
        if (!m.layers[k].keep[i]) dropped += std::abs(w[i]);
    }
    EXPECT_EQ(dropped, 0.0);
    EXPECT_LE(r.net.nonzero_weight_count(), m.kept());
  }
}

TEST(FineTune, AllTrueMaskMatchesTrain) {
  Fixture f;
  const TrainConfig cfg = small_cfg();
  EXPECT_EQ(fine_tune(f.net, PruneMask::all(f.net, true), f.data, cfg).net,
            train(f.net, f.data, cfg).net);
}

TEST(FineTune, MaskMismatchIsShapeError) {
  Fixture f;
  const std::array<std::size_t, 3> other{6, 7, 3};
  EXPECT_THROW(fine_tune(f.net, PruneMask::all(Network::mlp(other), true), f.data, small_cfg()),
               ShapeError);
}

TEST(FineTune, DefaultConfigSwitchesToL2AndHalvesEta) {
  TrainConfig base = small_cfg();
  base.reg.strategy = RegStrategy::norm;
  const TrainConfig ft = default_fine_tune_config(base);
  EXPECT_EQ(ft.reg.kind, RegKind::l2);
  EXPECT_EQ(ft.reg.alpha_l2, base.reg.alpha_l2);
  EXPECT_EQ(ft.reg.strategy, RegStrategy::norm);
  EXPECT_EQ(ft.eta, base.eta / 2.0);
}

TEST(Evaluate, MemorizedPairScoresOne) {
  std::vector<DenseLayer> layers;
  layers.push_back({Matrix{{1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0}, Activation::identity});
  const Network net(std::move(layers));
  const Dataset d{Matrix{{0.9, 0.1}, {0.2, 0.8}}, {0, 1}, 2, Split::train};
  EXPECT_EQ(evaluate(net, d), 1.0);
}

TEST(Evaluate, ConstantLogitsScoreChanceOnBalancedData) {
  const std::array<std::size_t, 2> sizes{4, 10};
  const Network net = Network::mlp(sizes);  // all logits zero -> class 0 always
  const Dataset d = synth_blobs(10, 1000, 4, 3);
  EXPECT_NEAR(evaluate(net, d), 0.1, 1e-12);
}

TEST(Evaluate, DenseAndSparseAgree) {
  Fixture f;
  const Network trained = train(f.net, f.data, small_cfg()).net;
  Rng rng(4);
  for (double rate : {1.0, 2.0, 5.0}) {
    const PruneMask m = random_prune(trained, rate, rng);
    EXPECT_EQ(evaluate(apply_mask(trained, m), f.data), evaluate(to_sparse(trained, m), f.data));
  }
}

TEST(Evaluate, EmptyDatasetIsInputError) {
  const std::array<std::size_t, 2> sizes{2, 2};
  EXPECT_THROW(evaluate(Network::mlp(sizes), Dataset{Matrix(0, 2), {}, 2, Split::test}),
               InputError);
}

}  // namespace
}  // namespace sparsenet
