#include <gtest/gtest.h>

#include <array>
#include <sstream>

#include "sparsenet/errors.hpp"
#include "sparsenet/sweep.hpp"

namespace sparsenet {
namespace {

struct TrainedBase {
  Dataset train_set = synth_blobs(3, 240, 5, 21);
  Dataset eval_set = synth_blobs(3, 120, 5, 22);
  Network net;
  TrainedBase() {
    const std::array<std::size_t, 3> sizes{5, 8, 3};
    Rng rng(3);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    net = train(init_weights(Network::mlp(sizes), rng), train_set, cfg).net;
  }
};

SweepConfig small_sweep(bool ft) {
  SweepConfig c;
  c.rates = {1.0, 2.0, 4.0};
  c.strategies = {PruneStrategy::global, PruneStrategy::layerwise, PruneStrategy::random};
  c.seeds = {1, 2};
  c.fine_tune = ft;
  c.ft_cfg.epochs = 1;
  c.ft_cfg.batch_size = 16;
  c.ft_cfg.reg = {.kind = RegKind::l2, .alpha_l2 = 1e-4};
  return c;
}

TEST(Sweep, RecordCountAndOrder) {
  TrainedBase s;
  for (bool ft : {false, true}) {
    const auto recs = sweep(s.net, s.train_set, s.eval_set, small_sweep(ft));
    ASSERT_EQ(recs.size(), 3u * 3u * 2u * (ft ? 2u : 1u));
    std::size_t i = 0;
    for (auto st : {PruneStrategy::global, PruneStrategy::layerwise, PruneStrategy::random})
      for (double r : {1.0, 2.0, 4.0})
        for (std::uint64_t seed : {1u, 2u})
          for (bool tuned : {false, true}) {
            if (tuned && !ft) continue;
            EXPECT_EQ(recs[i].strategy, st);
            EXPECT_EQ(recs[i].rate, r);
            EXPECT_EQ(recs[i].seed, seed);
            EXPECT_EQ(recs[i].fine_tuned, tuned);
            EXPECT_GE(recs[i].accuracy, 0.0);
            EXPECT_LE(recs[i].accuracy, 1.0);
            ++i;
          }
  }
}

TEST(Sweep, RateOneGlobalMatchesUnprunedAccuracy) {
  TrainedBase s;
  const auto recs = sweep(s.net, s.train_set, s.eval_set, small_sweep(false));
  EXPECT_EQ(recs.front().accuracy, evaluate(s.net, s.eval_set));
  EXPECT_EQ(recs.front().nnz, s.net.weight_count());
}

TEST(Sweep, LeavesBaseNetworkUntouched) {
  TrainedBase s;
  const auto before = s.net.fingerprint();
  sweep(s.net, s.train_set, s.eval_set, small_sweep(true));
  EXPECT_EQ(s.net.fingerprint(), before);
}

TEST(Sweep, ConfigValidation) {
  SweepConfig c = small_sweep(false);
  c.rates = {4.0, 2.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.rates = {0.5};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_sweep(false);
  c.seeds.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SweepCsv, RoundTrip) {
  const std::vector<SweepRecord> recs{
      {PruneStrategy::global, 2.0, false, 0.9137, 1234, 1},
      {PruneStrategy::layerwise, 3.3333333333333335, true, 1.0 / 3.0, 7, 18446744073709551615ull},
      {PruneStrategy::random, 16.0, false, 0.0, 0, 0},
  };
  std::stringstream ss;
  write_sweep_csv(ss, recs);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "strategy,rate,fine_tuned,accuracy,nnz,seed");
  EXPECT_EQ(read_sweep_csv(ss), recs);
}

TEST(SweepCsv, MalformedInput) {
  std::stringstream bad_header("strategy,rate\nGP,2\n");
  EXPECT_THROW(read_sweep_csv(bad_header), FormatError);
  std::stringstream bad_field("strategy,rate,fine_tuned,accuracy,nnz,seed\nGP,x,0,0.5,1,1\n");
  EXPECT_THROW(read_sweep_csv(bad_field), FormatError);
  std::stringstream short_row("strategy,rate,fine_tuned,accuracy,nnz,seed\nGP,2,0\n");
  EXPECT_THROW(read_sweep_csv(short_row), FormatError);
}

}  // namespace
}  // namespace sparsenet
