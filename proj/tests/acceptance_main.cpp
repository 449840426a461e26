// Acceptance suite: one PASS/FAIL line per criterion, then a summary.
//
//   sparsenet_acceptance            run every criterion
//   sparsenet_acceptance 1 4 8      run a subset
//
// Exit status is 0 only if every selected criterion passed.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sparsenet/cli.hpp"
#include "sparsenet/config.hpp"
#include "sparsenet/model_io.hpp"
#include "sparsenet/regularizers.hpp"
#include "sparsenet/training.hpp"

namespace sn = sparsenet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

sn::Matrix random_matrix(std::size_t r, std::size_t c, sn::Rng& rng, double lo, double hi) {
  sn::Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

sn::Network random_net(std::span<const std::size_t> sizes, sn::Rng& rng) {
  sn::Network net = sn::Network::mlp(sizes);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    for (double& w : net.layer(k).weights.data()) w = rng.uniform(-1.0, 1.0);
    for (double& b : net.layer(k).biases) b = rng.uniform(-0.1, 0.1);
  }
  return net;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// 1. Backprop and penalty gradients against central differences.
Outcome gradient_correctness() {
  constexpr double eps = 1e-5;
  constexpr double tol = 1e-4;
  sn::Rng rng(101);
  double worst_bp = 0.0;
  std::size_t checked = 0;
  for (int t = 0; t < 100; ++t) {
    const std::array<std::size_t, 3> sizes{2 + rng.below(5), 2 + rng.below(5), 2 + rng.below(4)};
    sn::Network net = random_net(sizes, rng);
    const std::size_t batch = 1 + rng.below(6);
    const sn::Matrix x = random_matrix(batch, sizes[0], rng, 0.0, 1.0);
    std::vector<int> y(batch);
    for (int& v : y) v = static_cast<int>(rng.below(sizes[2]));
    const sn::BackwardResult br = sn::backward(net, x, y);
    auto loss = [&] { return sn::softmax_cross_entropy(sn::forward(net, x), y).loss; };
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      auto w = net.layer(k).weights.data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double s = w[i];
        w[i] = s + eps;
        const double up = loss();
        w[i] = s - eps;
        const double dn = loss();
        w[i] = s;
        worst_bp = std::max(worst_bp, rel_err(br.grads.weights[k].data()[i], (up - dn) / (2 * eps)));
        ++checked;
      }
      auto& b = net.layer(k).biases;
      for (std::size_t i = 0; i < b.size(); ++i) {
        const double s = b[i];
        b[i] = s + eps;
        const double up = loss();
        b[i] = s - eps;
        const double dn = loss();
        b[i] = s;
        worst_bp = std::max(worst_bp, rel_err(br.grads.biases[k][i], (up - dn) / (2 * eps)));
        ++checked;
      }
    }
  }

  double worst_pen = 0.0;
  for (sn::RegKind kind : {sn::RegKind::l2, sn::RegKind::l1, sn::RegKind::l0, sn::RegKind::l2l0}) {
    for (int t = 0; t < 100; ++t) {
      const sn::LayerRegParams p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                                 rng.uniform(1.0, 10.0), rng.uniform(0.0, 1.0)};
      double w0 = rng.uniform(-1.0, 1.0);
      if (std::abs(w0) < 1e-3) w0 = 1e-3 + std::abs(w0);
      std::vector<double> w{w0};
      const std::array<std::span<const double>, 1> layers{std::span<const double>(w)};
      const sn::ResolvedReg reg{{p}};
      w[0] = w0 + eps;
      const double up = sn::weighted_penalty_value(kind, layers, reg);
      w[0] = w0 - eps;
      const double dn = sn::weighted_penalty_value(kind, layers, reg);
      worst_pen = std::max(worst_pen, rel_err(sn::penalty_gradient(kind, w0, p), (up - dn) / (2 * eps)));
    }
  }
  return {worst_bp < tol && worst_pen < tol,
          fmt("%zu backprop partials, max rel err %.2e; 400 penalty points, max rel err %.2e",
              checked, worst_bp, worst_pen)};
}

// 2. The l0 surrogate approaches the nonzero count. The bound is tight only
// when every entry sits at exactly 0.1, so vectors hold at least two entries.
Outcome l0_convergence() {
  sn::Rng rng(202);
  bool ok = true;
  double worst_ratio = 0.0, worst_b100 = 0.0;
  for (double beta : {10.0, 50.0, 100.0}) {
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 2 + rng.below(199);
      std::vector<double> w(n);
      for (double& v : w) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 3.0);
      w[rng.below(n)] = rng.uniform() < 0.5 ? -0.1 : 0.1;
      const std::array<std::span<const double>, 1> layers{std::span<const double>(w)};
      const double omega = sn::penalty_value(sn::RegKind::l0, layers, sn::ResolvedReg{{{0, 0, beta}}});
      const double err = std::abs(omega - static_cast<double>(n));
      const double bound = static_cast<double>(n) * std::exp(-0.1 * beta);
      ok = ok && err < bound;
      worst_ratio = std::max(worst_ratio, err / bound);
      if (beta == 100.0) {
        ok = ok && err < 1e-3 * static_cast<double>(n);
        worst_b100 = std::max(worst_b100, err / static_cast<double>(n));
      }
    }
  }
  return {ok, fmt("max err/bound %.3f; beta=100 max err/n %.2e", worst_ratio, worst_b100)};
}

// 3. One step on a single weight with a frozen zero loss gradient.
Outcome update_rule_exactness() {
  struct Case {
    const char* label;
    sn::RegKind kind;
    sn::LayerRegParams p;
    double expected;
  };
  const Case cases[] = {
      {"l2", sn::RegKind::l2, {0.1, 0.0, 1.0, 0.0}, 0.49},
      {"l1", sn::RegKind::l1, {0.0, 0.0, 1.0, 0.1}, 0.49},
      {"l0", sn::RegKind::l0, {0.0, 0.1, 5.0, 0.0}, 0.5 - 0.1 * 0.1 * 5.0 * std::exp(-2.5)},
      {"l2l0", sn::RegKind::l2l0, {0.1, 0.1, 5.0, 0.0}, 0.5 - 0.01 - 0.1 * 0.1 * 5.0 * std::exp(-2.5)},
  };
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    std::vector<sn::DenseLayer> layers;
    layers.push_back({sn::Matrix{{0.5}}, {0.0}, sn::Activation::identity});
    sn::Network net(std::move(layers));
    sn::sgd_step(net, sn::Gradients::zeros_like(net), c.kind, sn::ResolvedReg{{c.p}}, 0.1);
    const double got = net.layer(0).weights(0, 0);
    ok = ok && std::abs(got - c.expected) <= 1e-12;
    detail += fmt("%s %.15f  ", c.label, got);
  }
  return {ok, detail};
}

// 4. Sparse inference and the SNZ1 format.
Outcome dense_sparse_equivalence() {
  sn::Rng rng(404);
  double worst = 0.0;
  bool round_trip = true;
  for (int t = 0; t < 100; ++t) {
    const std::array<std::size_t, 4> sizes{4 + rng.below(60), 2 + rng.below(40), 2 + rng.below(20),
                                           2 + rng.below(10)};
    const sn::Network net = random_net(sizes, rng);
    const sn::PruneMask mask = sn::random_prune(net, 1.0 + 15.0 * rng.uniform(), rng);
    const sn::Matrix x = random_matrix(1 + rng.below(32), sizes[0], rng, 0.0, 1.0);
    const sn::SparseModel sparse = sn::to_sparse(net, mask);
    const sn::Matrix a = sn::forward(sn::apply_mask(net, mask), x);
    const sn::Matrix b = sn::sparse_forward(sparse, x);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    std::stringstream buf;
    sn::write_sparse(buf, sparse);
    round_trip = round_trip && sn::read_sparse(buf) == sparse;
  }
  return {worst < 1e-6 && round_trip,
          fmt("max |dense - sparse| %.2e; SNZ1 round trip %s", worst, round_trip ? "exact" : "LOSSY")};
}

sn::Network train_ci(const sn::RunConfig& cfg, const sn::Datasets& data, const sn::TrainConfig& tc) {
  return sn::train(sn::build_network(cfg, data.train.dims(), data.train.classes, tc.seed), data.train, tc)
      .net;
}

// 5. GP and LP beat RP at 4x on the CI profile.
Outcome strategy_ordering() {
  std::vector<double> gp, lp, rp;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    sn::RunConfig cfg = sn::RunConfig::ci_profile();
    cfg.seed = seed;
    cfg.train.seed = seed;
    const sn::Datasets data = sn::load_datasets(cfg);
    const sn::Network net = train_ci(cfg, data, cfg.train);
    for (auto [strategy, out] : {std::pair{sn::PruneStrategy::global, &gp},
                                 std::pair{sn::PruneStrategy::layerwise, &lp},
                                 std::pair{sn::PruneStrategy::random, &rp}}) {
      sn::Rng rng(seed);
      out->push_back(sn::evaluate(sn::apply_mask(net, sn::prune(net, strategy, 4.0, rng)), data.test));
    }
  }
  const double g = median(gp), l = median(lp), r = median(rp);
  return {g >= r && l >= r, fmt("median test accuracy at 4x: GP %.4f  LP %.4f  RP %.4f", g, l, r)};
}

// 6. l0 training leaves more near-zero weights than l2 training.
Outcome sparseness_induction() {
  std::vector<double> ratios;
  std::string counts;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    sn::RunConfig cfg = sn::RunConfig::ci_profile();
    cfg.seed = seed;
    const sn::Datasets data = sn::load_datasets(cfg);
    sn::TrainConfig l0 = cfg.train;
    l0.seed = seed;
    l0.reg.kind = sn::RegKind::l0;
    sn::TrainConfig l2 = l0;
    l2.reg.kind = sn::RegKind::l2;
    l2.reg.alpha_l2 = l0.reg.alpha_l0;  // same penalty strength for both runs
    const std::size_t n0 = train_ci(cfg, data, l0).small_weight_count(1e-2);
    const std::size_t n2 = train_ci(cfg, data, l2).small_weight_count(1e-2);
    ratios.push_back(static_cast<double>(n0) / static_cast<double>(std::max<std::size_t>(n2, 1)));
    counts += fmt("%zu/%zu ", n0, n2);
  }
  const double m = median(ratios);
  return {m >= 2.0, fmt("|w|<1e-2 counts l0/l2 per seed: %smedian ratio %.2f", counts.c_str(), m)};
}

// 7. LeNet-300-100 on the bundled MNIST files: l2-l0 training, GP, fine-tuning.
Outcome mnist_compression() {
  const std::filesystem::path cfg_path = SPARSENET_SOURCE_DIR "/configs/mnist_lenet300.json";
  sn::RunConfig cfg = sn::load_run_config(cfg_path);
  if (!std::filesystem::exists(cfg.data.train_images)) {
    return {false, "MNIST files missing: " + cfg.data.train_images.string()};
  }
  const sn::Datasets data = sn::load_datasets(cfg);
  std::vector<double> drops, rates;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    sn::TrainConfig tc = cfg.train;
    tc.seed = seed;
    const sn::Network base =
        sn::train(sn::build_network(cfg, data.train.dims(), data.train.classes, seed), data.train, tc).net;
    const double base_acc = sn::evaluate(base, data.test);
    sn::Rng rng(seed);
    const sn::PruneMask mask = sn::prune(base, cfg.prune.strategy, cfg.prune.rate, rng);
    sn::TrainConfig ft = cfg.finetune;
    ft.seed = seed;
    const sn::Network tuned = sn::fine_tune(base, mask, data.train, ft).net;
    const double acc = sn::evaluate(sn::to_sparse(tuned, mask), data.test);
    const sn::CompressionStats stats = sn::compression_stats(tuned, mask);
    drops.push_back(100.0 * (base_acc - acc));
    rates.push_back(stats.param_rate);
    detail += fmt("seed %llu: base %.4f pruned+ft %.4f rate %.1fx; ", static_cast<unsigned long long>(seed),
                  base_acc, acc, stats.param_rate);
    std::fflush(stdout);
  }
  const double drop = median(drops), rate = median(rates);
  return {rate >= 20.0 && drop <= 1.5,
          detail + fmt("median rate %.1fx (params incl. biases), median drop %.2f pp", rate, drop)};
}

// 8. The curve subcommand reproduces the small-weight limit eta * alpha * beta.
Outcome curve_limit() {
  bool ok = true;
  std::string detail;
  for (double beta : {2.0, 5.0, 10.0}) {
    std::ostringstream out, err;
    const int code = sn::run_cli({"curve", "--kind", "l0", "--beta", fmt("%g", beta), "--eta", "0.04",
                                  "--alpha", "0.01", "--wmin", "1e-13", "--wmax", "1"},
                                 out, err);
    if (code != 0) return {false, "curve exited with " + std::to_string(code) + ": " + err.str()};
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::vector<double> mags;
    while (std::getline(in, line)) mags.push_back(std::abs(std::stod(line.substr(line.find(',') + 1))));
    const double limit_err = std::abs(mags.front() - 0.04 * 0.01 * beta);
    bool mono = mags.size() >= 1000;
    for (std::size_t i = 1; i < mags.size(); ++i) mono = mono && mags[i] < mags[i - 1];
    ok = ok && limit_err <= 1e-12 && mono;
    detail += fmt("beta %g: |term(0+)| %.6g (err %.1e), %s; ", beta, mags.front(), limit_err,
                  mono ? "decreasing" : "NOT decreasing");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "gradient correctness", 10.0, gradient_correctness},
      {2, "l0 surrogate convergence", 1.0, l0_convergence},
      {3, "update-rule exactness", 1.0, update_rule_exactness},
      {4, "dense/sparse equivalence", 10.0, dense_sparse_equivalence},
      {5, "pruning-strategy ordering", 120.0, strategy_ordering},
      {6, "sparseness induction", 120.0, sparseness_induction},
      {7, "MNIST LeNet-300-100 compression", 45.0 * 60.0, mnist_compression},
      {8, "penalization curve", 1.0, curve_limit},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int passed = 0, ran = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = o.pass && in_time;
    std::printf("[%s] %d %s (%.2fs of %.0fs budget%s): %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_s, in_time ? "" : ", OVER BUDGET", o.detail.c_str());
    std::fflush(stdout);
    ++ran;
    passed += ok;
  }
  std::printf("%d/%d criteria passed\n", passed, ran);
  return passed == ran ? 0 : 1;
}
