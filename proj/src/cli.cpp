#include "sparsenet/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "sparsenet/config.hpp"
#include "sparsenet/errors.hpp"
#include "sparsenet/model_io.hpp"
#include "sparsenet/regularizers.hpp"

namespace sparsenet {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string model;
  std::string data = "test";
  std::string report;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> strategy;
  std::optional<double> rate;

  std::string kind = "l0";
  double beta = 5.0;
  double eta = 0.04;
  double alpha = 0.01;
  double alpha_l2 = 0.0;
  double wmin = 0.0;
  double wmax = 1.0;
  std::size_t steps = 1001;
};

RunConfig config_for(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig::ci_profile() : load_run_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.train.seed = *o.seed;
  }
  return cfg;
}

// Writes to the --out file when given, else to `fallback`.
template <typename Emit>
void emit(const std::string& path, std::ostream& fallback, Emit&& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  body(f);
  if (!f) throw Error("write to " + path + " failed");
}

void require(const std::string& value, const char* flag, const char* cmd) {
  if (value.empty()) throw ConfigError(std::string(cmd) + " needs " + flag);
}

void check_model_matches(const Network& net, const Dataset& data) {
  if (net.input_dim() != data.dims()) {
    throw ShapeError("model expects " + std::to_string(net.input_dim()) +
                     " input features but the data has " + std::to_string(data.dims()));
  }
  if (net.output_dim() != data.classes) {
    throw ShapeError("model has " + std::to_string(net.output_dim()) +
                     " outputs but the data has " + std::to_string(data.classes) + " classes");
  }
}

void print_epochs(std::ostream& log, const TrainReport& report) {
  for (const auto& e : report.epochs) {
    log << "epoch " << e.epoch << " loss " << e.loss << " train_acc " << e.train_acc;
    if (e.eval_acc) log << " eval_acc " << *e.eval_acc;
    log << " small_weights " << e.small_weight_count << '\n';
  }
}

void write_report_if_requested(const std::string& path, const TrainReport& report) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_report_csv(f, report);
}

int cmd_train(const Options& o, std::ostream& log) {
  require(o.out, "--out", "train");
  const RunConfig cfg = config_for(o);
  const Datasets data = load_datasets(cfg);
  Network net = build_network(cfg, data.train.dims(), data.train.classes, cfg.seed);
  const TrainResult r = train(std::move(net), data.train, cfg.train, &data.test);
  print_epochs(log, r.report);
  write_report_if_requested(o.report, r.report);
  save_dense(o.out, r.net);
  return 0;
}

int cmd_prune(const Options& o, std::ostream& log) {
  require(o.model, "--model", "prune");
  require(o.out, "--out", "prune");
  const RunConfig cfg = config_for(o);
  const LoadedModel m = load_model(o.model);
  const PruneStrategy strategy = o.strategy ? parse_prune_strategy(*o.strategy) : cfg.prune.strategy;
  const double rate = o.rate.value_or(cfg.prune.rate);
  Rng rng(cfg.seed);
  const PruneMask mask = prune(m.net, strategy, rate, rng);
  const CompressionStats s = compression_stats(m.net, mask);
  log << "kept " << s.kept_weights << " of " << s.total_weights << " weights; weight rate "
      << s.weight_rate << "x, parameter rate " << s.param_rate << "x\n";
  save_sparse(o.out, to_sparse(apply_mask(m.net, mask), mask));
  return 0;
}

int cmd_finetune(const Options& o, std::ostream& log) {
  require(o.model, "--model", "finetune");
  require(o.out, "--out", "finetune");
  const RunConfig cfg = config_for(o);
  const LoadedModel m = load_model(o.model);
  const PruneMask mask = m.mask ? *m.mask : PruneMask::from_nonzero(m.net);
  const Datasets data = load_datasets(cfg);
  check_model_matches(m.net, data.train);
  TrainConfig ft = cfg.finetune;
  ft.seed = cfg.seed;
  const TrainResult r = fine_tune(m.net, mask, data.train, ft, &data.test);
  print_epochs(log, r.report);
  write_report_if_requested(o.report, r.report);
  save_sparse(o.out, to_sparse(r.net, mask));
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  require(o.model, "--model", "eval");
  const RunConfig cfg = config_for(o);
  const LoadedModel m = load_model(o.model);
  if (o.data != "train" && o.data != "test") {
    throw ConfigError("--data must be 'train' or 'test', got '" + o.data + "'");
  }
  const Datasets data = load_datasets(cfg);
  const Dataset& split = o.data == "train" ? data.train : data.test;
  check_model_matches(m.net, split);
  const double acc =
      m.mask ? evaluate(to_sparse(m.net, *m.mask), split) : evaluate(m.net, split);
  const PruneMask mask = m.mask ? *m.mask : PruneMask::from_nonzero(m.net);
  const CompressionStats s = compression_stats(m.net, mask);
  out << std::setprecision(17) << "accuracy " << acc << "\nnnz " << s.kept_weights
      << "\nweight_rate " << s.weight_rate << "\nparam_rate " << s.param_rate << '\n';
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& log) {
  const RunConfig cfg = config_for(o);
  const Datasets data = load_datasets(cfg);
  Network base;
  if (!o.model.empty()) {
    base = load_model(o.model).net;
    check_model_matches(base, data.test);
  } else {
    const TrainResult r = train(build_network(cfg, data.train.dims(), data.train.classes, cfg.seed),
                                data.train, cfg.train, &data.test);
    print_epochs(log, r.report);
    base = r.net;
  }
  const auto records = sweep(base, data.train, data.test, cfg.sweep);
  emit(o.out, out, [&](std::ostream& s) { write_sweep_csv(s, records); });
  return 0;
}

int cmd_curve(const Options& o, std::ostream& out) {
  const RegKind kind = parse_reg_kind(o.kind);
  LayerRegParams p;
  p.beta = o.beta;
  switch (kind) {
    case RegKind::l2:
      p.alpha_l2 = o.alpha;
      break;
    case RegKind::l1:
      p.alpha_l1 = o.alpha;
      break;
    case RegKind::l0:
      p.alpha_l0 = o.alpha;
      break;
    case RegKind::l2l0:
      p.alpha_l0 = o.alpha;
      p.alpha_l2 = o.alpha_l2;
      break;
    case RegKind::none:
      break;
  }
  RegularizerSpec check;
  check.kind = kind;
  check.alpha_l2 = p.alpha_l2;
  check.alpha_l0 = p.alpha_l0;
  check.alpha_l1 = p.alpha_l1;
  check.beta = p.beta;
  check.validate();
  if (!(o.eta > 0.0)) throw ConfigError("--eta must be > 0");
  const auto points = penalization_curve(kind, p, o.eta, o.wmin, o.wmax, o.steps);
  emit(o.out, out, [&](std::ostream& s) {
    s << "w,term\n" << std::setprecision(17);
    for (const auto& pt : points) s << pt.w << ',' << pt.term << '\n';
  });
  return 0;
}

int cmd_export(const Options& o, std::ostream& out) {
  require(o.model, "--model", "export");
  const LoadedModel m = load_model(o.model);
  const PruneMask mask = m.mask ? *m.mask : PruneMask::from_nonzero(m.net);
  emit(o.out, out, [&](std::ostream& s) {
    s << "layer,row,col,value\n" << std::setprecision(17);
    for (std::size_t k = 0; k < m.net.num_layers(); ++k) {
      const auto& w = m.net.layer(k).weights;
      for (std::size_t r = 0; r < w.rows(); ++r) {
        for (std::size_t c = 0; c < w.cols(); ++c) {
          if (mask.layers[k](r, c)) s << k << ',' << r << ',' << c << ',' << w(r, c) << '\n';
        }
      }
    }
  });
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();
  CLI::App app{"Sparse neural network training, pruning and evaluation", "sparsenet"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON run-config (defaults to the CI blobs profile)");
    c->add_option("--seed", o.seed, "Override the run seed");
  };

  auto* train_cmd = app.add_subcommand("train", "Train a network and write an SND1 model");
  add_config(train_cmd);
  train_cmd->add_option("--out", o.out, "Output model path");
  train_cmd->add_option("--report", o.report, "Per-epoch CSV report");

  auto* prune_cmd = app.add_subcommand("prune", "Prune a model and write an SNZ1 model");
  add_config(prune_cmd);
  prune_cmd->add_option("--model", o.model, "Input model (SND1 or SNZ1)");
  prune_cmd->add_option("--out", o.out, "Output SNZ1 path");
  prune_cmd->add_option("--strategy", o.strategy, "GP, LP or RP");
  prune_cmd->add_option("--rate", o.rate, "Target compression rate (>= 1)");

  auto* ft_cmd = app.add_subcommand("finetune", "Retrain a pruned model with its mask fixed");
  add_config(ft_cmd);
  ft_cmd->add_option("--model", o.model, "Pruned model (SNZ1)");
  ft_cmd->add_option("--out", o.out, "Output SNZ1 path");
  ft_cmd->add_option("--report", o.report, "Per-epoch CSV report");

  auto* eval_cmd = app.add_subcommand("eval", "Report the accuracy of a model");
  add_config(eval_cmd);
  eval_cmd->add_option("--model", o.model, "Model file (SND1 or SNZ1)");
  eval_cmd->add_option("--data", o.data, "Split to score: train or test");

  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy versus compression rate");
  add_config(sweep_cmd);
  sweep_cmd->add_option("--model", o.model, "Trained base model; trained from the config if absent");
  sweep_cmd->add_option("--out", o.out, "Results CSV (stdout if absent)");

  auto* curve_cmd = app.add_subcommand("curve", "Penalization term -eta * alpha * dOmega/dw");
  curve_cmd->add_option("--kind", o.kind, "l2, l1, l0 or l2l0");
  curve_cmd->add_option("--beta", o.beta, "l0 sharpness (>= 1)");
  curve_cmd->add_option("--eta", o.eta, "Learning rate");
  curve_cmd->add_option("--alpha", o.alpha, "Penalty strength (alpha_l0 for l2l0)");
  curve_cmd->add_option("--alpha-l2", o.alpha_l2, "alpha_l2 for kind l2l0");
  curve_cmd->add_option("--wmin", o.wmin, "Smallest weight sampled");
  curve_cmd->add_option("--wmax", o.wmax, "Largest weight sampled");
  curve_cmd->add_option("--steps", o.steps, "Number of samples (>= 2)");
  curve_cmd->add_option("--out", o.out, "Output CSV (stdout if absent)");

  auto* export_cmd = app.add_subcommand("export", "Write the kept weights as layer,row,col,value CSV");
  export_cmd->add_option("--model", o.model, "Model file (SND1 or SNZ1)");
  export_cmd->add_option("--out", o.out, "Output CSV (stdout if absent)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(o, err);
    if (*prune_cmd) return cmd_prune(o, err);
    if (*ft_cmd) return cmd_finetune(o, err);
    if (*eval_cmd) return cmd_eval(o, out);
    if (*sweep_cmd) return cmd_sweep(o, out, err);
    if (*curve_cmd) return cmd_curve(o, out);
    if (*export_cmd) return cmd_export(o, out);
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace sparsenet
