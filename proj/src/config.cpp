#include "sparsenet/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

using json = nlohmann::json;

// A JSON object whose keys are checked against an allow-list.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected a JSON object");
    const std::set<std::string_view> ok(allowed);
    for (const auto& [key, _] : j_.items()) {
      if (!ok.contains(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }
  const json& at(std::string_view key) const { return j_.at(key); }
  std::string path(std::string_view key) const { return path_ + "." + std::string(key); }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    return v.get<double>();
  }

  std::uint64_t count(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

LayerRegParams parse_override(const json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 3 && j.size() != 4) {
      throw ConfigError(where + ": expected [alpha_l2, alpha_l0, beta] or an object");
    }
    for (const auto& v : j) {
      if (!v.is_number()) throw ConfigError(where + ": override entries must be numbers");
    }
    LayerRegParams p{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (j.size() == 4) p.alpha_l1 = j[3].get<double>();
    return p;
  }
  Section s(j, where, {"alpha_l2", "alpha_l0", "beta", "alpha_l1"});
  return {s.number("alpha_l2", 0.0), s.number("alpha_l0", 0.0), s.number("beta", 1.0),
          s.number("alpha_l1", 0.0)};
}

RegularizerSpec parse_regularizer(const json& j, const std::string& where) {
  Section s(j, where, {"kind", "alpha_l2", "alpha_l0", "alpha_l1", "beta", "strategy", "overrides"});
  RegularizerSpec r;
  r.kind = parse_reg_kind(s.text("kind", "none"));
  r.alpha_l2 = s.number("alpha_l2", 0.0);
  r.alpha_l0 = s.number("alpha_l0", 0.0);
  r.alpha_l1 = s.number("alpha_l1", 0.0);
  r.beta = s.number("beta", 1.0);
  r.strategy = parse_reg_strategy(s.text("strategy", "GLOBAL"));
  if (s.has("overrides")) {
    const auto& o = s.at("overrides");
    if (!o.is_array()) throw ConfigError(s.path("overrides") + ": expected a list");
    std::vector<LayerRegParams> layers;
    for (std::size_t i = 0; i < o.size(); ++i) {
      layers.push_back(parse_override(o[i], s.path("overrides") + "[" + std::to_string(i) + "]"));
    }
    r.per_layer_overrides = std::move(layers);
  }
  const bool sep = r.strategy == RegStrategy::sep;
  if (!sep && r.kind == RegKind::l2l0 && !(s.has("alpha_l2") && s.has("alpha_l0"))) {
    throw ConfigError(where + ": kind l2l0 requires both alpha_l2 and alpha_l0");
  }
  r.validate();
  return r;
}

void parse_train(const json& j, const std::string& where, TrainConfig& t, bool allow_reg) {
  std::initializer_list<std::string_view> keys = {"eta", "epochs", "batch_size", "shuffle"};
  std::initializer_list<std::string_view> keys_reg = {"eta", "epochs", "batch_size", "shuffle",
                                                      "regularizer"};
  Section s(j, where, allow_reg ? keys_reg : keys);
  t.eta = s.number("eta", t.eta);
  t.epochs = s.count("epochs", t.epochs);
  t.batch_size = s.count("batch_size", t.batch_size);
  t.shuffle = s.flag("shuffle", t.shuffle);
  if (allow_reg && s.has("regularizer")) {
    t.reg = parse_regularizer(s.at("regularizer"), s.path("regularizer"));
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void parse_data(const json& j, const std::filesystem::path& base, DataConfig& d) {
  Section s(j, "data",
            {"source", "classes", "dims", "train_samples", "test_samples", "noise", "dir",
             "train_images", "train_labels", "test_images", "test_labels"});
  const std::string source = s.text("source", "blobs");
  if (source == "blobs") {
    d.source = DataConfig::Source::blobs;
    for (auto key : {"dir", "train_images", "train_labels", "test_images", "test_labels"}) {
      if (s.has(key)) throw ConfigError(s.path(key) + ": only valid for source \"mnist\"");
    }
    d.classes = s.count("classes", d.classes);
    d.dims = s.count("dims", d.dims);
    d.train_samples = s.count("train_samples", d.train_samples);
    d.test_samples = s.count("test_samples", d.test_samples);
    d.noise = s.number("noise", d.noise);
    if (d.classes < 2 || d.dims < 1 || d.train_samples < 1 || d.test_samples < 1) {
      throw ConfigError("data: blobs need classes >= 2 and dims, sample counts >= 1");
    }
    if (!(d.noise >= 0.0)) throw ConfigError("data.noise must be >= 0");
  } else if (source == "mnist") {
    d.source = DataConfig::Source::mnist;
    for (auto key : {"classes", "dims", "train_samples", "test_samples", "noise"}) {
      if (s.has(key)) throw ConfigError(s.path(key) + ": only valid for source \"blobs\"");
    }
    const auto dir = resolve_path(base, s.text("dir", "."));
    auto file = [&](std::string_view key, const char* name) {
      return s.has(key) ? resolve_path(base, s.text(key, "")) : dir / name;
    };
    d.train_images = file("train_images", "train-images-idx3-ubyte");
    d.train_labels = file("train_labels", "train-labels-idx1-ubyte");
    d.test_images = file("test_images", "t10k-images-idx3-ubyte");
    d.test_labels = file("test_labels", "t10k-labels-idx1-ubyte");
  } else {
    throw ConfigError("data.source: expected \"blobs\" or \"mnist\", got \"" + source + "\"");
  }
}

}  // namespace

RunConfig RunConfig::ci_profile() {
  RunConfig c;
  c.seed = 1;
  c.data = DataConfig{};
  c.hidden = {32, 16};
  c.train.eta = 0.1;
  c.train.epochs = 20;
  c.train.batch_size = 32;
  c.train.reg.kind = RegKind::l2l0;
  c.train.reg.alpha_l2 = 1e-4;
  c.train.reg.alpha_l0 = 1e-3;
  c.train.reg.beta = 10.0;
  c.train.reg.strategy = RegStrategy::norm;
  c.finetune = default_fine_tune_config(c.train);
  c.finetune.epochs = 3;
  c.prune = {PruneStrategy::global, 4.0};
  c.sweep.rates = {1, 2, 4, 8};
  c.sweep.strategies = {PruneStrategy::global, PruneStrategy::layerwise, PruneStrategy::random};
  c.sweep.seeds = {1, 2, 3};
  c.sweep.fine_tune = false;
  c.sweep.ft_cfg = c.finetune;
  return c;
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section s(root, "config",
            {"schema_version", "seed", "data", "network", "train", "regularizer", "finetune",
             "prune", "sweep"});
  if (!s.has("schema_version")) throw ConfigError("config: missing schema_version");
  const auto version = s.count("schema_version", 0);
  if (version != kConfigSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(version));
  }

  RunConfig cfg = RunConfig::ci_profile();
  cfg.seed = s.count("seed", cfg.seed);
  cfg.train.seed = cfg.seed;
  if (s.has("data")) parse_data(s.at("data"), base_dir, cfg.data);
  if (s.has("network")) {
    Section n(s.at("network"), "network", {"hidden"});
    if (n.has("hidden")) {
      const auto& h = n.at("hidden");
      if (!h.is_array()) throw ConfigError("network.hidden: expected a list of layer widths");
      cfg.hidden.clear();
      for (const auto& v : h) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
          throw ConfigError("network.hidden: widths must be positive integers");
        }
        cfg.hidden.push_back(v.get<std::size_t>());
      }
    }
  }
  if (s.has("train")) parse_train(s.at("train"), "train", cfg.train, false);
  if (s.has("regularizer")) cfg.train.reg = parse_regularizer(s.at("regularizer"), "regularizer");
  cfg.train.validate();

  const std::size_t ft_epochs = cfg.finetune.epochs;
  cfg.finetune = default_fine_tune_config(cfg.train);
  cfg.finetune.epochs = ft_epochs;
  if (s.has("finetune")) parse_train(s.at("finetune"), "finetune", cfg.finetune, true);
  cfg.finetune.validate();

  if (s.has("prune")) {
    Section p(s.at("prune"), "prune", {"strategy", "rate"});
    cfg.prune.strategy = parse_prune_strategy(p.text("strategy", "GP"));
    cfg.prune.rate = p.number("rate", cfg.prune.rate);
    if (!(cfg.prune.rate >= 1.0)) throw ConfigError("prune.rate must be >= 1");
  }

  cfg.sweep.ft_cfg = cfg.finetune;
  if (s.has("sweep")) {
    Section w(s.at("sweep"), "sweep", {"rates", "strategies", "seeds", "fine_tune"});
    if (w.has("rates")) {
      cfg.sweep.rates.clear();
      for (const auto& v : w.at("rates")) {
        if (!v.is_number()) throw ConfigError("sweep.rates: expected numbers");
        cfg.sweep.rates.push_back(v.get<double>());
      }
    }
    if (w.has("strategies")) {
      cfg.sweep.strategies.clear();
      for (const auto& v : w.at("strategies")) {
        if (!v.is_string()) throw ConfigError("sweep.strategies: expected strings");
        cfg.sweep.strategies.push_back(parse_prune_strategy(v.get<std::string>()));
      }
    }
    if (w.has("seeds")) {
      cfg.sweep.seeds.clear();
      for (const auto& v : w.at("seeds")) {
        if (!v.is_number_unsigned()) throw ConfigError("sweep.seeds: expected non-negative integers");
        cfg.sweep.seeds.push_back(v.get<std::uint64_t>());
      }
    }
    cfg.sweep.fine_tune = w.flag("fine_tune", cfg.sweep.fine_tune);
  }
  cfg.sweep.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

Datasets load_datasets(const RunConfig& cfg) {
  const auto& d = cfg.data;
  if (d.source == DataConfig::Source::mnist) {
    return {load_mnist(d.train_images, d.train_labels, Split::train),
            load_mnist(d.test_images, d.test_labels, Split::test)};
  }
  // One draw split in two, so train and test share cluster centres.
  Dataset all = synth_blobs(d.classes, d.train_samples + d.test_samples, d.dims, cfg.seed, d.noise);
  auto [train, test] = split_tail(std::move(all), d.test_samples);
  return {std::move(train), std::move(test)};
}

Network build_network(const RunConfig& cfg, std::size_t input_dim, std::size_t classes,
                      std::uint64_t seed) {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(classes);
  Rng rng(seed);
  return init_weights(Network::mlp(sizes), rng);
}

}  // namespace sparsenet
