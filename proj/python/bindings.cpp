#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "sparsenet/cli.hpp"
#include "sparsenet/config.hpp"
#include "sparsenet/errors.hpp"
#include "sparsenet/model_io.hpp"
#include "sparsenet/sweep.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace sparsenet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Matrix from_numpy(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<bool> mask_to_numpy(const LayerMask& m) {
  py::array_t<bool> out({m.rows, m.cols});
  std::copy(m.keep.begin(), m.keep.end(), out.mutable_data());
  return out;
}

Dataset make_dataset(const Array& features, std::vector<int> labels, std::size_t classes, Split split) {
  Dataset d{from_numpy(features), std::move(labels), classes, split};
  d.validate();
  return d;
}

py::tuple curve(RegKind kind, double eta, double alpha, double beta, double alpha_l2, double w_lo,
                double w_hi, std::size_t steps) {
  LayerRegParams p{.alpha_l2 = kind == RegKind::l2 ? alpha : alpha_l2,
                   .alpha_l0 = alpha,
                   .beta = beta,
                   .alpha_l1 = alpha};
  const auto pts = penalization_curve(kind, p, eta, w_lo, w_hi, steps);
  std::vector<double> w, term;
  for (const auto& pt : pts) {
    w.push_back(pt.w);
    term.push_back(pt.term);
  }
  return py::make_tuple(py::array_t<double>(w.size(), w.data()), py::array_t<double>(term.size(), term.data()));
}

}  // namespace

PYBIND11_MODULE(_sparsenet, m) {
  m.doc() = "Sparse MLP training with l0-approximating regularization, pruning and CSR inference";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ArithmeticError>(m, "ArithmeticError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::enum_<Activation>(m, "Activation").value("identity", Activation::identity).value("relu", Activation::relu);
  py::enum_<RegKind>(m, "RegKind")
      .value("none", RegKind::none)
      .value("l2", RegKind::l2)
      .value("l1", RegKind::l1)
      .value("l0", RegKind::l0)
      .value("l2l0", RegKind::l2l0);
  py::enum_<RegStrategy>(m, "RegStrategy")
      .value("GLOBAL", RegStrategy::global)
      .value("NORM", RegStrategy::norm)
      .value("SEP", RegStrategy::sep);
  py::enum_<PruneStrategy>(m, "PruneStrategy")
      .value("GP", PruneStrategy::global)
      .value("LP", PruneStrategy::layerwise)
      .value("RP", PruneStrategy::random);
  py::enum_<Split>(m, "Split").value("train", Split::train).value("test", Split::test);

  py::class_<Network>(m, "Network")
      .def_static(
          "mlp",
          [](std::vector<std::size_t> sizes, std::optional<std::uint64_t> seed) {
            Network net = Network::mlp(sizes);
            if (seed) {
              Rng rng(*seed);
              net = init_weights(std::move(net), rng);
            }
            return net;
          },
          "sizes"_a, "seed"_a = py::none(),
          "ReLU MLP with the given layer widths; weights drawn from `seed` when given, else zero.")
      .def_property_readonly("input_dim", &Network::input_dim)
      .def_property_readonly("output_dim", &Network::output_dim)
      .def_property_readonly("num_layers", &Network::num_layers)
      .def_property_readonly("weight_count", &Network::weight_count)
      .def_property_readonly("bias_count", &Network::bias_count)
      .def_property_readonly("param_count", &Network::param_count)
      .def_property_readonly("nonzero_weight_count", &Network::nonzero_weight_count)
      .def("small_weight_count", &Network::small_weight_count, "threshold"_a)
      .def("fingerprint", &Network::fingerprint)
      .def("weights", [](const Network& n, std::size_t i) { return to_numpy(n.layer(i).weights); }, "layer"_a)
      .def("biases", [](const Network& n, std::size_t i) { return n.layer(i).biases; }, "layer"_a)
      .def(
          "set_weights",
          [](Network& n, std::size_t i, const Array& w) {
            Matrix mw = from_numpy(w);
            if (mw.rows() != n.layer(i).weights.rows() || mw.cols() != n.layer(i).weights.cols()) {
              throw ShapeError("weight array does not match layer " + std::to_string(i));
            }
            n.layer(i).weights = std::move(mw);
          },
          "layer"_a, "weights"_a)
      .def("__eq__", [](const Network& a, const Network& b) { return a == b; })
      .def("__copy__", [](const Network& n) { return n; })
      .def("__deepcopy__", [](const Network& n, py::dict) { return n; }, "memo"_a);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), "features"_a, "labels"_a, "classes"_a, "split"_a = Split::train)
      .def_property_readonly("features", [](const Dataset& d) { return to_numpy(d.features); })
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("classes", &Dataset::classes)
      .def_readonly("split", &Dataset::split)
      .def("__len__", &Dataset::size)
      .def_property_readonly("dims", &Dataset::dims);

  m.def("synth_blobs", &synth_blobs, "classes"_a, "samples"_a, "dims"_a, "seed"_a, "noise"_a = 0.25,
        "split"_a = Split::train);
  m.def("load_mnist", &load_mnist, "images"_a, "labels"_a, "split"_a = Split::train);

  py::class_<LayerRegParams>(m, "LayerRegParams")
      .def(py::init<double, double, double, double>(), "alpha_l2"_a = 0.0, "alpha_l0"_a = 0.0, "beta"_a = 1.0,
           "alpha_l1"_a = 0.0)
      .def_readwrite("alpha_l2", &LayerRegParams::alpha_l2)
      .def_readwrite("alpha_l0", &LayerRegParams::alpha_l0)
      .def_readwrite("beta", &LayerRegParams::beta)
      .def_readwrite("alpha_l1", &LayerRegParams::alpha_l1)
      .def("__eq__", [](const LayerRegParams& a, const LayerRegParams& b) { return a == b; });

  py::class_<RegularizerSpec>(m, "RegularizerSpec")
      .def(py::init([](RegKind kind, double alpha_l2, double alpha_l0, double beta, double alpha_l1,
                       RegStrategy strategy, std::optional<std::vector<LayerRegParams>> overrides) {
             RegularizerSpec s{kind, alpha_l2, alpha_l0, beta, alpha_l1, strategy, std::move(overrides)};
             s.validate();
             return s;
           }),
           "kind"_a = RegKind::none, "alpha_l2"_a = 0.0, "alpha_l0"_a = 0.0, "beta"_a = 1.0, "alpha_l1"_a = 0.0,
           "strategy"_a = RegStrategy::global, "overrides"_a = py::none())
      .def_readwrite("kind", &RegularizerSpec::kind)
      .def_readwrite("alpha_l2", &RegularizerSpec::alpha_l2)
      .def_readwrite("alpha_l0", &RegularizerSpec::alpha_l0)
      .def_readwrite("beta", &RegularizerSpec::beta)
      .def_readwrite("alpha_l1", &RegularizerSpec::alpha_l1)
      .def_readwrite("strategy", &RegularizerSpec::strategy)
      .def("resolve", [](const RegularizerSpec& s, std::vector<std::size_t> sizes) { return resolve(s, sizes).layers; },
           "layer_sizes"_a);

  m.def("penalty_gradient", &penalty_gradient, "kind"_a, "w"_a, "params"_a);
  m.def(
      "penalty_value",
      [](RegKind kind, const Network& net, const RegularizerSpec& spec) {
        return penalty_value(kind, net, resolve(spec, net.layer_weight_counts()));
      },
      "kind"_a, "net"_a, "spec"_a);
  m.def("penalization_curve", &curve, "kind"_a, "eta"_a, "alpha"_a, "beta"_a = 1.0, "alpha_l2"_a = 0.0,
        "w_lo"_a = 0.0, "w_hi"_a = 1.0, "steps"_a = 1001,
        "Returns (w, term) arrays with term = -eta * penalty gradient.");

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](double eta, std::size_t epochs, std::size_t batch_size, std::uint64_t seed,
                       RegularizerSpec reg, bool shuffle) {
             TrainConfig c{eta, epochs, batch_size, seed, std::move(reg), shuffle};
             c.validate();
             return c;
           }),
           "eta"_a = 0.05, "epochs"_a = 10, "batch_size"_a = 64, "seed"_a = 1, "reg"_a = RegularizerSpec{},
           "shuffle"_a = true)
      .def_readwrite("eta", &TrainConfig::eta)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("reg", &TrainConfig::reg)
      .def_readwrite("shuffle", &TrainConfig::shuffle)
      .def("fine_tune_defaults", &default_fine_tune_config);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &EpochRecord::epoch)
      .def_readonly("loss", &EpochRecord::loss)
      .def_readonly("train_acc", &EpochRecord::train_acc)
      .def_readonly("eval_acc", &EpochRecord::eval_acc)
      .def_readonly("small_weight_count", &EpochRecord::small_weight_count);

  m.def(
      "train",
      [](const Network& net, const Dataset& data, const TrainConfig& cfg, const Dataset* eval) {
        py::gil_scoped_release release;
        TrainResult r = train(net, data, cfg, eval);
        return std::make_pair(std::move(r.net), std::move(r.report.epochs));
      },
      "net"_a, "data"_a, "cfg"_a, "eval"_a = nullptr, "Returns (trained network, list of EpochRecord).");

  py::class_<PruneMask>(m, "PruneMask")
      .def_static("all", &PruneMask::all, "net"_a, "keep"_a)
      .def_property_readonly("kept", &PruneMask::kept)
      .def_property_readonly("total", &PruneMask::total)
      .def("layer", [](const PruneMask& pm, std::size_t i) { return mask_to_numpy(pm.layers.at(i)); }, "layer"_a)
      .def("__eq__", [](const PruneMask& a, const PruneMask& b) { return a == b; });

  m.def(
      "prune",
      [](const Network& net, PruneStrategy strategy, double rate, std::uint64_t seed) {
        Rng rng(seed);
        return prune(net, strategy, rate, rng);
      },
      "net"_a, "strategy"_a, "rate"_a, "seed"_a = 1);
  m.def("keep_count", &keep_count, "count"_a, "rate"_a);
  m.def("apply_mask", &apply_mask, "net"_a, "mask"_a);
  m.def("compression_rate", &compression_rate, "total"_a, "remaining"_a);

  py::class_<CompressionStats>(m, "CompressionStats")
      .def_readonly("total_weights", &CompressionStats::total_weights)
      .def_readonly("kept_weights", &CompressionStats::kept_weights)
      .def_readonly("total_biases", &CompressionStats::total_biases)
      .def_readonly("weight_rate", &CompressionStats::weight_rate)
      .def_readonly("param_rate", &CompressionStats::param_rate);
  m.def("compression_stats", &compression_stats, "net"_a, "mask"_a);

  m.def(
      "fine_tune",
      [](const Network& net, const PruneMask& mask, const Dataset& data, const TrainConfig& cfg,
         const Dataset* eval) {
        py::gil_scoped_release release;
        TrainResult r = fine_tune(net, mask, data, cfg, eval);
        return std::make_pair(std::move(r.net), std::move(r.report.epochs));
      },
      "net"_a, "mask"_a, "data"_a, "cfg"_a, "eval"_a = nullptr);

  py::class_<SparseModel>(m, "SparseModel")
      .def_property_readonly("nnz", &SparseModel::nnz)
      .def_property_readonly("input_dim", &SparseModel::input_dim)
      .def_property_readonly("output_dim", &SparseModel::output_dim)
      .def("__eq__", [](const SparseModel& a, const SparseModel& b) { return a == b; });
  m.def("to_sparse", &to_sparse, "net"_a, "mask"_a);
  m.def("densify", &densify, "model"_a);

  m.def("forward", [](const Network& net, const Array& x) { return to_numpy(forward(net, from_numpy(x))); },
        "net"_a, "batch"_a);
  m.def(
      "sparse_forward",
      [](const SparseModel& s, const Array& x) { return to_numpy(sparse_forward(s, from_numpy(x))); }, "model"_a,
      "batch"_a);
  m.def("evaluate", py::overload_cast<const Network&, const Dataset&>(&evaluate), "net"_a, "data"_a);
  m.def("evaluate", py::overload_cast<const SparseModel&, const Dataset&>(&evaluate), "model"_a, "data"_a);

  m.def("save_dense", &save_dense, "path"_a, "net"_a);
  m.def("save_sparse", &save_sparse, "path"_a, "model"_a);
  m.def(
      "load_model",
      [](const std::filesystem::path& p) {
        LoadedModel lm = load_model(p);
        return std::make_pair(std::move(lm.net), std::move(lm.mask));
      },
      "path"_a, "Returns (network, mask or None).");

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("strategy", &SweepRecord::strategy)
      .def_readonly("rate", &SweepRecord::rate)
      .def_readonly("fine_tuned", &SweepRecord::fine_tuned)
      .def_readonly("accuracy", &SweepRecord::accuracy)
      .def_readonly("nnz", &SweepRecord::nnz)
      .def_readonly("seed", &SweepRecord::seed);
  m.def(
      "sweep",
      [](const Network& net, const Dataset& train_set, const Dataset& eval_set, std::vector<double> rates,
         std::vector<PruneStrategy> strategies, std::vector<std::uint64_t> seeds, std::optional<TrainConfig> ft) {
        SweepConfig c{std::move(rates), std::move(strategies), std::move(seeds), ft.has_value(),
                      ft.value_or(TrainConfig{})};
        py::gil_scoped_release release;
        return sweep(net, train_set, eval_set, c);
      },
      "net"_a, "train"_a, "eval"_a, "rates"_a, "strategies"_a, "seeds"_a, "fine_tune"_a = py::none(),
      "Prune/evaluate grid; pass a TrainConfig as fine_tune to also retrain each pruned copy.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "args"_a, "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
