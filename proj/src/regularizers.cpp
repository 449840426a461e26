#include "sparsenet/regularizers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "sparsenet/errors.hpp"
#include "sparsenet/model.hpp"

namespace sparsenet {

namespace {

double sign(double w) noexcept { return (w > 0.0) - (w < 0.0); }

void check_layer_params(const LayerRegParams& p, const std::string& where) {
  const bool finite = std::isfinite(p.alpha_l2) && std::isfinite(p.alpha_l0) &&
                      std::isfinite(p.alpha_l1) && std::isfinite(p.beta);
  if (!finite) throw ConfigError(where + ": regularizer parameters must be finite");
  if (p.alpha_l2 < 0.0 || p.alpha_l0 < 0.0 || p.alpha_l1 < 0.0) {
    throw ConfigError(where + ": penalty strengths must be >= 0");
  }
  if (p.beta < 1.0) throw ConfigError(where + ": beta must be >= 1");
}

double l2_norm_sq(std::span<const double> w) noexcept {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

double l1_norm(std::span<const double> w) noexcept {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double l0_approx(std::span<const double> w, double beta) noexcept {
  double s = 0.0;
  for (double v : w) s += 1.0 - std::exp(-beta * std::abs(v));
  return s;
}

void check_layout(std::span<const std::span<const double>> layers, const ResolvedReg& resolved) {
  if (layers.size() != resolved.size()) {
    throw ShapeError("penalty: " + std::to_string(layers.size()) + " weight blocks but " +
                     std::to_string(resolved.size()) + " resolved layer parameter sets");
  }
}

std::vector<std::span<const double>> weight_blocks(const Network& net) {
  std::vector<std::span<const double>> blocks;
  for (const auto& l : net.layers()) blocks.push_back(l.weights.data());
  return blocks;
}

}  // namespace

std::string_view to_string(RegKind k) noexcept {
  switch (k) {
    case RegKind::none:
      return "none";
    case RegKind::l2:
      return "l2";
    case RegKind::l1:
      return "l1";
    case RegKind::l0:
      return "l0";
    case RegKind::l2l0:
      return "l2l0";
  }
  return "unknown";
}

std::string_view to_string(RegStrategy s) noexcept {
  switch (s) {
    case RegStrategy::global:
      return "GLOBAL";
    case RegStrategy::norm:
      return "NORM";
    case RegStrategy::sep:
      return "SEP";
  }
  return "unknown";
}

RegKind parse_reg_kind(std::string_view s) {
  for (RegKind k : {RegKind::none, RegKind::l2, RegKind::l1, RegKind::l0, RegKind::l2l0}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown regularizer kind '" + std::string(s) + "'");
}

RegStrategy parse_reg_strategy(std::string_view s) {
  std::string upper(s);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (RegStrategy st : {RegStrategy::global, RegStrategy::norm, RegStrategy::sep}) {
    if (upper == to_string(st)) return st;
  }
  throw ConfigError("unknown regularizer strategy '" + std::string(s) + "'");
}

void RegularizerSpec::validate() const {
  check_layer_params({alpha_l2, alpha_l0, beta, alpha_l1}, "regularizer");
  if (strategy == RegStrategy::sep) {
    if (!per_layer_overrides || per_layer_overrides->empty()) {
      throw ConfigError("SEP strategy requires per-layer overrides");
    }
    for (std::size_t i = 0; i < per_layer_overrides->size(); ++i) {
      check_layer_params((*per_layer_overrides)[i], "override " + std::to_string(i));
    }
  } else if (per_layer_overrides) {
    throw ConfigError(std::string(to_string(strategy)) +
                      " strategy does not accept per-layer overrides");
  }
}

ResolvedReg resolve(const RegularizerSpec& spec, std::span<const std::size_t> layer_sizes) {
  spec.validate();
  if (layer_sizes.empty()) throw ConfigError("resolve: no layers");
  if (std::any_of(layer_sizes.begin(), layer_sizes.end(), [](std::size_t n) { return n == 0; })) {
    throw ConfigError("resolve: every layer must hold at least one weight");
  }
  const LayerRegParams global{spec.alpha_l2, spec.alpha_l0, spec.beta, spec.alpha_l1};
  ResolvedReg out;
  switch (spec.strategy) {
    case RegStrategy::global:
      out.layers.assign(layer_sizes.size(), global);
      break;
    case RegStrategy::sep:
      if (spec.per_layer_overrides->size() != layer_sizes.size()) {
        throw ConfigError("SEP strategy has " + std::to_string(spec.per_layer_overrides->size()) +
                          " overrides for " + std::to_string(layer_sizes.size()) + " layers");
      }
      out.layers = *spec.per_layer_overrides;
      break;
    case RegStrategy::norm: {
      const double mean =
          std::accumulate(layer_sizes.begin(), layer_sizes.end(), 0.0) / layer_sizes.size();
      for (std::size_t n : layer_sizes) {
        const double scale = mean / static_cast<double>(n);
        out.layers.push_back({global.alpha_l2 * scale, global.alpha_l0 * scale, global.beta,
                              global.alpha_l1 * scale});
      }
      break;
    }
  }
  return out;
}

double penalty_value(RegKind kind, std::span<const std::span<const double>> layers,
                     const ResolvedReg& resolved) {
  check_layout(layers, resolved);
  double total = 0.0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& p = resolved[i];
    switch (kind) {
      case RegKind::none:
        break;
      case RegKind::l2:
        total += l2_norm_sq(layers[i]);
        break;
      case RegKind::l1:
        total += l1_norm(layers[i]);
        break;
      case RegKind::l0:
        total += l0_approx(layers[i], p.beta);
        break;
      case RegKind::l2l0:
        total += p.alpha_l2 * l2_norm_sq(layers[i]) + p.alpha_l0 * l0_approx(layers[i], p.beta);
        break;
    }
  }
  return total;
}

double penalty_value(RegKind kind, const Network& net, const ResolvedReg& resolved) {
  const auto blocks = weight_blocks(net);
  return penalty_value(kind, blocks, resolved);
}

double weighted_penalty_value(RegKind kind, std::span<const std::span<const double>> layers,
                              const ResolvedReg& resolved) {
  check_layout(layers, resolved);
  double total = 0.0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& p = resolved[i];
    switch (kind) {
      case RegKind::none:
        break;
      case RegKind::l2:
        total += p.alpha_l2 * l2_norm_sq(layers[i]);
        break;
      case RegKind::l1:
        total += p.alpha_l1 * l1_norm(layers[i]);
        break;
      case RegKind::l0:
        total += p.alpha_l0 * l0_approx(layers[i], p.beta);
        break;
      case RegKind::l2l0:
        total += p.alpha_l2 * l2_norm_sq(layers[i]) + p.alpha_l0 * l0_approx(layers[i], p.beta);
        break;
    }
  }
  return total;
}

double penalty_gradient(RegKind kind, double w, const LayerRegParams& p) noexcept {
  const auto l2_term = [&] { return 2.0 * p.alpha_l2 * w; };
  const auto l0_term = [&] { return p.alpha_l0 * p.beta * sign(w) * std::exp(-p.beta * std::abs(w)); };
  switch (kind) {
    case RegKind::none:
      return 0.0;
    case RegKind::l2:
      return l2_term();
    case RegKind::l1:
      return p.alpha_l1 * sign(w);
    case RegKind::l0:
      return l0_term();
    case RegKind::l2l0:
      return l2_term() + l0_term();
  }
  return 0.0;
}

std::vector<CurvePoint> penalization_curve(RegKind kind, const LayerRegParams& params, double eta,
                                           double w_lo, double w_hi, std::size_t steps) {
  if (steps < 2) throw ConfigError("penalization curve needs at least 2 steps");
  if (!(w_lo <= w_hi) || !std::isfinite(w_lo) || !std::isfinite(w_hi)) {
    throw ConfigError("penalization curve range must be finite with lo <= hi");
  }
  std::vector<CurvePoint> out;
  out.reserve(steps);
  const double span = w_hi - w_lo;
  for (std::size_t i = 0; i < steps; ++i) {
    const double w = i + 1 == steps
                         ? w_hi
                         : w_lo + span * static_cast<double>(i) / static_cast<double>(steps - 1);
    out.push_back({w, -eta * penalty_gradient(kind, w, params)});
  }
  return out;
}

}  // namespace sparsenet
