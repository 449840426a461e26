#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sparsenet {

class Network;

enum class RegKind { none, l2, l1, l0, l2l0 };
enum class RegStrategy { global, norm, sep };

std::string_view to_string(RegKind k) noexcept;
std::string_view to_string(RegStrategy s) noexcept;
/// Parses "none", "l2", "l1", "l0", "l2l0". Throws ConfigError otherwise.
RegKind parse_reg_kind(std::string_view s);
/// Parses "GLOBAL", "NORM", "SEP" (case-insensitive). Throws ConfigError otherwise.
RegStrategy parse_reg_strategy(std::string_view s);

/// Penalty strengths for one layer. alpha_l1 is only read by the l1 kind.
struct LayerRegParams {
  double alpha_l2 = 0.0;
  double alpha_l0 = 0.0;
  double beta = 1.0;
  double alpha_l1 = 0.0;

  friend bool operator==(const LayerRegParams&, const LayerRegParams&) = default;
};

/// Regularizer configuration as written in a run config.
struct RegularizerSpec {
  RegKind kind = RegKind::none;
  double alpha_l2 = 0.0;
  double alpha_l0 = 0.0;
  double beta = 1.0;
  double alpha_l1 = 0.0;
  RegStrategy strategy = RegStrategy::global;
  std::optional<std::vector<LayerRegParams>> per_layer_overrides;

  /// Throws ConfigError on negative alphas, beta < 1, non-finite values, or
  /// an override list that does not match the strategy.
  void validate() const;
};

/// Effective per-layer parameters after strategy resolution.
struct ResolvedReg {
  std::vector<LayerRegParams> layers;

  std::size_t size() const noexcept { return layers.size(); }
  const LayerRegParams& operator[](std::size_t i) const { return layers[i]; }
};

/// GLOBAL copies the global triple to every layer. SEP echoes the overrides.
/// NORM scales each alpha by (mean layer size / layer size) and leaves beta alone.
ResolvedReg resolve(const RegularizerSpec& spec, std::span<const std::size_t> layer_sizes);

/// Penalty function Omega(w) summed over every layer.
///
/// Single-norm kinds return the unweighted norm (sum w^2, sum |w|, or
/// sum 1 - exp(-beta |w|) with each layer's beta). l2l0 returns
/// alpha_l2 * ||w||_2^2 + alpha_l0 * ||w||_0' per layer, summed. none returns 0.
double penalty_value(RegKind kind, std::span<const std::span<const double>> layers,
                     const ResolvedReg& resolved);
double penalty_value(RegKind kind, const Network& net, const ResolvedReg& resolved);

/// alpha * Omega(w) for every kind: the exact term added to the loss, whose
/// partial derivatives are penalty_gradient.
double weighted_penalty_value(RegKind kind, std::span<const std::span<const double>> layers,
                              const ResolvedReg& resolved);

/// alpha * dOmega/dw_j for a single weight; the learning rate is not applied.
///   l2   -> 2 alpha_l2 w
///   l1   -> alpha_l1 sign(w)
///   l0   -> alpha_l0 beta sign(w) exp(-beta |w|)
///   l2l0 -> the l2 term plus the l0 term
/// sign(0) = 0.
double penalty_gradient(RegKind kind, double w, const LayerRegParams& params) noexcept;

struct CurvePoint {
  double w = 0.0;
  double term = 0.0;
};

/// Samples the update-rule penalization term -eta * penalty_gradient(w) at
/// `steps` evenly spaced points over [w_lo, w_hi], both ends included.
std::vector<CurvePoint> penalization_curve(RegKind kind, const LayerRegParams& params, double eta,
                                           double w_lo, double w_hi, std::size_t steps);

}  // namespace sparsenet
