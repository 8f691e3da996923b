#pragma once

// Update rules for the factor matrix B on its manifold, and Euclidean
// ADADELTA for the unconstrained blocks (mu, d1, d2).
//
// All rules ascend the lower bound: they retract along +step where the
// descent form on -L would retract along -step.

#include "manvb/manifold.hpp"

#include <optional>
#include <string_view>

namespace manvb {

enum class RuleKind { RgdBasic, CrgdM, RmsProp, RgdAdadelta };

/// "RGD-Basic", "cRGD-M", "RMSProp", "RGD-ADADELTA".
std::string_view display_name(RuleKind rule);
/// Accepts the display names case-insensitively as well as the CLI spellings
/// rgd-basic, crgd-m, rmsprop, rgd-adadelta.
std::optional<RuleKind> parse_rule(std::string_view text);

inline constexpr RuleKind kAllRules[] = {RuleKind::RgdBasic, RuleKind::CrgdM, RuleKind::RmsProp,
                                         RuleKind::RgdAdadelta};

struct HyperParams {
  double eta = 0.05;    // step size (RGD-Basic, cRGD-M, RMSProp)
  double zeta = 0.95;   // momentum / decay constant
  double epsilon = 1e-6;
  double adadelta_rho = 0.95;  // Euclidean ADADELTA decay
  double adadelta_eps = 1e-6;

  /// Throws DomainError unless eta > 0, 0 < zeta < 1, epsilon > 0 and the
  /// ADADELTA constants satisfy the same bounds.
  void validate() const;
};

/// Accumulators for one Euclidean ADADELTA block.
struct AdadeltaState {
  Vector sq_grad;  // E[g^2]
  Vector sq_step;  // E[delta^2]

  static AdadeltaState zeros(Index n);
};

struct OptimizerState {
  /// Momentum m^(t), tangent at the point of the previous step (cRGD-M).
  std::optional<TangentVector> momentum;
  /// E(g_B^2), tangent at the point of the previous step (RMSProp, RGD-ADADELTA).
  std::optional<TangentVector> sq_grad_avg;
  /// E(dB^2), tangent one step further back (RGD-ADADELTA).
  std::optional<TangentVector> sq_step_avg;
  /// B^(t-1) and B^(t-2) relative to the next call.
  std::optional<ManifoldPoint> prev_point;
  std::optional<ManifoldPoint> prev_prev_point;
  long step_count = 0;

  // Euclidean ADADELTA accumulators; `b` is used only by the unconstrained
  // baseline.
  AdadeltaState mu;
  AdadeltaState d1;
  AdadeltaState d2;
  AdadeltaState b;

  bool all_finite() const;
};

struct RuleStep {
  ManifoldPoint point;
  OptimizerState state;
};

/// Projection of the Euclidean gradient onto the tangent space at b.
TangentVector riemann_grad(const ManifoldPoint& b, const Matrix& g_b);

/// B' = r_B(eta * rgrad).
ManifoldPoint step_rgd_basic(const ManifoldPoint& b, const TangentVector& rgrad, double eta);

/// m' = zeta * Gamma(m) + eta * rgrad,  B' = r_B(m').
RuleStep step_crgd_m(const ManifoldPoint& b, const TangentVector& rgrad, OptimizerState state,
                     const HyperParams& hyper);

/// E' = zeta * Gamma(E) + (1 - zeta) * pi_B(g o g),
/// B' = r_B(eta * pi_B(g / (sgn(E') o sqrt|E'| + eps))).
RuleStep step_rmsprop(const ManifoldPoint& b, const Matrix& g_b, OptimizerState state, const HyperParams& hyper);

/// Learning-rate-free rule. In order:
///   E(g^2)  <- zeta * Gamma(E(g^2)) + (1 - zeta) * pi_B(g o g)
///   dB       = (sgn(E(dB^2)) o sqrt|E(dB^2)| + eps) / (sgn(E(g^2)) o sqrt|E(g^2)| + eps) o g
///   E(dB^2) <- zeta * Gamma_{B(t-2) -> B(t-1)}(E(dB^2)) + (1 - zeta) * pi_{B(t-1)}(dB o dB)
///   B'       = r_B(pi_B(dB))
/// where E(dB^2) in the ratio is the value from before its update.
RuleStep step_rgd_adadelta(const ManifoldPoint& b, const Matrix& g_b, OptimizerState state,
                           const HyperParams& hyper);

/// Dispatches to one of the four rules and keeps the point history and step
/// count up to date for all of them.
RuleStep step_rule(RuleKind rule, const ManifoldPoint& b, const Matrix& g_b, OptimizerState state,
                   const HyperParams& hyper);

struct AdadeltaStep {
  Vector value;
  AdadeltaState state;
};

/// Standard ADADELTA, ascending:
///   E[g^2] <- rho E[g^2] + (1 - rho) g^2
///   delta   = sqrt(E[delta^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[delta^2] <- rho E[delta^2] + (1 - rho) delta^2
///   value  += delta
/// With `floor` set the result is pushed out to |value_i| >= floor.
AdadeltaStep step_euclidean_adadelta(const Vector& value, const Vector& grad, AdadeltaState state,
                                     const HyperParams& hyper, std::optional<double> floor = std::nullopt);

}  // namespace manvb
