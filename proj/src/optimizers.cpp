#include "manvb/optimizers.hpp"

#include "manvb/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace manvb {

namespace {

// sgn(E) o sqrt|E|: accumulators that went through projection or transport
// may have negative entries.
Matrix signed_sqrt(const Matrix& e) {
  return e.unaryExpr([](double v) { return v < 0.0 ? -std::sqrt(-v) : std::sqrt(v); });
}

TangentVector transported_or_zero(const std::optional<TangentVector>& acc, const ManifoldPoint& to) {
  if (!acc) return TangentVector::zero(to);
  return transport(acc->base(), to, *acc);
}

void shift_history(OptimizerState& state, const ManifoldPoint& b) {
  state.prev_prev_point = std::move(state.prev_point);
  state.prev_point = b;
  ++state.step_count;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + " produced non-finite entries");
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view display_name(RuleKind rule) {
  switch (rule) {
    case RuleKind::RgdBasic:
      return "RGD-Basic";
    case RuleKind::CrgdM:
      return "cRGD-M";
    case RuleKind::RmsProp:
      return "RMSProp";
    case RuleKind::RgdAdadelta:
      return "RGD-ADADELTA";
  }
  return "?";
}

std::optional<RuleKind> parse_rule(std::string_view text) {
  const std::string t = lower(text);
  if (t == "rgd-basic" || t == "rgd") return RuleKind::RgdBasic;
  if (t == "crgd-m" || t == "momentum") return RuleKind::CrgdM;
  if (t == "rmsprop") return RuleKind::RmsProp;
  if (t == "rgd-adadelta" || t == "adadelta") return RuleKind::RgdAdadelta;
  return std::nullopt;
}

void HyperParams::validate() const {
  if (!(eta > 0.0)) throw DomainError("eta must be > 0");
  if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("zeta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0)) throw DomainError("adadelta rho must lie in (0, 1)");
  if (!(adadelta_eps > 0.0)) throw DomainError("adadelta epsilon must be > 0");
}

AdadeltaState AdadeltaState::zeros(Index n) { return {Vector::Zero(n), Vector::Zero(n)}; }

bool OptimizerState::all_finite() const {
  auto ok = [](const std::optional<TangentVector>& t) { return !t || t->matrix().allFinite(); };
  auto ok_ad = [](const AdadeltaState& s) { return s.sq_grad.allFinite() && s.sq_step.allFinite(); };
  return ok(momentum) && ok(sq_grad_avg) && ok(sq_step_avg) && ok_ad(mu) && ok_ad(d1) && ok_ad(d2) && ok_ad(b);
}

TangentVector riemann_grad(const ManifoldPoint& b, const Matrix& g_b) { return project(b, g_b); }

ManifoldPoint step_rgd_basic(const ManifoldPoint& b, const TangentVector& rgrad, double eta) {
  return retract(b, scaled(rgrad, eta));
}

RuleStep step_crgd_m(const ManifoldPoint& b, const TangentVector& rgrad, OptimizerState state,
                     const HyperParams& hyper) {
  const TangentVector carried = transported_or_zero(state.momentum, b);
  TangentVector momentum = combine(hyper.zeta, carried, hyper.eta, rgrad);
  ManifoldPoint next = retract(b, momentum);
  state.momentum = std::move(momentum);
  shift_history(state, b);
  return {std::move(next), std::move(state)};
}

RuleStep step_rmsprop(const ManifoldPoint& b, const Matrix& g_b, OptimizerState state, const HyperParams& hyper) {
  const TangentVector carried = transported_or_zero(state.sq_grad_avg, b);
  TangentVector sq_grad = combine(hyper.zeta, carried, 1.0 - hyper.zeta, project(b, g_b.cwiseProduct(g_b)));

  const Matrix normalized = g_b.cwiseQuotient((signed_sqrt(sq_grad.matrix()).array() + hyper.epsilon).matrix());
  require_finite(normalized, "RMSProp normalisation");

  ManifoldPoint next = retract(b, scaled(project(b, normalized), hyper.eta));
  state.sq_grad_avg = std::move(sq_grad);
  shift_history(state, b);
  return {std::move(next), std::move(state)};
}

RuleStep step_rgd_adadelta(const ManifoldPoint& b, const Matrix& g_b, OptimizerState state,
                           const HyperParams& hyper) {
  const TangentVector carried = transported_or_zero(state.sq_grad_avg, b);
  TangentVector sq_grad = combine(hyper.zeta, carried, 1.0 - hyper.zeta, project(b, g_b.cwiseProduct(g_b)));

  const Matrix prev_sq_step =
      state.sq_step_avg ? state.sq_step_avg->matrix() : Matrix::Zero(b.rows(), b.cols());
  const Matrix numer = (signed_sqrt(prev_sq_step).array() + hyper.epsilon).matrix();
  const Matrix denom = (signed_sqrt(sq_grad.matrix()).array() + hyper.epsilon).matrix();
  const Matrix delta = numer.cwiseQuotient(denom).cwiseProduct(g_b);
  require_finite(delta, "RGD-ADADELTA step ratio");

  // E(dB^2) lives one step behind: transported B(t-2) -> B(t-1) and
  // refreshed at B(t-1). Before two steps exist the current point stands in.
  const ManifoldPoint& lagged = state.prev_point ? *state.prev_point : b;
  const TangentVector carried_step = transported_or_zero(state.sq_step_avg, lagged);
  TangentVector sq_step =
      combine(hyper.zeta, carried_step, 1.0 - hyper.zeta, project(lagged, delta.cwiseProduct(delta)));

  ManifoldPoint next = retract(b, project(b, delta));
  state.sq_grad_avg = std::move(sq_grad);
  state.sq_step_avg = std::move(sq_step);
  shift_history(state, b);
  return {std::move(next), std::move(state)};
}

RuleStep step_rule(RuleKind rule, const ManifoldPoint& b, const Matrix& g_b, OptimizerState state,
                   const HyperParams& hyper) {
  switch (rule) {
    case RuleKind::RgdBasic: {
      ManifoldPoint next = step_rgd_basic(b, riemann_grad(b, g_b), hyper.eta);
      shift_history(state, b);
      return {std::move(next), std::move(state)};
    }
    case RuleKind::CrgdM:
      return step_crgd_m(b, riemann_grad(b, g_b), std::move(state), hyper);
    case RuleKind::RmsProp:
      return step_rmsprop(b, g_b, std::move(state), hyper);
    case RuleKind::RgdAdadelta:
      return step_rgd_adadelta(b, g_b, std::move(state), hyper);
  }
  throw DomainError("unknown update rule");
}

AdadeltaStep step_euclidean_adadelta(const Vector& value, const Vector& grad, AdadeltaState state,
                                     const HyperParams& hyper, std::optional<double> floor) {
  const Index n = value.size();
  if (grad.size() != n) throw DimensionError("adadelta: gradient length mismatch");
  if (state.sq_grad.size() != n || state.sq_step.size() != n) {
    if (state.sq_grad.size() == 0 && state.sq_step.size() == 0) {
      state = AdadeltaState::zeros(n);
    } else {
      throw DimensionError("adadelta: accumulator length mismatch");
    }
  }
  const double rho = hyper.adadelta_rho;
  const double eps = hyper.adadelta_eps;
  state.sq_grad = rho * state.sq_grad + (1.0 - rho) * grad.cwiseProduct(grad);
  const Vector delta = ((state.sq_step.array() + eps).sqrt() / (state.sq_grad.array() + eps).sqrt() *
                        grad.array())
                           .matrix();
  state.sq_step = rho * state.sq_step + (1.0 - rho) * delta.cwiseProduct(delta);
  Vector next = value + delta;
  if (!next.allFinite()) throw NumericalError("adadelta produced non-finite values");
  if (floor) {
    for (Index i = 0; i < n; ++i)
      if (std::abs(next[i]) < *floor) next[i] = next[i] < 0.0 ? -*floor : *floor;
  }
  return {std::move(next), std::move(state)};
}

}  // namespace manvb
