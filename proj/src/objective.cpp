#include "quantboost/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "quantboost/error.hpp"

namespace quantboost {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ParameterError("tau must lie in (0, 1), got " + std::to_string(tau));
  }
}

void check_upsilon(double upsilon) {
  if (!(upsilon > 0.0) || !std::isfinite(upsilon)) {
    throw ParameterError("upsilon must be positive, got " +
                         std::to_string(upsilon));
  }
}

}  // namespace

void QuantileHuberParams::validate() const {
  check_tau(tau);
  check_upsilon(upsilon);
}

double pinball_loss(double t, double tau) {
  check_tau(tau);
  return t < 0.0 ? (tau - 1.0) * t : tau * t;
}

double huber_norm(double t, double upsilon) {
  check_upsilon(upsilon);
  const double a = std::abs(t);
  return a <= upsilon ? t * t / (2.0 * upsilon) : a - upsilon / 2.0;
}

double quantile_huber_loss(double t, const QuantileHuberParams& params) {
  params.validate();
  const double weight = t < 0.0 ? 1.0 - params.tau : params.tau;
  return weight * huber_norm(t, params.upsilon);
}

GradHess quantile_huber_grad_hess(double y, double yhat,
                                  const QuantileHuberParams& params) {
  params.validate();
  const double tau = params.tau;
  const double ups = params.upsilon;
  const double t = y - yhat;
  // d/dyhat = -d/dt.
  if (t < -ups) return {1.0 - tau, 0.0};
  if (t < 0.0) return {(tau - 1.0) * t / ups, (1.0 - tau) / ups};
  if (t <= ups) return {-tau * t / ups, tau / ups};
  return {-tau, 0.0};
}

double squared_error_loss(double y, double yhat) {
  const double r = yhat - y;
  return 0.5 * r * r;
}

GradHess squared_error_grad_hess(double y, double yhat) {
  return {yhat - y, 1.0};
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ParameterError("quantile level must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::string ObjectiveSpec::name() const {
  switch (kind) {
    case ObjectiveKind::kSquaredError:
      return "squared_error";
    case ObjectiveKind::kQuantileHuber:
      return "quantile_huber";
  }
  return "unknown";
}

void ObjectiveSpec::validate() const {
  if (kind == ObjectiveKind::kQuantileHuber) quantile.validate();
}

double SquaredErrorObjective::loss(double y, double yhat) const {
  return squared_error_loss(y, yhat);
}

GradHess SquaredErrorObjective::grad_hess(double y, double yhat) const {
  return squared_error_grad_hess(y, yhat);
}

double SquaredErrorObjective::initial_prediction(
    std::span<const double> targets) const {
  if (targets.empty()) throw DataError("mean of an empty sample");
  return std::accumulate(targets.begin(), targets.end(), 0.0) /
         static_cast<double>(targets.size());
}

QuantileHuberObjective::QuantileHuberObjective(QuantileHuberParams params)
    : params_(params) {
  params_.validate();
}

double QuantileHuberObjective::loss(double y, double yhat) const {
  return quantile_huber_loss(y - yhat, params_);
}

GradHess QuantileHuberObjective::grad_hess(double y, double yhat) const {
  return quantile_huber_grad_hess(y, yhat, params_);
}

double QuantileHuberObjective::initial_prediction(
    std::span<const double> targets) const {
  return empirical_quantile(targets, params_.tau);
}

ObjectiveSpec QuantileHuberObjective::spec() const {
  return {ObjectiveKind::kQuantileHuber, params_};
}

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::kSquaredError:
      return std::make_unique<SquaredErrorObjective>();
    case ObjectiveKind::kQuantileHuber:
      return std::make_unique<QuantileHuberObjective>(spec.quantile);
  }
  throw ParameterError("unknown objective kind");
}

}  // namespace quantboost
