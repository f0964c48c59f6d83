#pragma once

#include <memory>
#include <span>
#include <string>

namespace quantboost {

/// First and second derivative of a per-sample loss with respect to the
/// current prediction.
struct GradHess {
  double g = 0.0;
  double h = 0.0;
};

/// Parameters of the Huber-smoothed quantile loss. `tau` is the target
/// quantile level in (0, 1); `upsilon` is the half-width of the quadratic
/// zone, in target units.
struct QuantileHuberParams {
  double tau = 0.5;
  double upsilon = 1.0;

  /// Throws ParameterError unless 0 < tau < 1 and upsilon > 0.
  void validate() const;
};

// Loss primitives. All of them are pure and thread-safe. The error argument
// `t` is always y - yhat.

/// Check (pinball) loss: (tau - 1) * t for t < 0, tau * t otherwise.
double pinball_loss(double t, double tau);

/// Huber norm: t^2 / (2 upsilon) for |t| <= upsilon, |t| - upsilon / 2 beyond.
double huber_norm(double t, double upsilon);

/// Pinball loss with |t| replaced by the Huber norm:
/// (1 - tau) * huber(t) for t < 0 and tau * huber(t) for t >= 0.
double quantile_huber_loss(double t, const QuantileHuberParams& params);

/// Derivatives of quantile_huber_loss(y - yhat) with respect to yhat.
GradHess quantile_huber_grad_hess(double y, double yhat,
                                  const QuantileHuberParams& params);

/// Loss 0.5 * (yhat - y)^2.
double squared_error_loss(double y, double yhat);

GradHess squared_error_grad_hess(double y, double yhat);

/// Sorted-sample quantile with linear interpolation between order
/// statistics (position q * (n - 1)). Throws DataError on empty input.
double empirical_quantile(std::span<const double> values, double q);

enum class ObjectiveKind { kSquaredError, kQuantileHuber };

/// Serializable description of an objective: its kind plus parameters.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kSquaredError;
  QuantileHuberParams quantile{};  // meaningful for kQuantileHuber only

  static ObjectiveSpec squared_error() { return {}; }
  static ObjectiveSpec quantile_huber(double tau, double upsilon) {
    return {ObjectiveKind::kQuantileHuber, {tau, upsilon}};
  }

  std::string name() const;
  void validate() const;

  friend bool operator==(const ObjectiveSpec& a, const ObjectiveSpec& b) {
    if (a.kind != b.kind) return false;
    return a.kind == ObjectiveKind::kSquaredError ||
           (a.quantile.tau == b.quantile.tau &&
            a.quantile.upsilon == b.quantile.upsilon);
  }
};

/// Pluggable objective used by the booster. Implementations supply per-sample
/// loss and derivatives plus the constant starting prediction.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual double loss(double y, double yhat) const = 0;
  virtual GradHess grad_hess(double y, double yhat) const = 0;
  virtual double initial_prediction(std::span<const double> targets) const = 0;

  /// Whether the hessian can vanish on whole regions, which makes
  /// lambda = 0 leaves ill-defined.
  virtual bool hessian_may_vanish() const { return false; }

  virtual ObjectiveSpec spec() const = 0;
};

/// Squared error; starts from the target mean.
class SquaredErrorObjective final : public Objective {
 public:
  double loss(double y, double yhat) const override;
  GradHess grad_hess(double y, double yhat) const override;
  double initial_prediction(std::span<const double> targets) const override;
  ObjectiveSpec spec() const override { return ObjectiveSpec::squared_error(); }
};

/// Huber-smoothed quantile loss; starts from the empirical tau-quantile.
class QuantileHuberObjective final : public Objective {
 public:
  explicit QuantileHuberObjective(QuantileHuberParams params);

  double loss(double y, double yhat) const override;
  GradHess grad_hess(double y, double yhat) const override;
  double initial_prediction(std::span<const double> targets) const override;
  bool hessian_may_vanish() const override { return true; }
  ObjectiveSpec spec() const override;

  const QuantileHuberParams& params() const { return params_; }

 private:
  QuantileHuberParams params_;
};

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec);

}  // namespace quantboost
