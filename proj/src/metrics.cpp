#include "quantboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quantboost/error.hpp"

namespace quantboost {

namespace {

void check_bounds(std::span<const double> lower, std::span<const double> upper) {
  if (lower.size() != upper.size()) {
    throw DataError("lower and upper bounds differ in length");
  }
  if (lower.empty()) throw DataError("no intervals given");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) {
      throw DataError("interval " + std::to_string(i) +
                      " has lower bound above upper bound");
    }
  }
}

}  // namespace

double picp(std::span<const double> targets, std::span<const double> lower,
            std::span<const double> upper) {
  check_bounds(lower, upper);
  if (targets.size() != lower.size()) {
    throw DataError("targets and bounds differ in length");
  }
  std::size_t covered = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (lower[i] <= targets[i] && targets[i] <= upper[i]) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(targets.size());
}

double pinaw(std::span<const double> lower, std::span<const double> upper,
             double range) {
  if (!(range > 0.0)) throw ParameterError("PINAW range must be positive");
  check_bounds(lower, upper);
  double width = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) width += upper[i] - lower[i];
  return width / (range * static_cast<double>(lower.size()));
}

double value_range(std::span<const double> values) {
  if (values.empty()) throw DataError("range of an empty sample");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double cwc(double picp, double pinaw, double mu, double eta) {
  if (picp < mu) return pinaw * (1.0 + std::exp(eta * (mu - picp)));
  return pinaw;
}

IntervalReport evaluate_intervals(std::span<const double> targets,
                                  std::span<const double> lower,
                                  std::span<const double> upper, double mu,
                                  double eta) {
  IntervalReport r;
  r.picp = picp(targets, lower, upper);
  r.pinaw = pinaw(lower, upper, value_range(targets));
  r.cwc = cwc(r.picp, r.pinaw, mu, eta);
  r.nominal_coverage = mu;
  r.eta = eta;
  return r;
}

Intervals pad_intervals(std::span<const double> lower,
                        std::span<const double> upper, double pad) {
  if (!(pad >= 0.0)) throw ParameterError("pad fraction must be >= 0");
  check_bounds(lower, upper);
  Intervals out{{lower.begin(), lower.end()}, {upper.begin(), upper.end()}};
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const double half = 0.5 * pad * (upper[i] - lower[i]);
    out.lower[i] -= half;
    out.upper[i] += half;
  }
  return out;
}

std::size_t repair_crossings(std::vector<double>& lower,
                             std::vector<double>& upper) {
  if (lower.size() != upper.size()) {
    throw DataError("lower and upper bounds differ in length");
  }
  std::size_t swapped = 0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) {
      std::swap(lower[i], upper[i]);
      ++swapped;
    }
  }
  return swapped;
}

PointMetrics point_metrics(std::span<const double> targets,
                           std::span<const double> predictions) {
  if (targets.size() != predictions.size()) {
    throw DataError("targets and predictions differ in length");
  }
  if (targets.empty()) throw DataError("no predictions given");
  const auto n = static_cast<double>(targets.size());
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = targets[i] - predictions[i];
    const double d = targets[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  PointMetrics m;
  m.rmse = std::sqrt(ss_res / n);
  if (ss_tot > 0.0) m.r_squared = 1.0 - ss_res / ss_tot;
  return m;
}

}  // namespace quantboost
