#pragma once

#include <optional>
#include <span>
#include <vector>

namespace quantboost {

inline constexpr double kDefaultCwcEta = 50.0;

/// Fraction of targets inside their closed interval [lower_i, upper_i].
double picp(std::span<const double> targets, std::span<const double> lower,
            std::span<const double> upper);

/// Mean interval width divided by `range`.
double pinaw(std::span<const double> lower, std::span<const double> upper,
             double range);

/// max - min of `values`.
double value_range(std::span<const double> values);

/// Coverage-width criterion. Below nominal coverage `mu` the width is
/// inflated by 1 + exp(eta * (mu - picp)); at or above it, CWC = PINAW.
double cwc(double picp, double pinaw, double mu, double eta = kDefaultCwcEta);

struct IntervalReport {
  double picp = 0.0;
  double pinaw = 0.0;
  double cwc = 0.0;
  double nominal_coverage = 0.0;
  double eta = kDefaultCwcEta;
};

/// PICP, PINAW (normalized by the target range of this sample) and CWC.
IntervalReport evaluate_intervals(std::span<const double> targets,
                                  std::span<const double> lower,
                                  std::span<const double> upper, double mu,
                                  double eta = kDefaultCwcEta);

struct Intervals {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Widens every interval symmetrically by `pad` times its own width.
Intervals pad_intervals(std::span<const double> lower,
                        std::span<const double> upper, double pad);

/// Swaps bounds wherever lower > upper. Returns the number of swapped rows.
std::size_t repair_crossings(std::vector<double>& lower,
                             std::vector<double>& upper);

struct PointMetrics {
  double rmse = 0.0;
  /// Empty when the targets have zero variance.
  std::optional<double> r_squared;
};

PointMetrics point_metrics(std::span<const double> targets,
                           std::span<const double> predictions);

}  // namespace quantboost
