#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "quantboost/booster.hpp"
#include "quantboost/data.hpp"
#include "quantboost/metrics.hpp"

namespace quantboost {

/// Bounds predicted by a lower and an upper quantile model, with crossed rows
/// already swapped.
struct BoundPredictions {
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t crossings = 0;
};

BoundPredictions predict_bounds(const Ensemble& lower_model,
                                const Ensemble& upper_model,
                                const Dataset& data);

/// Interval quality on one data split, before and after padding.
struct SplitIntervalReport {
  std::size_t n_rows = 0;
  std::size_t crossings = 0;
  IntervalReport raw;
  IntervalReport padded;
};

struct PiEvaluation {
  double pad = 0.0;
  double nominal_coverage = 0.9;
  double eta = kDefaultCwcEta;
  std::optional<SplitIntervalReport> train;
  SplitIntervalReport test;
  std::optional<PointMetrics> test_point;
};

/// Scores bounds already computed for `data` (which must carry targets).
SplitIntervalReport evaluate_bounds(const Dataset& data,
                                    const BoundPredictions& bounds,
                                    double nominal_coverage, double eta,
                                    double pad);

/// Fixed-layout plain-text report: one row per pad setting (0 and `pad`),
/// plus point-model metrics when present. Values carry six decimals.
std::string format_pi_table(const PiEvaluation& eval);

/// Plot data for intervals over the test rows: first feature (or row index
/// when there are several features), target, lower, upper and optionally the
/// point prediction. Sorted by the first column.
CsvTable interval_plot_table(const Dataset& data, const Intervals& bounds,
                             const std::vector<double>* point_predictions);

/// Intervals sorted by width with everything re-expressed relative to each
/// interval's midpoint: rank, width, lower, upper, target, covered.
CsvTable ordered_interval_table(std::span<const double> targets,
                                const Intervals& bounds);

/// Everything needed to reproduce one paired-quantile experiment.
struct ExperimentSpec {
  enum class Source { kSimulate, kCsv };

  Source source = Source::kSimulate;
  SimulationParams simulation{};  // seed is derived, the field is ignored
  std::filesystem::path csv_path;
  std::string target = "y";

  double train_fraction = 0.75;
  std::uint64_t seed = 42;
  double lower_tau = 0.05;
  double upper_tau = 0.95;
  double upsilon = 2.0;
  double nominal_coverage = 0.9;
  double eta = kDefaultCwcEta;
  double pad = 0.03;

  TrainConfig lower_model{};
  TrainConfig upper_model{};
  TrainConfig point_model{};
  bool with_point_model = true;
  /// Train the models on separate threads. Output does not depend on it.
  bool parallel = true;

  std::filesystem::path output_dir = "experiment_out";

  void validate() const;
};

/// Parses a JSON key-value document; absent keys keep their defaults and
/// unknown keys are rejected.
ExperimentSpec parse_experiment_spec(std::string_view text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
/// Fully resolved spec, including the derived per-stage seeds.
std::string experiment_spec_to_json(const ExperimentSpec& spec);

/// Per-stage seeds, all derived from ExperimentSpec::seed.
struct ExperimentSeeds {
  std::uint64_t simulation;
  std::uint64_t split;
  std::uint64_t lower_model;
  std::uint64_t upper_model;
  std::uint64_t point_model;
};
ExperimentSeeds experiment_seeds(std::uint64_t seed);

struct ExperimentResult {
  ExperimentSpec spec;
  Dataset train;
  Dataset test;
  Ensemble lower_model;
  Ensemble upper_model;
  std::optional<Ensemble> point_model;
  BoundPredictions test_bounds;
  std::optional<std::vector<double>> test_point_predictions;
  PiEvaluation evaluation;
};

/// Loads or simulates data, splits, trains the lower/upper (and point)
/// models and evaluates them. Errors are rethrown as Error prefixed with the
/// failing stage.
ExperimentResult run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kMetricsFile = "metrics.txt";
inline constexpr const char* kIntervalsFile = "intervals.csv";
inline constexpr const char* kOrderedIntervalsFile = "ordered_intervals.csv";
inline constexpr const char* kResolvedConfigFile = "config.json";

/// Writes the four report artifacts into `dir` (created if needed).
void write_experiment_artifacts(const ExperimentResult& result,
                                const std::filesystem::path& dir);

}  // namespace quantboost
