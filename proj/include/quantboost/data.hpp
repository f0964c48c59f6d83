#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace quantboost {

/// Column-major numeric feature matrix plus a target vector.
///
/// All columns share one length. Targets are either absent (a pure feature
/// matrix, as used for prediction) or have exactly one entry per row. Every
/// stored value is finite.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> feature_names,
          std::vector<std::vector<double>> columns, std::vector<double> targets,
          std::string target_name = "y");

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return columns_.size(); }
  bool has_targets() const { return !targets_.empty() || n_rows_ == 0; }

  const std::vector<std::string>& feature_names() const { return names_; }
  const std::string& target_name() const { return target_name_; }

  std::span<const double> column(std::size_t feature) const {
    return columns_.at(feature);
  }
  std::span<const double> targets() const { return targets_; }
  double value(std::size_t row, std::size_t feature) const {
    return columns_[feature][row];
  }
  std::vector<double> row(std::size_t row) const;

  /// Rows `rows` in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> targets_;
  std::string target_name_;
  std::size_t n_rows_ = 0;
};

/// Portable pseudo-random source.
///
/// Engine: std::mt19937_64 (its output sequence is fixed by the C++
/// standard). Uniform doubles take the top 53 bits of one draw. Normal
/// deviates use the Box-Muller cosine branch on two uniforms. Bounded
/// integers use rejection sampling. None of the std distributions are used,
/// so a seed yields the same stream on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean, double stddev);
  /// Uniform integer on [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream index into an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct SimulationParams {
  std::size_t n = 1000;
  double x_min = 0.0;
  double x_max = 10.0;
  double sigma_min = 1.5;
  double sigma_max = 2.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noise-free part of the toy response: 1.5 x sin(x).
double simulated_mean(double x);

/// Toy heteroscedastic data: x ~ U(x_min, x_max), sigma_i ~ U(sigma_min,
/// sigma_max) per row, y = 1.5 x sin(x) + N(0, sigma_i). One feature "x",
/// target "y".
Dataset simulate(const SimulationParams& params);

/// Raw numeric table as read from a delimited file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t n_rows() const { return columns.empty() ? 0 : columns[0].size(); }
  /// Index of `name` in the header; throws DataError listing the header.
  std::size_t index_of(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::string& source = "<text>");
void write_csv(const CsvTable& table, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Loads `path`, using column `target` as targets and all others as features
/// in header order.
Dataset load_csv(const std::filesystem::path& path, const std::string& target);
Dataset dataset_from_table(const CsvTable& table, const std::string& target);

/// Feature matrix holding the named columns of `table`, in the given order.
/// Throws SchemaError naming every missing column.
Dataset features_from_table(const CsvTable& table,
                            const std::vector<std::string>& feature_names);

/// Features followed by the target column.
CsvTable to_table(const Dataset& data);
void save_csv(const Dataset& data, const std::filesystem::path& path);

/// Random partition: train gets round(fraction * n) rows of a seeded
/// Fisher-Yates permutation, test gets the rest.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double train_fraction,
                                             std::uint64_t seed);

/// The permutation underlying train_test_split, exposed for bookkeeping.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n_rows, double train_fraction, std::uint64_t seed);

}  // namespace quantboost
