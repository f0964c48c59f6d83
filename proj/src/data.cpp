#include "quantboost/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "quantboost/error.hpp"

namespace quantboost {

Dataset::Dataset(std::vector<std::string> feature_names,
                 std::vector<std::vector<double>> columns,
                 std::vector<double> targets, std::string target_name)
    : names_(std::move(feature_names)),
      columns_(std::move(columns)),
      targets_(std::move(targets)),
      target_name_(std::move(target_name)) {
  if (names_.size() != columns_.size()) {
    throw DataError("feature name count does not match column count");
  }
  n_rows_ = columns_.empty() ? targets_.size() : columns_.front().size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].size() != n_rows_) {
      throw DataError("column '" + names_[j] + "' has " +
                      std::to_string(columns_[j].size()) + " rows, expected " +
                      std::to_string(n_rows_));
    }
    for (std::size_t i = 0; i < n_rows_; ++i) {
      if (!std::isfinite(columns_[j][i])) {
        throw DataError("non-finite value in column '" + names_[j] +
                        "' at row " + std::to_string(i));
      }
    }
  }
  if (!targets_.empty() && targets_.size() != n_rows_) {
    throw DataError("target length " + std::to_string(targets_.size()) +
                    " does not match row count " + std::to_string(n_rows_));
  }
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (!std::isfinite(targets_[i])) {
      throw DataError("non-finite target at row " + std::to_string(i));
    }
  }
}

std::vector<double> Dataset::row(std::size_t row) const {
  std::vector<double> out(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = columns_[j].at(row);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t r : rows) cols[j].push_back(columns_[j].at(r));
  }
  std::vector<double> y;
  if (!targets_.empty()) {
    y.reserve(rows.size());
    for (std::size_t r : rows) y.push_back(targets_.at(r));
  }
  return Dataset(names_, std::move(cols), std::move(y), target_name_);
}

// ---------------------------------------------------------------------------
// Random numbers

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Largest multiple of bound that fits, to avoid modulo bias.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Simulation

void SimulationParams::validate() const {
  if (n < 1) throw ParameterError("simulation needs n >= 1");
  if (!(x_min < x_max)) throw ParameterError("simulation needs x_min < x_max");
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) {
    throw ParameterError("simulation needs 0 < sigma_min <= sigma_max");
  }
}

double simulated_mean(double x) { return 1.5 * x * std::sin(x); }

Dataset simulate(const SimulationParams& params) {
  params.validate();
  Rng rng(params.seed);
  std::vector<double> x(params.n);
  std::vector<double> y(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    x[i] = rng.uniform(params.x_min, params.x_max);
    const double sigma = rng.uniform(params.sigma_min, params.sigma_max);
    y[i] = simulated_mean(x[i]) + rng.normal(0.0, sigma);
  }
  return Dataset({"x"}, {std::move(x)}, std::move(y), "y");
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::size_t CsvTable::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  std::string available;
  for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
  throw DataError("column '" + name + "' not found; available columns: " +
                  available);
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  CsvTable table;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (trim(line).empty()) continue;

    const auto fields = split_fields(line);
    if (!have_header) {
      for (auto f : fields) table.header.emplace_back(trim(f));
      table.columns.resize(table.header.size());
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string_view cell = trim(fields[j]);
      double v = 0.0;
      const auto [end, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size() || cell.empty() ||
          !std::isfinite(v)) {
        throw DataError(source + ":" + std::to_string(line_no) + ": column '" +
                        table.header[j] + "': cannot parse '" +
                        std::string(cell) + "' as a finite number");
      }
      table.columns[j].push_back(v);
    }
  }
  if (!have_header) throw DataError(source + ": missing header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    out << (j ? "," : "") << table.header[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      out << (j ? "," : "") << format_double(table.columns[j][i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Dataset dataset_from_table(const CsvTable& table, const std::string& target) {
  const std::size_t t = table.index_of(target);
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j == t) continue;
    names.push_back(table.header[j]);
    cols.push_back(table.columns[j]);
  }
  return Dataset(std::move(names), std::move(cols), table.columns[t], target);
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target) {
  return dataset_from_table(read_csv(path), target);
}

Dataset features_from_table(const CsvTable& table,
                            const std::vector<std::string>& feature_names) {
  std::vector<std::vector<double>> cols;
  std::string missing;
  for (const auto& name : feature_names) {
    bool found = false;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (table.header[j] == name) {
        cols.push_back(table.columns[j]);
        found = true;
        break;
      }
    }
    if (!found) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) {
    throw SchemaError("model features missing from data: " + missing);
  }
  return Dataset(feature_names, std::move(cols), {});
}

CsvTable to_table(const Dataset& data) {
  CsvTable table;
  table.header = data.feature_names();
  for (std::size_t j = 0; j < data.n_features(); ++j) {
    const auto col = data.column(j);
    table.columns.emplace_back(col.begin(), col.end());
  }
  if (!data.targets().empty()) {
    table.header.push_back(data.target_name());
    table.columns.emplace_back(data.targets().begin(), data.targets().end());
  }
  return table;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  write_csv(to_table(data), path);
}

// ---------------------------------------------------------------------------
// Splitting

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n_rows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie in (0, 1)");
  }
  if (n_rows < 2) throw DataError("cannot split fewer than 2 rows");
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n_rows)));
  if (n_train == 0 || n_train == n_rows) {
    throw DataError("split of " + std::to_string(n_rows) +
                    " rows at fraction " + std::to_string(train_fraction) +
                    " leaves one side empty");
  }
  std::vector<std::size_t> perm(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n_rows - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                                perm.end());
  perm.resize(n_train);
  return {std::move(perm), std::move(test)};
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double train_fraction,
                                             std::uint64_t seed) {
  const auto [train, test] = split_indices(data.n_rows(), train_fraction, seed);
  return {data.subset(train), data.subset(test)};
}

}  // namespace quantboost
