#include "quantboost/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "quantboost/error.hpp"

namespace quantboost {

using nlohmann::json;
using nlohmann::ordered_json;

BoundPredictions predict_bounds(const Ensemble& lower_model,
                                const Ensemble& upper_model,
                                const Dataset& data) {
  BoundPredictions b;
  b.lower = lower_model.predict(data);
  b.upper = upper_model.predict(data);
  b.crossings = repair_crossings(b.lower, b.upper);
  return b;
}

SplitIntervalReport evaluate_bounds(const Dataset& data,
                                    const BoundPredictions& bounds,
                                    double nominal_coverage, double eta,
                                    double pad) {
  if (data.targets().size() != data.n_rows() || data.n_rows() == 0) {
    throw DataError("interval evaluation needs a dataset with targets");
  }
  SplitIntervalReport r;
  r.n_rows = data.n_rows();
  r.crossings = bounds.crossings;
  r.raw = evaluate_intervals(data.targets(), bounds.lower, bounds.upper,
                             nominal_coverage, eta);
  const Intervals padded = pad_intervals(bounds.lower, bounds.upper, pad);
  r.padded = evaluate_intervals(data.targets(), padded.lower, padded.upper,
                                nominal_coverage, eta);
  return r;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_pi_table(const PiEvaluation& eval) {
  std::ostringstream out;
  out << "# prediction intervals: nominal_coverage " << fixed6(eval.nominal_coverage)
      << ", eta " << fixed6(eval.eta) << ", test_rows " << eval.test.n_rows;
  if (eval.train) out << ", train_rows " << eval.train->n_rows;
  out << "\n";

  const std::size_t w = 12;
  out << pad_right("pad", w) << pad_right("train_picp", w)
      << pad_right("test_picp", w) << pad_right("test_pinaw", w)
      << pad_right("test_cwc", w) << "crossings\n";

  const auto row = [&](double pad, const IntervalReport* train,
                       const IntervalReport& test) {
    out << pad_right(fixed6(pad), w)
        << pad_right(train ? fixed6(train->picp) : "n/a", w)
        << pad_right(fixed6(test.picp), w) << pad_right(fixed6(test.pinaw), w)
        << pad_right(fixed6(test.cwc), w) << eval.test.crossings << "\n";
  };
  row(0.0, eval.train ? &eval.train->raw : nullptr, eval.test.raw);
  if (eval.pad > 0.0) {
    row(eval.pad, eval.train ? &eval.train->padded : nullptr, eval.test.padded);
  }
  if (eval.test_point) {
    out << "# point model: test_rmse " << fixed6(eval.test_point->rmse)
        << ", test_r2 "
        << (eval.test_point->r_squared ? fixed6(*eval.test_point->r_squared)
                                       : std::string("n/a"))
        << "\n";
  }
  return out.str();
}

CsvTable interval_plot_table(const Dataset& data, const Intervals& bounds,
                             const std::vector<double>* point_predictions) {
  const std::size_t n = data.n_rows();
  if (bounds.lower.size() != n || bounds.upper.size() != n ||
      (point_predictions && point_predictions->size() != n)) {
    throw DataError("plot columns differ in length");
  }
  std::vector<double> key(n);
  std::string key_name = "row";
  if (data.n_features() == 1) {
    key_name = data.feature_names().front();
    const auto col = data.column(0);
    std::copy(col.begin(), col.end(), key.begin());
  } else {
    std::iota(key.begin(), key.end(), 0.0);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  CsvTable t;
  t.header = {key_name, data.target_name(), "lower", "upper"};
  if (point_predictions) t.header.push_back("prediction");
  t.columns.resize(t.header.size());
  for (std::size_t i : order) {
    t.columns[0].push_back(key[i]);
    t.columns[1].push_back(data.targets()[i]);
    t.columns[2].push_back(bounds.lower[i]);
    t.columns[3].push_back(bounds.upper[i]);
    if (point_predictions) t.columns[4].push_back((*point_predictions)[i]);
  }
  return t;
}

CsvTable ordered_interval_table(std::span<const double> targets,
                                const Intervals& bounds) {
  const std::size_t n = targets.size();
  if (bounds.lower.size() != n || bounds.upper.size() != n) {
    throw DataError("interval columns differ in length");
  }
  std::vector<double> width(n);
  for (std::size_t i = 0; i < n; ++i) width[i] = bounds.upper[i] - bounds.lower[i];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return width[a] < width[b];
  });

  CsvTable t;
  t.header = {"rank", "width", "lower", "upper", "target", "covered"};
  t.columns.resize(t.header.size());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    const double mid = bounds.lower[i] + 0.5 * width[i];
    const bool covered =
        bounds.lower[i] <= targets[i] && targets[i] <= bounds.upper[i];
    t.columns[0].push_back(static_cast<double>(k));
    t.columns[1].push_back(width[i]);
    t.columns[2].push_back(bounds.lower[i] - mid);
    t.columns[3].push_back(bounds.upper[i] - mid);
    t.columns[4].push_back(targets[i] - mid);
    t.columns[5].push_back(covered ? 1.0 : 0.0);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Experiment spec

void ExperimentSpec::validate() const {
  if (source == Source::kSimulate) {
    SimulationParams p = simulation;
    p.validate();
  } else if (csv_path.empty()) {
    throw ParameterError("csv data source needs a path");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train_fraction must lie in (0, 1)");
  }
  QuantileHuberParams{lower_tau, upsilon}.validate();
  QuantileHuberParams{upper_tau, upsilon}.validate();
  if (!(lower_tau < upper_tau)) {
    throw ParameterError("lower_tau must be below upper_tau");
  }
  if (!(nominal_coverage > 0.0 && nominal_coverage < 1.0)) {
    throw ParameterError("nominal_coverage must lie in (0, 1)");
  }
  if (!(pad >= 0.0)) throw ParameterError("pad must be >= 0");
  lower_model.validate();
  upper_model.validate();
  if (with_point_model) point_model.validate();
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return key == k; });
    if (!ok) throw ParameterError("unknown key '" + key + "' in " + where);
  }
}

TrainConfig train_config_from_json(const json& j, TrainConfig cfg,
                                   const std::string& where) {
  reject_unknown(j,
                 {"n_estimators", "max_depth", "learning_rate", "lambda",
                  "gamma", "min_child_weight", "base_score", "n_threads"},
                 where);
  read_key(j, "n_estimators", cfg.n_estimators);
  read_key(j, "max_depth", cfg.max_depth);
  read_key(j, "learning_rate", cfg.learning_rate);
  read_key(j, "lambda", cfg.lambda);
  read_key(j, "gamma", cfg.gamma);
  read_key(j, "min_child_weight", cfg.min_child_weight);
  read_key(j, "n_threads", cfg.n_threads);
  if (j.contains("base_score") && !j.at("base_score").is_null()) {
    cfg.base_score = j.at("base_score").get<double>();
  }
  return cfg;
}

ordered_json train_config_to_json(const TrainConfig& cfg) {
  ordered_json j;
  j["n_estimators"] = cfg.n_estimators;
  j["max_depth"] = cfg.max_depth;
  j["learning_rate"] = cfg.learning_rate;
  j["lambda"] = cfg.lambda;
  j["gamma"] = cfg.gamma;
  j["min_child_weight"] = cfg.min_child_weight;
  j["base_score"] = cfg.base_score ? json(*cfg.base_score) : json(nullptr);
  j["n_threads"] = cfg.n_threads;
  return j;
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::string_view text) {
  ExperimentSpec spec;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw ParameterError("experiment spec must be an object");
    reject_unknown(doc,
                   {"data", "train_fraction", "seed", "lower_tau", "upper_tau",
                    "upsilon", "nominal_coverage", "eta", "pad", "lower_model",
                    "upper_model", "point_model", "with_point_model",
                    "parallel", "output_dir", "derived_seeds"},
                   "experiment spec");
    if (doc.contains("data")) {
      const json& d = doc.at("data");
      const auto source = d.value("source", std::string("simulate"));
      if (source == "simulate") {
        reject_unknown(d, {"source", "n", "x_min", "x_max", "sigma_min", "sigma_max"},
                       "data");
        spec.source = ExperimentSpec::Source::kSimulate;
        read_key(d, "n", spec.simulation.n);
        read_key(d, "x_min", spec.simulation.x_min);
        read_key(d, "x_max", spec.simulation.x_max);
        read_key(d, "sigma_min", spec.simulation.sigma_min);
        read_key(d, "sigma_max", spec.simulation.sigma_max);
      } else if (source == "csv") {
        reject_unknown(d, {"source", "path", "target"}, "data");
        spec.source = ExperimentSpec::Source::kCsv;
        spec.csv_path = d.at("path").get<std::string>();
        read_key(d, "target", spec.target);
      } else {
        throw ParameterError("data.source must be 'simulate' or 'csv'");
      }
    }
    read_key(doc, "train_fraction", spec.train_fraction);
    read_key(doc, "seed", spec.seed);
    read_key(doc, "lower_tau", spec.lower_tau);
    read_key(doc, "upper_tau", spec.upper_tau);
    read_key(doc, "upsilon", spec.upsilon);
    read_key(doc, "nominal_coverage", spec.nominal_coverage);
    read_key(doc, "eta", spec.eta);
    read_key(doc, "pad", spec.pad);
    read_key(doc, "with_point_model", spec.with_point_model);
    read_key(doc, "parallel", spec.parallel);
    if (doc.contains("output_dir")) {
      spec.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("lower_model")) {
      spec.lower_model =
          train_config_from_json(doc.at("lower_model"), spec.lower_model, "lower_model");
    }
    if (doc.contains("upper_model")) {
      spec.upper_model =
          train_config_from_json(doc.at("upper_model"), spec.upper_model, "upper_model");
    }
    if (doc.contains("point_model")) {
      spec.point_model =
          train_config_from_json(doc.at("point_model"), spec.point_model, "point_model");
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("malformed experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str());
}

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
  ordered_json doc;
  ordered_json data;
  if (spec.source == ExperimentSpec::Source::kSimulate) {
    data["source"] = "simulate";
    data["n"] = spec.simulation.n;
    data["x_min"] = spec.simulation.x_min;
    data["x_max"] = spec.simulation.x_max;
    data["sigma_min"] = spec.simulation.sigma_min;
    data["sigma_max"] = spec.simulation.sigma_max;
  } else {
    data["source"] = "csv";
    data["path"] = spec.csv_path.string();
    data["target"] = spec.target;
  }
  doc["data"] = data;
  doc["train_fraction"] = spec.train_fraction;
  doc["seed"] = spec.seed;
  doc["lower_tau"] = spec.lower_tau;
  doc["upper_tau"] = spec.upper_tau;
  doc["upsilon"] = spec.upsilon;
  doc["nominal_coverage"] = spec.nominal_coverage;
  doc["eta"] = spec.eta;
  doc["pad"] = spec.pad;
  doc["lower_model"] = train_config_to_json(spec.lower_model);
  doc["upper_model"] = train_config_to_json(spec.upper_model);
  doc["point_model"] = train_config_to_json(spec.point_model);
  doc["with_point_model"] = spec.with_point_model;
  doc["parallel"] = spec.parallel;
  doc["output_dir"] = spec.output_dir.string();

  const ExperimentSeeds seeds = experiment_seeds(spec.seed);
  ordered_json derived;
  derived["simulation"] = seeds.simulation;
  derived["split"] = seeds.split;
  derived["lower_model"] = seeds.lower_model;
  derived["upper_model"] = seeds.upper_model;
  derived["point_model"] = seeds.point_model;
  doc["derived_seeds"] = derived;
  return doc.dump(2) + "\n";
}

ExperimentSeeds experiment_seeds(std::uint64_t seed) {
  return {derive_seed(seed, 0), derive_seed(seed, 1), derive_seed(seed, 2),
          derive_seed(seed, 3), derive_seed(seed, 4)};
}

// ---------------------------------------------------------------------------
// Running

namespace {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  in_stage("config", [&] { spec.validate(); });
  const ExperimentSeeds seeds = experiment_seeds(spec.seed);

  const Dataset data = in_stage("data", [&] {
    if (spec.source == ExperimentSpec::Source::kCsv) {
      return load_csv(spec.csv_path, spec.target);
    }
    SimulationParams p = spec.simulation;
    p.seed = seeds.simulation;
    return simulate(p);
  });
  auto [train_set, test_set] = in_stage("split", [&] {
    return train_test_split(data, spec.train_fraction, seeds.split);
  });

  TrainConfig lower_cfg = spec.lower_model;
  lower_cfg.seed = seeds.lower_model;
  TrainConfig upper_cfg = spec.upper_model;
  upper_cfg.seed = seeds.upper_model;
  TrainConfig point_cfg = spec.point_model;
  point_cfg.seed = seeds.point_model;

  const QuantileHuberObjective lower_obj({spec.lower_tau, spec.upsilon});
  const QuantileHuberObjective upper_obj({spec.upper_tau, spec.upsilon});
  const SquaredErrorObjective point_obj;

  const auto launch = spec.parallel ? std::launch::async : std::launch::deferred;
  auto lower_f = std::async(launch, [&] {
    return in_stage("train lower model",
                    [&] { return train(train_set, lower_obj, lower_cfg); });
  });
  auto upper_f = std::async(launch, [&] {
    return in_stage("train upper model",
                    [&] { return train(train_set, upper_obj, upper_cfg); });
  });
  std::optional<std::future<Ensemble>> point_f;
  if (spec.with_point_model) {
    point_f = std::async(launch, [&] {
      return in_stage("train point model",
                      [&] { return train(train_set, point_obj, point_cfg); });
    });
  }

  ExperimentResult result{spec, train_set, test_set, lower_f.get(), upper_f.get(),
                          std::nullopt, {}, std::nullopt, {}};
  if (point_f) result.point_model = point_f->get();

  in_stage("evaluate", [&] {
    PiEvaluation& ev = result.evaluation;
    ev.pad = spec.pad;
    ev.nominal_coverage = spec.nominal_coverage;
    ev.eta = spec.eta;
    const BoundPredictions train_bounds =
        predict_bounds(result.lower_model, result.upper_model, result.train);
    ev.train = evaluate_bounds(result.train, train_bounds, spec.nominal_coverage,
                               spec.eta, spec.pad);
    result.test_bounds =
        predict_bounds(result.lower_model, result.upper_model, result.test);
    ev.test = evaluate_bounds(result.test, result.test_bounds,
                              spec.nominal_coverage, spec.eta, spec.pad);
    if (result.point_model) {
      result.test_point_predictions = result.point_model->predict(result.test);
      ev.test_point =
          point_metrics(result.test.targets(), *result.test_point_predictions);
    }
  });
  return result;
}

void write_experiment_artifacts(const ExperimentResult& result,
                                const std::filesystem::path& dir) {
  in_stage("write report", [&] {
    std::filesystem::create_directories(dir);
    {
      std::ofstream out(dir / kMetricsFile, std::ios::binary);
      out << format_pi_table(result.evaluation);
      if (!out) throw DataError("cannot write metrics table");
    }
    const Intervals padded = pad_intervals(
        result.test_bounds.lower, result.test_bounds.upper, result.spec.pad);
    const std::vector<double>* point =
        result.test_point_predictions ? &*result.test_point_predictions : nullptr;
    write_csv(interval_plot_table(result.test, padded, point), dir / kIntervalsFile);
    write_csv(ordered_interval_table(result.test.targets(), padded),
              dir / kOrderedIntervalsFile);
    std::ofstream cfg(dir / kResolvedConfigFile, std::ios::binary);
    cfg << experiment_spec_to_json(result.spec);
    if (!cfg) throw DataError("cannot write resolved config");
  });
}

}  // namespace quantboost
