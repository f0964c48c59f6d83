// quantboost command-line tool: simulate, split, train, predict, eval-pi,
// experiment.
//
// Exit codes: 0 success, 2 usage or parameter error, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "quantboost/booster.hpp"
#include "quantboost/data.hpp"
#include "quantboost/error.hpp"
#include "quantboost/experiment.hpp"
#include "quantboost/metrics.hpp"
#include "quantboost/model_io.hpp"

namespace qb = quantboost;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct SimulateArgs {
  qb::SimulationParams params;
  std::string out;
};

struct SplitArgs {
  std::string data;
  double fraction = 0.75;
  std::uint64_t seed = 0;
  std::string train_out;
  std::string test_out;
};

struct TrainArgs {
  std::string data;
  std::string target = "y";
  std::string objective = "quantile";
  double tau = 0.5;
  double upsilon = 2.0;
  qb::TrainConfig config;
  std::optional<double> base_score;
  int log_every = 50;
  std::string out;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string lower;
  std::string upper;
  std::string point;
  std::string data;
  std::string train_data;
  std::string target = "y";
  double mu = 0.9;
  double eta = qb::kDefaultCwcEta;
  double pad = 0.0;
  std::string out;
  std::uint64_t seed = 0;
};

struct ExperimentArgs {
  std::string spec;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

std::string fmt_loss(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int run_simulate(const SimulateArgs& a) {
  const qb::Dataset data = qb::simulate(a.params);
  qb::save_csv(data, a.out);
  std::cout << "wrote " << data.n_rows() << " rows to " << a.out << "\n";
  return 0;
}

int run_split(const SplitArgs& a) {
  const qb::CsvTable table = qb::read_csv(a.data);
  const auto [train_rows, test_rows] =
      qb::split_indices(table.n_rows(), a.fraction, a.seed);
  const auto take = [&](const std::vector<std::size_t>& rows) {
    qb::CsvTable t;
    t.header = table.header;
    t.columns.resize(table.columns.size());
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      for (std::size_t r : rows) t.columns[j].push_back(table.columns[j][r]);
    }
    return t;
  };
  qb::write_csv(take(train_rows), a.train_out);
  qb::write_csv(take(test_rows), a.test_out);
  std::cout << "train " << train_rows.size() << " rows -> " << a.train_out
            << "\ntest " << test_rows.size() << " rows -> " << a.test_out << "\n";
  return 0;
}

int run_train(TrainArgs a) {
  qb::ObjectiveSpec spec;
  if (a.objective == "squared") {
    spec = qb::ObjectiveSpec::squared_error();
  } else {
    spec = qb::ObjectiveSpec::quantile_huber(a.tau, a.upsilon);
  }
  spec.validate();
  a.config.base_score = a.base_score;
  a.config.validate();

  const qb::Dataset data = qb::load_csv(a.data, a.target);
  const auto objective = qb::make_objective(spec);
  const qb::Ensemble model = qb::train(data, *objective, a.config);

  const auto& history = model.loss_history();
  for (std::size_t r = 0; r < history.size(); ++r) {
    const bool last = r + 1 == history.size();
    if (a.log_every > 0 && (r % static_cast<std::size_t>(a.log_every) == 0 || last)) {
      std::cout << "round " << r << " loss " << fmt_loss(history[r]) << "\n";
    }
  }
  qb::save_model(model, a.out);
  std::cout << "final training loss " << fmt_loss(history.back()) << "\n"
            << "wrote model (" << model.trees().size() << " trees) to " << a.out
            << "\n";
  return 0;
}

int run_predict(const PredictArgs& a) {
  const qb::Ensemble model = qb::load_model(a.model);
  qb::CsvTable table = qb::read_csv(a.data);
  const qb::Dataset features = qb::features_from_table(table, model.feature_names());
  std::vector<double> pred = model.predict(features);
  table.header.emplace_back("prediction");
  table.columns.push_back(std::move(pred));
  qb::write_csv(table, a.out);
  std::cout << "wrote " << table.n_rows() << " predictions to " << a.out << "\n";
  return 0;
}

qb::Dataset load_for_model(const std::string& path, const std::string& target,
                           const qb::Ensemble& model) {
  const qb::CsvTable table = qb::read_csv(path);
  const qb::Dataset features = qb::features_from_table(table, model.feature_names());
  const auto y = table.columns[table.index_of(target)];
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < features.n_features(); ++j) {
    cols.emplace_back(features.column(j).begin(), features.column(j).end());
  }
  return qb::Dataset(features.feature_names(), std::move(cols), y, target);
}

int run_eval(const EvalArgs& a) {
  if (!(a.pad >= 0.0)) throw qb::ParameterError("--pad must be >= 0");
  const qb::Ensemble lower = qb::load_model(a.lower);
  const qb::Ensemble upper = qb::load_model(a.upper);
  if (lower.feature_names() != upper.feature_names()) {
    throw qb::SchemaError("lower and upper models use different features");
  }

  qb::PiEvaluation ev;
  ev.pad = a.pad;
  ev.nominal_coverage = a.mu;
  ev.eta = a.eta;

  if (!a.train_data.empty()) {
    const qb::Dataset train = load_for_model(a.train_data, a.target, lower);
    const auto bounds = qb::predict_bounds(lower, upper, train);
    ev.train = qb::evaluate_bounds(train, bounds, a.mu, a.eta, a.pad);
  }
  const qb::Dataset test = load_for_model(a.data, a.target, lower);
  const auto bounds = qb::predict_bounds(lower, upper, test);
  ev.test = qb::evaluate_bounds(test, bounds, a.mu, a.eta, a.pad);
  if (bounds.crossings > 0) {
    std::cout << "repaired " << bounds.crossings
              << " crossed intervals (lower > upper) by swapping\n";
  }

  std::optional<std::vector<double>> point_pred;
  if (!a.point.empty()) {
    const qb::Ensemble point = qb::load_model(a.point);
    point_pred = point.predict(qb::features_from_table(qb::read_csv(a.data),
                                                       point.feature_names()));
    ev.test_point = qb::point_metrics(test.targets(), *point_pred);
  }

  std::cout << qb::format_pi_table(ev);
  if (!a.out.empty()) {
    const qb::Intervals padded = qb::pad_intervals(bounds.lower, bounds.upper, a.pad);
    qb::write_csv(qb::interval_plot_table(test, padded,
                                          point_pred ? &*point_pred : nullptr),
                  a.out);
    std::cout << "wrote interval plot data to " << a.out << "\n";
  }
  return 0;
}

int run_experiment(const ExperimentArgs& a) {
  qb::ExperimentSpec spec =
      a.spec.empty() ? qb::ExperimentSpec{} : qb::load_experiment_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  if (!a.out_dir.empty()) spec.output_dir = a.out_dir;
  spec.validate();

  const qb::ExperimentResult result = qb::run_experiment(spec);
  qb::write_experiment_artifacts(result, spec.output_dir);
  std::cout << qb::format_pi_table(result.evaluation)
            << "wrote report to " << spec.output_dir.string() << "\n";
  return 0;
}

void add_train_config_flags(CLI::App* cmd, qb::TrainConfig& cfg) {
  cmd->add_option("--rounds", cfg.n_estimators, "Number of trees")
      ->capture_default_str();
  cmd->add_option("--depth", cfg.max_depth,
                  "Maximum tree depth in node levels (1 = single leaf)")
      ->capture_default_str();
  cmd->add_option("--lr", cfg.learning_rate, "Learning rate (shrinkage)")
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.lambda, "L2 penalty on leaf weights")
      ->capture_default_str();
  cmd->add_option("--gamma", cfg.gamma, "Per-leaf penalty / minimum split gain")
      ->capture_default_str();
  cmd->add_option("--min-child-weight", cfg.min_child_weight,
                  "Minimum hessian sum per child")
      ->capture_default_str();
  cmd->add_option("--threads", cfg.n_threads, "Split-search threads")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-boosted trees with a smoothed quantile objective"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write the toy heteroscedastic dataset");
  simulate->add_option("--n", sim.params.n, "Rows")->capture_default_str();
  simulate->add_option("--seed", sim.params.seed, "Random seed")->capture_default_str();
  simulate->add_option("--x-min", sim.params.x_min)->capture_default_str();
  simulate->add_option("--x-max", sim.params.x_max)->capture_default_str();
  simulate->add_option("--sigma-min", sim.params.sigma_min)->capture_default_str();
  simulate->add_option("--sigma-max", sim.params.sigma_max)->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV")->required();

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Random train/test split of a CSV file");
  split_cmd->add_option("--data", split.data)->required();
  split_cmd->add_option("--fraction", split.fraction, "Train fraction")
      ->capture_default_str();
  split_cmd->add_option("--seed", split.seed)->capture_default_str();
  split_cmd->add_option("--train-out", split.train_out)->required();
  split_cmd->add_option("--test-out", split.test_out)->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a boosted model");
  train->add_option("--data", tr.data, "Training CSV")->required();
  train->add_option("--target", tr.target)->capture_default_str();
  train->add_option("--objective", tr.objective)
      ->check(CLI::IsMember({"squared", "quantile"}))
      ->capture_default_str();
  train->add_option("--tau", tr.tau, "Quantile level")->capture_default_str();
  train->add_option("--upsilon", tr.upsilon, "Huber threshold")->capture_default_str();
  add_train_config_flags(train, tr.config);
  train->add_option("--base-score", tr.base_score,
                    "Starting prediction (default: mean or tau-quantile)");
  train->add_option("--seed", tr.config.seed)->capture_default_str();
  train->add_option("--log-every", tr.log_every, "Print loss every N rounds (0: final only)")
      ->capture_default_str();
  train->add_option("--out", tr.out, "Output model file")->required();

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Append model predictions to a CSV file");
  predict->add_option("--model", pr.model)->required();
  predict->add_option("--data", pr.data)->required();
  predict->add_option("--out", pr.out)->required();
  predict->add_option("--seed", pr.seed, "Unused; accepted for uniformity");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval-pi", "Evaluate paired-quantile prediction intervals");
  eval->add_option("--lower", ev.lower, "Lower-quantile model")->required();
  eval->add_option("--upper", ev.upper, "Upper-quantile model")->required();
  eval->add_option("--point", ev.point, "Optional point-prediction model");
  eval->add_option("--data", ev.data, "Test CSV")->required();
  eval->add_option("--train-data", ev.train_data, "Optional training CSV");
  eval->add_option("--target", ev.target)->capture_default_str();
  eval->add_option("--mu", ev.mu, "Nominal coverage")->capture_default_str();
  eval->add_option("--eta", ev.eta, "CWC steepness")->capture_default_str();
  eval->add_option("--pad", ev.pad, "Relative interval padding")->capture_default_str();
  eval->add_option("--out", ev.out, "Plot-data CSV");
  eval->add_option("--seed", ev.seed, "Unused; accepted for uniformity");

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run a full interval experiment");
  experiment->add_option("spec", ex.spec, "JSON experiment spec (defaults when omitted)");
  experiment->add_option("--out-dir", ex.out_dir, "Override the output directory");
  experiment->add_option("--seed", ex.seed, "Override the spec seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*split_cmd) return run_split(split);
    if (*train) return run_train(tr);
    if (*predict) return run_predict(pr);
    if (*eval) return run_eval(ev);
    if (*experiment) return run_experiment(ex);
  } catch (const qb::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
