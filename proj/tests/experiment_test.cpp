#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "quantboost/error.hpp"
#include "quantboost/experiment.hpp"

namespace quantboost {
namespace {

namespace fs = std::filesystem;

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.simulation.n = 200;
  s.lower_model.n_estimators = 30;
  s.upper_model.n_estimators = 30;
  s.point_model.n_estimators = 30;
  s.seed = 3;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(ExperimentSpec, DefaultsMatchReferenceSettings) {
  const ExperimentSpec s;
  EXPECT_EQ(s.lower_tau, 0.05);
  EXPECT_EQ(s.upper_tau, 0.95);
  EXPECT_EQ(s.upsilon, 2.0);
  EXPECT_EQ(s.train_fraction, 0.75);
  EXPECT_EQ(s.upper_model.n_estimators, 300);
  EXPECT_EQ(s.upper_model.max_depth, 3);
  EXPECT_EQ(s.upper_model.learning_rate, 0.05);
  EXPECT_EQ(s.simulation.n, 1000u);
}

TEST(ExperimentSpec, ParseResolveRoundTrip) {
  const ExperimentSpec s = parse_experiment_spec(R"({
    "data": {"source": "simulate", "n": 321, "x_max": 8},
    "seed": 17, "pad": 0.01,
    "upper_model": {"n_estimators": 12, "lambda": 2}
  })");
  EXPECT_EQ(s.simulation.n, 321u);
  EXPECT_EQ(s.simulation.x_max, 8.0);
  EXPECT_EQ(s.seed, 17u);
  EXPECT_EQ(s.upper_model.n_estimators, 12);
  EXPECT_EQ(s.upper_model.lambda, 2.0);
  EXPECT_EQ(s.lower_model.n_estimators, 300);

  const ExperimentSpec again = parse_experiment_spec(experiment_spec_to_json(s));
  EXPECT_EQ(experiment_spec_to_json(again), experiment_spec_to_json(s));
}

TEST(ExperimentSpec, RejectsBadDocuments) {
  EXPECT_THROW(parse_experiment_spec(R"({"sed": 1})"), ParameterError);
  EXPECT_THROW(parse_experiment_spec(R"({"lower_tau": 0.9, "upper_tau": 0.1})"),
               ParameterError);
  EXPECT_THROW(parse_experiment_spec(R"({"data": {"source": "ftp"}})"),
               ParameterError);
  EXPECT_THROW(parse_experiment_spec("[1,2"), ParameterError);
}

TEST(Experiment, ReproducibleAndParallelIndependent) {
  ExperimentSpec s = small_spec();
  const ExperimentResult a = run_experiment(s);
  s.parallel = false;
  const ExperimentResult b = run_experiment(s);
  EXPECT_EQ(format_pi_table(a.evaluation), format_pi_table(b.evaluation));
  EXPECT_EQ(a.test_bounds.lower, b.test_bounds.lower);
  EXPECT_EQ(a.train.n_rows(), 150u);
  EXPECT_EQ(a.test.n_rows(), 50u);
}

TEST(Experiment, PrintedCwcIsConsistentWithPrintedCoverageAndWidth) {
  const ExperimentResult r = run_experiment(small_spec());
  for (const IntervalReport* rep : {&r.evaluation.test.raw, &r.evaluation.test.padded}) {
    EXPECT_NEAR(rep->cwc, cwc(rep->picp, rep->pinaw, 0.9, 50), 1e-9);
  }
  // Re-derive from the six-decimal printed values.
  std::istringstream table(format_pi_table(r.evaluation));
  std::string line;
  std::getline(table, line);
  std::getline(table, line);
  int rows = 0;
  while (std::getline(table, line) && line[0] != '#') {
    double pad, train_picp, picp_v, pinaw_v, cwc_v;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf %lf %lf %lf %lf", &pad, &train_picp,
                          &picp_v, &pinaw_v, &cwc_v),
              5);
    EXPECT_NEAR(cwc_v, cwc(picp_v, pinaw_v, 0.9, 50),
                5e-4 * std::max(1.0, cwc_v));
    ++rows;
  }
  EXPECT_EQ(rows, 2);
}

TEST(Experiment, PaddingScalesWidthExactly) {
  const ExperimentResult r = run_experiment(small_spec());
  const auto& t = r.evaluation.test;
  EXPECT_NEAR(t.padded.pinaw, 1.03 * t.raw.pinaw, 1e-12);
  EXPECT_GE(t.padded.picp, t.raw.picp);
}

TEST(Experiment, WritesFourArtifacts) {
  const ExperimentResult r = run_experiment(small_spec());
  const fs::path dir = fs::temp_directory_path() / "qb_experiment_artifacts";
  fs::remove_all(dir);
  write_experiment_artifacts(r, dir);
  for (const char* f : {kMetricsFile, kIntervalsFile, kOrderedIntervalsFile,
                        kResolvedConfigFile}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const CsvTable ordered = read_csv(dir / kOrderedIntervalsFile);
  const auto& width = ordered.columns[ordered.index_of("width")];
  EXPECT_EQ(width.size(), 50u);
  EXPECT_TRUE(std::is_sorted(width.begin(), width.end()));
  // Centered bounds are symmetric about zero.
  const auto& lo = ordered.columns[ordered.index_of("lower")];
  const auto& hi = ordered.columns[ordered.index_of("upper")];
  for (std::size_t i = 0; i < lo.size(); ++i) EXPECT_NEAR(lo[i], -hi[i], 1e-9);

  const CsvTable plot = read_csv(dir / kIntervalsFile);
  EXPECT_EQ(plot.header,
            (std::vector<std::string>{"x", "y", "lower", "upper", "prediction"}));
  EXPECT_TRUE(std::is_sorted(plot.columns[0].begin(), plot.columns[0].end()));

  const ExperimentSpec reloaded = load_experiment_spec(dir / kResolvedConfigFile);
  EXPECT_EQ(format_pi_table(run_experiment(reloaded).evaluation),
            slurp(dir / kMetricsFile));
}

TEST(Experiment, StageLabelledErrors) {
  ExperimentSpec s = small_spec();
  s.source = ExperimentSpec::Source::kCsv;
  s.csv_path = "/nonexistent/data.csv";
  try {
    run_experiment(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("data: ", 0), 0u) << e.what();
  }
}

TEST(EvaluateBounds, CountsCrossings) {
  const Dataset d({"x"}, {{0, 1, 2}}, {0.5, 1.5, 2.5});
  const Ensemble lo(ObjectiveSpec::quantile_huber(0.05, 1), 3.0, 1, {"x"});
  const Ensemble hi(ObjectiveSpec::quantile_huber(0.95, 1), 0.0, 1, {"x"});
  const BoundPredictions b = predict_bounds(lo, hi, d);
  EXPECT_EQ(b.crossings, 3u);
  EXPECT_EQ(b.lower[0], 0.0);
  EXPECT_EQ(b.upper[0], 3.0);
  const SplitIntervalReport r = evaluate_bounds(d, b, 0.9, 50, 0.0);
  EXPECT_EQ(r.raw.picp, 1.0);
}

}  // namespace
}  // namespace quantboost
