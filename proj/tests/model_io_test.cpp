#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include <json.hpp>

#include "quantboost/error.hpp"
#include "quantboost/model_io.hpp"

namespace quantboost {
namespace {

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t m) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> cols(m, std::vector<double>(n));
  std::vector<double> y(n);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m; ++j) names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : cols) c[i] = nd(gen);
    y[i] = cols[0][i] * cols[m - 1][i] + nd(gen) / 3;
  }
  return Dataset(names, cols, y);
}

TEST(ModelIo, SaveLoadPredictIsBitExact) {
  const Dataset d = random_dataset(1, 400, 3);
  TrainConfig cfg;
  cfg.n_estimators = 50;
  cfg.learning_rate = 0.1;
  for (const auto& spec : {ObjectiveSpec::squared_error(),
                           ObjectiveSpec::quantile_huber(0.95, 0.07)}) {
    const Ensemble model = train(d, *make_objective(spec), cfg);
    const auto path = std::filesystem::temp_directory_path() / "qb_model_io.json";
    save_model(model, path);
    const Ensemble back = load_model(path);
    EXPECT_EQ(back.objective(), spec);
    EXPECT_EQ(back.predict(d), model.predict(d));
    EXPECT_EQ(serialize_model(back), serialize_model(model));
  }
}

TEST(ModelIo, DocumentLayout) {
  Ensemble e(ObjectiveSpec::quantile_huber(0.05, 2.0), 1.25, 0.05, {"x"},
             {Tree({SplitNode{0, 0.5, 1, 2}, LeafNode{-1.0}, LeafNode{1.0}})});
  const auto doc = nlohmann::json::parse(serialize_model(e));
  EXPECT_EQ(doc["format_version"], 1);
  EXPECT_EQ(doc["objective"]["name"], "quantile_huber");
  EXPECT_EQ(doc["objective"]["tau"], 0.05);
  EXPECT_EQ(doc["objective"]["upsilon"], 2.0);
  EXPECT_EQ(doc["base_score"], 1.25);
  EXPECT_EQ(doc["learning_rate"], 0.05);
  const auto& root = doc["trees"][0];
  EXPECT_EQ(root["feature_index"], 0);
  EXPECT_EQ(root["threshold"], 0.5);
  EXPECT_EQ(root["left"]["weight"], -1.0);
  EXPECT_EQ(root["right"]["weight"], 1.0);

  const auto sq = nlohmann::json::parse(
      serialize_model(Ensemble(ObjectiveSpec::squared_error(), 0, 1, {"x"})));
  EXPECT_EQ(sq["objective"]["name"], "squared_error");
  EXPECT_TRUE(sq["objective"]["tau"].is_null());
}

TEST(ModelIo, RejectsMalformedDocuments) {
  EXPECT_THROW(parse_model("not json"), DataError);
  EXPECT_THROW(parse_model(R"({"format_version": 2})"), DataError);
  const std::string bad_feature = R"({"format_version":1,
    "objective":{"name":"squared_error","tau":null,"upsilon":null},
    "base_score":0,"learning_rate":1,"feature_names":["x"],
    "trees":[{"feature_index":3,"threshold":0,"left":{"weight":0},"right":{"weight":1}}]})";
  EXPECT_THROW(parse_model(bad_feature), SchemaError);
  const std::string bad_tau = R"({"format_version":1,
    "objective":{"name":"quantile_huber","tau":1.5,"upsilon":1},
    "base_score":0,"learning_rate":1,"feature_names":["x"],"trees":[]})";
  EXPECT_THROW(parse_model(bad_tau), ParameterError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), DataError);
}

}  // namespace
}  // namespace quantboost
