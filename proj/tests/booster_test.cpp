#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "quantboost/booster.hpp"
#include "quantboost/error.hpp"
#include "quantboost/model_io.hpp"

namespace quantboost {
namespace {

Dataset one_feature(std::vector<double> x, std::vector<double> y = {}) {
  if (y.empty()) y.assign(x.size(), 0.0);
  return Dataset({"x"}, {std::move(x)}, std::move(y));
}

TEST(LeafWeight, Examples) {
  EXPECT_DOUBLE_EQ(leaf_weight(4, 2, 1), -4.0 / 3.0);
  EXPECT_DOUBLE_EQ(leaf_weight(0, 5, 1), 0.0);
  EXPECT_DOUBLE_EQ(leaf_weight(-3, 0, 1), 3.0);
  EXPECT_THROW(leaf_weight(1, 0, 0), DegenerateLeafError);
}

TEST(StructureScore, Examples) {
  const std::vector<GradStats> a{{0, 1}};
  const std::vector<GradStats> b{{-4, 2}};
  const std::vector<GradStats> c{{-4, 2}, {4, 2}};
  EXPECT_DOUBLE_EQ(structure_score(a, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(structure_score(b, 0, 0), -4.0);
  EXPECT_DOUBLE_EQ(structure_score(c, 0, 1), -6.0);
}

TEST(SplitGain, Examples) {
  EXPECT_DOUBLE_EQ(split_gain({-4, 2}, {4, 2}, 0, 0), 8.0);
  EXPECT_DOUBLE_EQ(split_gain({-4, 2}, {4, 2}, 0, 1), 7.0);
  // 1/2 (4/2 + 4/2 - 16/3), evaluated by hand.
  EXPECT_NEAR(split_gain({-2, 1}, {-2, 1}, 1, 0), -2.0 / 3.0, 1e-15);
  EXPECT_THROW(split_gain({1, 0}, {1, 1}, 0, 0), DegenerateLeafError);
}

TEST(SplitGain, EqualsStructureScoreReduction) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> g(-10, 10);
  std::uniform_real_distribution<double> h(0.01, 10);
  std::uniform_real_distribution<double> reg(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const GradStats left{g(gen), h(gen)};
    const GradStats right{g(gen), h(gen)};
    const double lambda = reg(gen);
    const double gamma = reg(gen);
    const std::vector<GradStats> parent{left + right};
    const std::vector<GradStats> children{left, right};
    // gamma * T terms cancelled: compare with gamma = 0 scores.
    const double reduction =
        structure_score(parent, lambda, 0) - structure_score(children, lambda, 0);
    EXPECT_NEAR(split_gain(left, right, lambda, gamma) + gamma, reduction,
                1e-12 * std::max(1.0, std::abs(reduction)));
  }
}

TEST(FindBestSplit, SingleRowHasNoCandidate) {
  const Dataset d = one_feature({1.0});
  const std::vector<GradHess> grads{{-1, 1}};
  const std::vector<std::size_t> rows{0};
  EXPECT_FALSE(find_best_split(rows, d, grads, TrainConfig{}).has_value());
}

TEST(FindBestSplit, TwoRowsSplitAtMidpoint) {
  const Dataset d = one_feature({0.0, 1.0});
  const std::vector<GradHess> grads{{-1, 1}, {1, 1}};
  const std::vector<std::size_t> rows{0, 1};
  TrainConfig cfg;
  cfg.lambda = 0;
  cfg.gamma = 0;
  const auto split = find_best_split(rows, d, grads, cfg);
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
  EXPECT_DOUBLE_EQ(split->threshold, 0.5);
  EXPECT_DOUBLE_EQ(split->gain, 1.0);
}

TEST(FindBestSplit, ConstantFeaturesNeverSplit) {
  const Dataset d({"a", "b"}, {{2, 2, 2, 2}, {-1, -1, -1, -1}}, {0, 0, 0, 0});
  const std::vector<GradHess> grads{{-5, 1}, {5, 1}, {-3, 1}, {3, 1}};
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  EXPECT_FALSE(find_best_split(rows, d, grads, TrainConfig{}).has_value());
}

TEST(FindBestSplit, GammaAboveEveryGainBlocksSplit) {
  const Dataset d = one_feature({0.0, 1.0});
  const std::vector<GradHess> grads{{-1, 1}, {1, 1}};
  const std::vector<std::size_t> rows{0, 1};
  TrainConfig cfg;
  cfg.lambda = 0;
  cfg.gamma = 1.0;  // gain exactly 0 is not positive
  EXPECT_FALSE(find_best_split(rows, d, grads, cfg).has_value());
}

TEST(FindBestSplit, MinChildWeightBlocksLightChildren) {
  const Dataset d = one_feature({0.0, 1.0, 2.0});
  const std::vector<GradHess> grads{{-5, 0.5}, {1, 0.5}, {1, 0.5}};
  const std::vector<std::size_t> rows{0, 1, 2};
  TrainConfig cfg;
  cfg.lambda = 1;
  cfg.min_child_weight = 1.0;
  const auto split = find_best_split(rows, d, grads, cfg);
  // Every candidate leaves one child with hessian 0.5.
  EXPECT_FALSE(split.has_value());
  cfg.min_child_weight = 0.5;
  ASSERT_TRUE(find_best_split(rows, d, grads, cfg).has_value());
  EXPECT_DOUBLE_EQ(find_best_split(rows, d, grads, cfg)->threshold, 0.5);
}

TEST(FindBestSplit, TiesGoToLowestFeature) {
  // Two identical features give identical gains.
  const Dataset d({"a", "b"}, {{0, 1, 2, 3}, {0, 1, 2, 3}}, {0, 0, 0, 0});
  const std::vector<GradHess> grads{{-1, 1}, {-1, 1}, {1, 1}, {1, 1}};
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const auto split = find_best_split(rows, d, grads, TrainConfig{});
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
  EXPECT_DOUBLE_EQ(split->threshold, 1.5);
}

TEST(FindBestSplit, MatchesExhaustiveEnumeration) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto p = testing::make_random_split_problem(gen);
    std::vector<std::size_t> rows(p.data.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto got = find_best_split(rows, p.data, p.grads, p.config);
    const auto want = testing::brute_force_best_split(p.data, p.grads, p.config);
    ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
    if (!got) continue;
    EXPECT_EQ(got->feature, want->feature) << "trial " << trial;
    EXPECT_NEAR(got->threshold, want->threshold,
                1e-12 * std::max(1.0, std::abs(want->threshold)));
    EXPECT_EQ(got->gain, want->gain) << "trial " << trial;
  }
}

TEST(FindBestSplit, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = testing::make_random_split_problem(gen);
    std::vector<std::size_t> rows(p.data.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto seq = find_best_split(rows, p.data, p.grads, p.config);
    p.config.n_threads = 3;
    const auto par = find_best_split(rows, p.data, p.grads, p.config);
    ASSERT_EQ(seq.has_value(), par.has_value());
    if (seq) {
      EXPECT_EQ(seq->feature, par->feature);
      EXPECT_EQ(seq->threshold, par->threshold);
      EXPECT_EQ(seq->gain, par->gain);
    }
  }
}

TEST(GrowTree, DepthOneIsSingleLeaf) {
  const Dataset d = one_feature({0, 1, 2});
  const std::vector<GradHess> grads{{1, 1}, {2, 1}, {-6, 1}};
  TrainConfig cfg;
  cfg.max_depth = 1;
  const Tree t = grow_tree(d, grads, cfg);
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_DOUBLE_EQ(std::get<LeafNode>(t.nodes()[0]).weight, 3.0 / 4.0);
}

TEST(GrowTree, TwoRowExample) {
  const Dataset d = one_feature({0.0, 1.0});
  const std::vector<GradHess> grads{{-1, 1}, {1, 1}};
  TrainConfig cfg;
  cfg.max_depth = 2;
  cfg.lambda = 0;
  const Tree t = grow_tree(d, grads, cfg);
  ASSERT_EQ(t.n_leaves(), 2u);
  const auto& root = std::get<SplitNode>(t.nodes()[0]);
  EXPECT_DOUBLE_EQ(root.threshold, 0.5);
  EXPECT_DOUBLE_EQ(std::get<LeafNode>(t.nodes()[root.left]).weight, 1.0);
  EXPECT_DOUBLE_EQ(std::get<LeafNode>(t.nodes()[root.right]).weight, -1.0);
}

TEST(GrowTree, RespectsDepthAndLeafWeightsAreOptimal) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<double> a(200), b(200);
  std::vector<GradHess> grads(200);
  for (int i = 0; i < 200; ++i) {
    a[i] = nd(gen);
    b[i] = nd(gen);
    grads[i] = {nd(gen) + a[i], 1.0};
  }
  const Dataset d({"a", "b"}, {a, b}, std::vector<double>(200, 0.0));
  for (int depth = 1; depth <= 5; ++depth) {
    TrainConfig cfg;
    cfg.max_depth = depth;
    cfg.lambda = 0.7;
    const Tree t = grow_tree(d, grads, cfg);
    EXPECT_LE(t.depth(), depth);
    // Recompute each leaf's optimal weight from the rows routed to it.
    std::vector<GradStats> sums(t.nodes().size());
    for (int i = 0; i < 200; ++i) {
      std::size_t node = 0;
      while (const auto* s = std::get_if<SplitNode>(&t.nodes()[node])) {
        node = d.value(i, s->feature) < s->threshold ? s->left : s->right;
      }
      sums[node].add(grads[i]);
    }
    for (std::size_t n = 0; n < t.nodes().size(); ++n) {
      if (const auto* leaf = std::get_if<LeafNode>(&t.nodes()[n])) {
        EXPECT_NEAR(leaf->weight, -sums[n].grad / (sums[n].hess + cfg.lambda), 1e-12);
      }
    }
  }
}

TEST(GrowTree, IdenticalTargetsUnderSquaredErrorGiveZeroLeaf) {
  const Dataset d = one_feature({0, 1, 2, 3}, {7, 7, 7, 7});
  const SquaredErrorObjective obj;
  const double base = obj.initial_prediction(d.targets());
  std::vector<GradHess> grads;
  for (double y : d.targets()) grads.push_back(obj.grad_hess(y, base));
  const Tree t = grow_tree(d, grads, TrainConfig{});
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(std::get<LeafNode>(t.nodes()[0]).weight, 0.0);
}

TEST(Predict, EmptyEnsembleReturnsBaseScore) {
  const Ensemble e(ObjectiveSpec::squared_error(), 2.5, 0.1, {"x"});
  const std::vector<double> row{3.0};
  EXPECT_EQ(e.predict(row), 2.5);
}

TEST(Predict, SingleLeafTree) {
  Ensemble e(ObjectiveSpec::squared_error(), 1.0, 0.5, {"x"});
  e.add_tree(Tree({LeafNode{4.0}}));
  const std::vector<double> row{0.0};
  EXPECT_EQ(e.predict(row), 3.0);
}

TEST(Predict, HandBuiltDepthTwoTreeFollowsManualTraversal) {
  // root: x0 < 1 ? (x1 < 0 ? 10 : 20) : 30
  const Tree t({SplitNode{0, 1.0, 1, 4}, SplitNode{1, 0.0, 2, 3}, LeafNode{10},
                LeafNode{20}, LeafNode{30}});
  Ensemble e(ObjectiveSpec::squared_error(), 0.0, 1.0, {"x0", "x1"}, {t});
  EXPECT_EQ(e.predict(std::vector<double>{0.5, -1.0}), 10.0);
  EXPECT_EQ(e.predict(std::vector<double>{0.5, 0.0}), 20.0);
  EXPECT_EQ(e.predict(std::vector<double>{1.0, -5.0}), 30.0);
  EXPECT_EQ(e.predict(std::vector<double>{7.0, 7.0}), 30.0);
  EXPECT_THROW(e.predict(std::vector<double>{1.0}), SchemaError);
  const Dataset wrong = one_feature({1.0});
  EXPECT_THROW(e.predict(wrong), SchemaError);
}

TEST(Tree, RejectsMalformedNodeArrays) {
  EXPECT_THROW(Tree({SplitNode{0, 1.0, 1, 1}, LeafNode{0}}), DataError);
  EXPECT_THROW(Tree({SplitNode{0, 1.0, 0, 2}, LeafNode{0}, LeafNode{1}}), DataError);
  EXPECT_THROW(Tree({LeafNode{INFINITY}}), DataError);
}

TEST(Train, ConstantTargetGivesZeroTrees) {
  const Dataset d = one_feature({0, 1, 2, 3, 4}, {3, 3, 3, 3, 3});
  TrainConfig cfg;
  cfg.n_estimators = 10;
  const Ensemble e = train(d, SquaredErrorObjective(), cfg);
  ASSERT_EQ(e.trees().size(), 10u);
  for (const auto& t : e.trees()) {
    for (const auto& n : t.nodes()) EXPECT_EQ(std::get<LeafNode>(n).weight, 0.0);
  }
  for (double p : e.predict(d)) EXPECT_EQ(p, 3.0);
}

TEST(Train, RoundsAddShrunkTreeOutputs) {
  const Dataset d = one_feature({0, 1, 2, 3, 4, 5}, {1, 4, 2, 8, 5, 7});
  TrainConfig cfg;
  cfg.n_estimators = 5;
  cfg.learning_rate = 0.3;
  const Ensemble full = train(d, SquaredErrorObjective(), cfg);
  const std::vector<double> row{2.0};
  double expected = full.base_score();
  for (const auto& t : full.trees()) expected += 0.3 * t.leaf_value(row);
  EXPECT_EQ(full.predict(row), expected);
  // Truncating to the first k trees reproduces the k-round model.
  cfg.n_estimators = 3;
  const Ensemble part = train(d, SquaredErrorObjective(), cfg);
  EXPECT_EQ(serialize_model(part),
            serialize_model(Ensemble(full.objective(), full.base_score(), 0.3,
                                     full.feature_names(),
                                     {full.trees().begin(), full.trees().begin() + 3})));
}

TEST(Train, QuantileObjectiveRequiresPositiveLambda) {
  const Dataset d = one_feature({0, 1}, {0, 1});
  TrainConfig cfg;
  cfg.lambda = 0;
  EXPECT_THROW(train(d, QuantileHuberObjective({0.5, 1.0}), cfg), ParameterError);
}

TEST(Train, RejectsBadInputs) {
  TrainConfig cfg;
  EXPECT_THROW(train(Dataset(), SquaredErrorObjective(), cfg), DataError);
  cfg.n_estimators = 0;
  EXPECT_THROW(train(one_feature({0, 1}, {0, 1}), SquaredErrorObjective(), cfg),
               ParameterError);
  EXPECT_THROW(one_feature({0, NAN}, {0, 1}), DataError);
  EXPECT_THROW(one_feature({0, 1}, {0, INFINITY}), DataError);
}

TEST(Train, SquaredErrorLossNeverIncreases) {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int ds = 0; ds < 6; ++ds) {
    const int n = 50 + 40 * ds;
    std::vector<double> a(n), b(n), y(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(gen);
      b[i] = u(gen);
      y[i] = std::sin(a[i]) * b[i] + 0.3 * u(gen);
    }
    const Dataset d({"a", "b"}, {a, b}, y);
    TrainConfig cfg;
    cfg.n_estimators = 60;
    cfg.learning_rate = 0.3;
    cfg.lambda = ds % 2 == 0 ? 0.0 : 1.5;
    cfg.max_depth = 2 + ds % 3;
    const Ensemble model = train(d, SquaredErrorObjective(), cfg);
    const auto& h = model.loss_history();
    ASSERT_EQ(h.size(), 61u);
    for (std::size_t r = 1; r < h.size(); ++r) EXPECT_LE(h[r], h[r - 1] + 1e-12);
  }
}

TEST(Train, QuantileModelConvergesFromFarStart) {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> nd;
  std::vector<double> y(2000);
  for (auto& v : y) v = nd(gen);
  const Dataset d = one_feature(std::vector<double>(2000, 1.0), y);
  TrainConfig cfg;
  cfg.base_score = 0.0;
  const Ensemble e = train(d, QuantileHuberObjective({0.9, 0.1}), cfg);
  EXPECT_NEAR(e.predict(std::vector<double>{1.0}),
              testing::sorted_sample_quantile(y, 0.9), 0.05);
}

TEST(Train, SerializedEnsembleIndependentOfThreads) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> cols(4, std::vector<double>(300));
  std::vector<double> y(300);
  for (int i = 0; i < 300; ++i) {
    for (auto& c : cols) c[i] = u(gen);
    y[i] = cols[0][i] * 3 - cols[2][i] + u(gen);
  }
  const Dataset d({"a", "b", "c", "d"}, cols, y);
  TrainConfig cfg;
  cfg.n_estimators = 40;
  const auto seq = serialize_model(train(d, QuantileHuberObjective({0.8, 0.5}), cfg));
  cfg.n_threads = 4;
  const auto par = serialize_model(train(d, QuantileHuberObjective({0.8, 0.5}), cfg));
  EXPECT_EQ(seq, par);
}

}  // namespace
}  // namespace quantboost
