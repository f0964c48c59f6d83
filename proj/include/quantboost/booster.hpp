#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "quantboost/data.hpp"
#include "quantboost/objective.hpp"

namespace quantboost {

/// Booster hyperparameters. Depth counts node levels: max_depth = 1 is a
/// single leaf, max_depth = 2 allows one split.
struct TrainConfig {
  int n_estimators = 300;
  int max_depth = 3;
  double learning_rate = 0.05;
  double lambda = 1.0;            // L2 penalty on leaf weights
  double gamma = 0.0;             // per-leaf penalty, i.e. minimum split gain
  double min_child_weight = 1.0;  // minimum hessian sum in each child
  /// Starting prediction; the objective's default when unset.
  std::optional<double> base_score;
  std::uint64_t seed = 0;
  /// Worker threads for split search. Results do not depend on it.
  int n_threads = 1;

  void validate() const;
};

/// Gradient and hessian sums over an instance set.
struct GradStats {
  double grad = 0.0;
  double hess = 0.0;

  void add(const GradHess& gh) {
    grad += gh.g;
    hess += gh.h;
  }
  friend GradStats operator+(GradStats a, GradStats b) {
    return {a.grad + b.grad, a.hess + b.hess};
  }
  friend GradStats operator-(GradStats a, GradStats b) {
    return {a.grad - b.grad, a.hess - b.hess};
  }
};

/// Optimal leaf score -G / (H + lambda).
double leaf_weight(double grad_sum, double hess_sum, double lambda);

/// -1/2 sum_j G_j^2 / (H_j + lambda) + gamma * T. Lower is better.
double structure_score(std::span<const GradStats> leaves, double lambda,
                       double gamma);

/// Regularized loss reduction from splitting a leaf into `left` and `right`.
double split_gain(GradStats left, GradStats right, double lambda, double gamma);

struct SplitCandidate {
  std::size_t feature = 0;
  /// Rows with value < threshold go left.
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exact greedy search over every feature and every midpoint between
/// consecutive distinct values of `rows`. Only candidates with positive gain
/// whose children both reach min_child_weight qualify. Ties go to the lowest
/// feature index, then the lowest threshold.
std::optional<SplitCandidate> find_best_split(std::span<const std::size_t> rows,
                                              const Dataset& data,
                                              std::span<const GradHess> grads,
                                              const TrainConfig& config);

struct SplitNode {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;   // index into Tree::nodes()
  std::size_t right = 0;
};

struct LeafNode {
  double weight = 0.0;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

/// Binary regression tree stored as a flat node array with the root at 0.
class Tree {
 public:
  Tree() : nodes_{LeafNode{}} {}
  explicit Tree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_leaves() const;
  /// Node levels on the longest root-to-leaf path.
  int depth() const;

  double leaf_value(std::span<const double> features) const;
  double leaf_value(const Dataset& data, std::size_t row) const;

 private:
  std::vector<TreeNode> nodes_;
};

/// Grows one tree on all rows of `data` using precomputed per-row
/// derivatives.
Tree grow_tree(const Dataset& data, std::span<const GradHess> grads,
               const TrainConfig& config);

/// Additive tree model: base_score + learning_rate * sum_k tree_k(x).
class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(ObjectiveSpec objective, double base_score, double learning_rate,
           std::vector<std::string> feature_names, std::vector<Tree> trees = {});

  const ObjectiveSpec& objective() const { return objective_; }
  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  std::size_t n_features() const { return names_.size(); }
  const std::vector<Tree>& trees() const { return trees_; }

  void add_tree(Tree tree) { trees_.push_back(std::move(tree)); }

  /// Mean training loss before the first tree and after each round. Empty
  /// for models that were loaded rather than trained.
  const std::vector<double>& loss_history() const { return loss_history_; }
  void set_loss_history(std::vector<double> h) { loss_history_ = std::move(h); }

  double predict(std::span<const double> features) const;
  /// Throws SchemaError when the feature count differs from training.
  std::vector<double> predict(const Dataset& data) const;

 private:
  ObjectiveSpec objective_;
  double base_score_ = 0.0;
  double learning_rate_ = 1.0;
  std::vector<std::string> names_;
  std::vector<Tree> trees_;
  std::vector<double> loss_history_;
};

/// Newton boosting: each round recomputes (g, h) at the current predictions,
/// grows a tree on them and adds it with shrinkage.
Ensemble train(const Dataset& data, const Objective& objective,
               const TrainConfig& config);

}  // namespace quantboost
