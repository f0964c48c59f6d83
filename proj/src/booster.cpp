#include "quantboost/booster.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "quantboost/error.hpp"

namespace quantboost {

void TrainConfig::validate() const {
  if (n_estimators < 1) throw ParameterError("n_estimators must be >= 1");
  if (max_depth < 1) throw ParameterError("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ParameterError("learning_rate must lie in (0, 1]");
  }
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  if (!(min_child_weight >= 0.0)) {
    throw ParameterError("min_child_weight must be >= 0");
  }
  if (base_score && !std::isfinite(*base_score)) {
    throw ParameterError("base_score must be finite");
  }
  if (n_threads < 1) throw ParameterError("n_threads must be >= 1");
}

double leaf_weight(double grad_sum, double hess_sum, double lambda) {
  const double denom = hess_sum + lambda;
  if (!(denom > 0.0)) {
    throw DegenerateLeafError("leaf has H + lambda = " + std::to_string(denom) +
                              "; use lambda > 0");
  }
  return -grad_sum / denom;
}

double structure_score(std::span<const GradStats> leaves, double lambda,
                       double gamma) {
  double sum = 0.0;
  for (const auto& s : leaves) {
    const double denom = s.hess + lambda;
    if (!(denom > 0.0)) {
      throw DegenerateLeafError("leaf has H + lambda <= 0");
    }
    sum += s.grad * s.grad / denom;
  }
  return -0.5 * sum + gamma * static_cast<double>(leaves.size());
}

double split_gain(GradStats left, GradStats right, double lambda, double gamma) {
  const GradStats parent = left + right;
  const double dl = left.hess + lambda;
  const double dr = right.hess + lambda;
  const double dp = parent.hess + lambda;
  if (!(dl > 0.0 && dr > 0.0 && dp > 0.0)) {
    throw DegenerateLeafError("split has a child or parent with H + lambda <= 0");
  }
  return 0.5 * (left.grad * left.grad / dl + right.grad * right.grad / dr -
                parent.grad * parent.grad / dp) -
         gamma;
}

namespace {

std::optional<SplitCandidate> best_split_on_feature(
    std::size_t feature, std::span<const std::size_t> rows, const Dataset& data,
    std::span<const GradHess> grads, GradStats total, const TrainConfig& config) {
  const auto column = data.column(feature);
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(rows.size());
  for (std::size_t r : rows) order.emplace_back(column[r], r);
  std::sort(order.begin(), order.end());

  std::optional<SplitCandidate> best;
  GradStats left;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    left.add(grads[order[i].second]);
    const double lo = order[i].first;
    const double hi = order[i + 1].first;
    if (!(lo < hi)) continue;
    const GradStats right = total - left;
    if (left.hess < config.min_child_weight ||
        right.hess < config.min_child_weight) {
      continue;
    }
    if (!(left.hess + config.lambda > 0.0 && right.hess + config.lambda > 0.0)) {
      continue;
    }
    const double gain = split_gain(left, right, config.lambda, config.gamma);
    if (gain > 0.0 && (!best || gain > best->gain)) {
      double mid = lo + (hi - lo) / 2.0;
      // Adjacent doubles: the midpoint collapses onto lo.
      if (!(mid > lo)) mid = hi;
      best = SplitCandidate{feature, mid, gain};
    }
  }
  return best;
}

}  // namespace

std::optional<SplitCandidate> find_best_split(std::span<const std::size_t> rows,
                                              const Dataset& data,
                                              std::span<const GradHess> grads,
                                              const TrainConfig& config) {
  if (grads.size() != data.n_rows()) {
    throw DataError("gradient count does not match dataset rows");
  }
  if (rows.size() < 2) return std::nullopt;

  GradStats total;
  for (std::size_t r : rows) total.add(grads[r]);
  if (!(total.hess + config.lambda > 0.0)) return std::nullopt;

  const std::size_t n_features = data.n_features();
  std::vector<std::optional<SplitCandidate>> per_feature(n_features);
  const auto scan = [&](std::size_t f) {
    per_feature[f] = best_split_on_feature(f, rows, data, grads, total, config);
  };

  const auto n_workers = std::min<std::size_t>(
      static_cast<std::size_t>(config.n_threads), n_features);
  if (n_workers <= 1) {
    for (std::size_t f = 0; f < n_features; ++f) scan(f);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t f = w; f < n_features; f += n_workers) scan(f);
      });
    }
  }

  // Reduce in feature order so ties resolve exactly as a sequential scan.
  std::optional<SplitCandidate> best;
  for (const auto& c : per_feature) {
    if (c && (!best || c->gain > best->gain)) best = c;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (const auto* split = std::get_if<SplitNode>(&nodes_[i])) {
      if (split->left <= i || split->right <= i ||
          split->left >= nodes_.size() || split->right >= nodes_.size() ||
          split->left == split->right) {
        throw DataError("tree node " + std::to_string(i) +
                        " has invalid children");
      }
      if (!std::isfinite(split->threshold)) {
        throw DataError("tree node " + std::to_string(i) +
                        " has a non-finite threshold");
      }
    } else if (!std::isfinite(std::get<LeafNode>(nodes_[i]).weight)) {
      throw DataError("tree leaf " + std::to_string(i) +
                      " has a non-finite weight");
    }
  }
}

std::size_t Tree::n_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) {
        return std::holds_alternative<LeafNode>(n);
      }));
}

int Tree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  level[0] = 1;
  int deepest = 1;
  // Children always follow their parent in the array.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (const auto* split = std::get_if<SplitNode>(&nodes_[i])) {
      level[split->left] = level[i] + 1;
      level[split->right] = level[i] + 1;
    }
  }
  return deepest;
}

double Tree::leaf_value(std::span<const double> features) const {
  std::size_t i = 0;
  while (const auto* split = std::get_if<SplitNode>(&nodes_[i])) {
    i = features[split->feature] < split->threshold ? split->left : split->right;
  }
  return std::get<LeafNode>(nodes_[i]).weight;
}

double Tree::leaf_value(const Dataset& data, std::size_t row) const {
  std::size_t i = 0;
  while (const auto* split = std::get_if<SplitNode>(&nodes_[i])) {
    i = data.value(row, split->feature) < split->threshold ? split->left
                                                           : split->right;
  }
  return std::get<LeafNode>(nodes_[i]).weight;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::span<const GradHess> grads,
             const TrainConfig& config)
      : data_(data), grads_(grads), config_(config) {}

  Tree grow() {
    std::vector<std::size_t> rows(data_.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    build(rows, 1);
    return Tree(std::move(nodes_));
  }

 private:
  std::size_t build(const std::vector<std::size_t>& rows, int depth) {
    GradStats sum;
    for (std::size_t r : rows) sum.add(grads_[r]);
    const std::size_t index = nodes_.size();
    nodes_.emplace_back(LeafNode{leaf_weight(sum.grad, sum.hess, config_.lambda)});
    if (depth >= config_.max_depth) return index;

    const auto split = find_best_split(rows, data_, grads_, config_);
    if (!split) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (data_.value(r, split->feature) < split->threshold ? left : right)
          .push_back(r);
    }
    const std::size_t l = build(left, depth + 1);
    const std::size_t rgt = build(right, depth + 1);
    nodes_[index] = SplitNode{split->feature, split->threshold, l, rgt};
    return index;
  }

  const Dataset& data_;
  std::span<const GradHess> grads_;
  const TrainConfig& config_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Tree grow_tree(const Dataset& data, std::span<const GradHess> grads,
               const TrainConfig& config) {
  config.validate();
  if (data.n_rows() == 0) throw DataError("cannot grow a tree on no rows");
  if (grads.size() != data.n_rows()) {
    throw DataError("gradient count does not match dataset rows");
  }
  return TreeGrower(data, grads, config).grow();
}

// ---------------------------------------------------------------------------
// Ensemble

Ensemble::Ensemble(ObjectiveSpec objective, double base_score,
                   double learning_rate, std::vector<std::string> feature_names,
                   std::vector<Tree> trees)
    : objective_(objective),
      base_score_(base_score),
      learning_rate_(learning_rate),
      names_(std::move(feature_names)),
      trees_(std::move(trees)) {}

double Ensemble::predict(std::span<const double> features) const {
  if (features.size() != names_.size()) {
    throw SchemaError("model expects " + std::to_string(names_.size()) +
                      " features, got " + std::to_string(features.size()));
  }
  double pred = base_score_;
  for (const auto& tree : trees_) {
    pred += learning_rate_ * tree.leaf_value(features);
  }
  return pred;
}

std::vector<double> Ensemble::predict(const Dataset& data) const {
  if (data.n_features() != names_.size()) {
    throw SchemaError("model expects " + std::to_string(names_.size()) +
                      " features, data has " +
                      std::to_string(data.n_features()));
  }
  std::vector<double> out(data.n_rows(), base_score_);
  for (const auto& tree : trees_) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += learning_rate_ * tree.leaf_value(data, i);
    }
  }
  return out;
}

namespace {

double mean_loss(const Objective& objective, std::span<const double> y,
                 std::span<const double> pred) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += objective.loss(y[i], pred[i]);
  return sum / static_cast<double>(y.size());
}

}  // namespace

Ensemble train(const Dataset& data, const Objective& objective,
               const TrainConfig& config) {
  config.validate();
  if (data.n_rows() == 0) throw DataError("training set is empty");
  if (data.n_features() == 0) throw DataError("training set has no features");
  if (data.targets().size() != data.n_rows()) {
    throw DataError("training set has no targets");
  }
  if (objective.hessian_may_vanish() && !(config.lambda > 0.0)) {
    throw ParameterError("objective '" + objective.spec().name() +
                         "' has zero-hessian regions and requires lambda > 0");
  }

  const auto y = data.targets();
  const double base =
      config.base_score.value_or(objective.initial_prediction(y));
  Ensemble model(objective.spec(), base, config.learning_rate,
                 data.feature_names());

  std::vector<double> pred(data.n_rows(), base);
  std::vector<GradHess> grads(data.n_rows());
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.n_estimators) + 1);
  history.push_back(mean_loss(objective, y, pred));

  for (int round = 0; round < config.n_estimators; ++round) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      grads[i] = objective.grad_hess(y[i], pred[i]);
    }
    Tree tree = grow_tree(data, grads, config);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred[i] += config.learning_rate * tree.leaf_value(data, i);
    }
    model.add_tree(std::move(tree));
    history.push_back(mean_loss(objective, y, pred));
  }
  model.set_loss_history(std::move(history));
  return model;
}

}  // namespace quantboost
