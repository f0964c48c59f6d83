#include "quantboost/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quantboost/error.hpp"

namespace quantboost {

using nlohmann::json;

namespace {

json node_to_json(const Tree& tree, std::size_t index) {
  const auto& node = tree.nodes()[index];
  if (const auto* split = std::get_if<SplitNode>(&node)) {
    return json{{"feature_index", split->feature},
                {"threshold", split->threshold},
                {"left", node_to_json(tree, split->left)},
                {"right", node_to_json(tree, split->right)}};
  }
  return json{{"weight", std::get<LeafNode>(node).weight}};
}

std::size_t node_from_json(const json& j, std::vector<TreeNode>& nodes,
                           std::size_t n_features) {
  const std::size_t index = nodes.size();
  if (j.contains("weight")) {
    nodes.emplace_back(LeafNode{j.at("weight").get<double>()});
    return index;
  }
  nodes.emplace_back(LeafNode{});
  const auto feature = j.at("feature_index").get<std::size_t>();
  if (feature >= n_features) {
    throw SchemaError("tree splits on feature " + std::to_string(feature) +
                      " but the model has " + std::to_string(n_features));
  }
  const double threshold = j.at("threshold").get<double>();
  const std::size_t left = node_from_json(j.at("left"), nodes, n_features);
  const std::size_t right = node_from_json(j.at("right"), nodes, n_features);
  nodes[index] = SplitNode{feature, threshold, left, right};
  return index;
}

}  // namespace

std::string serialize_model(const Ensemble& model) {
  json objective{{"name", model.objective().name()}, {"tau", nullptr},
                 {"upsilon", nullptr}};
  if (model.objective().kind == ObjectiveKind::kQuantileHuber) {
    objective["tau"] = model.objective().quantile.tau;
    objective["upsilon"] = model.objective().quantile.upsilon;
  }
  json trees = json::array();
  for (const auto& tree : model.trees()) trees.push_back(node_to_json(tree, 0));

  // ordered_json keeps the documented field order in the output.
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["objective"] = objective;
  doc["base_score"] = model.base_score();
  doc["learning_rate"] = model.learning_rate();
  doc["feature_names"] = model.feature_names();
  doc["trees"] = trees;
  return doc.dump(1) + "\n";
}

Ensemble parse_model(std::string_view text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format_version " +
                      std::to_string(version));
    }
    const json& obj = doc.at("objective");
    const auto name = obj.at("name").get<std::string>();
    ObjectiveSpec spec;
    if (name == "squared_error") {
      spec = ObjectiveSpec::squared_error();
    } else if (name == "quantile_huber") {
      spec = ObjectiveSpec::quantile_huber(obj.at("tau").get<double>(),
                                           obj.at("upsilon").get<double>());
      spec.validate();
    } else {
      throw DataError("unknown objective '" + name + "' in model");
    }
    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    std::vector<Tree> trees;
    for (const auto& t : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      node_from_json(t, nodes, names.size());
      trees.emplace_back(std::move(nodes));
    }
    return Ensemble(spec, doc.at("base_score").get<double>(),
                    doc.at("learning_rate").get<double>(), std::move(names),
                    std::move(trees));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const Ensemble& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << serialize_model(model);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Ensemble load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace quantboost
