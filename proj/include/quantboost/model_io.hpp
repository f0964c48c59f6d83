#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "quantboost/booster.hpp"

namespace quantboost {

inline constexpr int kModelFormatVersion = 1;

/// JSON document:
///
///   {"format_version": 1,
///    "objective": {"name": ..., "tau": ..., "upsilon": ...},
///    "base_score": ..., "learning_rate": ..., "feature_names": [...],
///    "trees": [node, ...]}
///
/// where node is {"feature_index", "threshold", "left", "right"} or
/// {"weight"}. tau and upsilon are null for squared error. Doubles are
/// written in shortest round-trip form, so a reloaded model predicts
/// bit-identically.
std::string serialize_model(const Ensemble& model);
Ensemble parse_model(std::string_view text);

void save_model(const Ensemble& model, const std::filesystem::path& path);
Ensemble load_model(const std::filesystem::path& path);

}  // namespace quantboost
