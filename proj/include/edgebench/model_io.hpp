#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "edgebench/classifiers.hpp"

namespace edgebench {

using ClassifierModel = std::variant<KnnModel, LogRegModel, SvmModel>;

inline constexpr int kClassifierFormatVersion = 1;

/// Versioned JSON text. Doubles are written with round-trip precision.
std::string serialize_classifier(const ClassifierModel& model);
ClassifierModel deserialize_classifier(const std::string& text);

void save_classifier(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_classifier(const std::filesystem::path& path);

}  // namespace edgebench
