#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tokattr/detector/config.hpp"
#include "tokattr/detector/gbdt.hpp"
#include "tokattr/detector/protocols.hpp"

namespace tokattr::detector {

using Json = nlohmann::ordered_json;

Json config_to_json(const DetectorConfig& config);
// Missing keys keep their defaults; "positive_class_weight" may be "auto".
DetectorConfig config_from_json(const Json& j);

// {"n_trees": [...], "max_depth": [...], ...}; absent axes stay empty.
Json grid_to_json(const SearchGrid& grid);
SearchGrid grid_from_json(const Json& j);
SearchGrid load_grid(const std::filesystem::path& path);

Json model_to_json(const DetectorModel& model);
DetectorModel model_from_json(const Json& j);
void save_detector(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_detector(const std::filesystem::path& path);

Json report_to_json(const EvalReport& report);

// Aligned plain-text tables.
std::string format_report(const EvalReport& report);
std::string format_importance(const DetectorModel& model);
std::string format_provenance(const DetectorModel& model);

}  // namespace tokattr::detector
