#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "somqe/series.hpp"
#include "somqe/som.hpp"

namespace somqe {

using Json = nlohmann::json;

Json to_json(const TrainingConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainingConfig training_config_from_json(const Json& j, TrainingConfig base = {});

/// Serialized trained map: rows, cols, models (row-major [r,g,b]), config echo and seed.
struct MapDocument {
    SomMap map;
    TrainingConfig config;
    std::optional<QeResult> training_fit;  // QE of the map on its own training image
};

Json to_json(const MapDocument& doc);
MapDocument map_document_from_json(const Json& j);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

Json to_json(const SeriesSpec& spec);
/// Kind-specific defaults are applied first, then the document's fields.
SeriesSpec series_spec_from_json(const Json& j);

/// Spec document plus an optional "training" block, as accepted by `pipeline`.
struct SpecDocument {
    SeriesSpec series;
    TrainingConfig training;
};

Json to_json(const SpecDocument& doc);
SpecDocument spec_document_from_json(const Json& j);
SpecDocument load_spec_document(const std::filesystem::path& path);

Json manifest_to_json(const SeriesSpec& spec, const GeneratedSeries& series, const std::vector<std::string>& files);

}  // namespace somqe
