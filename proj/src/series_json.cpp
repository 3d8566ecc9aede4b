#include <set>

#include "somqe/error.hpp"
#include "somqe/json_io.hpp"

namespace somqe {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(key, e.what());
    }
}

}  // namespace

Json to_json(const SeriesSpec& s) {
    Json j{{"name", s.name},
           {"kind", std::string(to_string(s.kind))},
           {"width", s.width},
           {"height", s.height},
           {"seed", s.seed}};
    switch (s.kind) {
        case SeriesKind::dot_size_sweep:
        case SeriesKind::dot_count_sweep:
            j["polarity"] = std::string(to_string(s.polarity));
            j["percents"] = s.percents;
            break;
        case SeriesKind::dot_shift_sweep:
            j["polarity"] = std::string(to_string(s.polarity));
            j["shifts_px"] = s.shifts_px;
            break;
        case SeriesKind::chroma_decrement:
            j["channel"] = std::string(to_string(s.channel));
            j["channel_values"] = s.channel_values;
            break;
        case SeriesKind::single_pixel_g_sweep:
            j["g_values"] = s.g_values;
            break;
        case SeriesKind::noise_pixel_removal:
            j["n_images"] = s.n_images;
            break;
    }
    if (s.kind != SeriesKind::single_pixel_g_sweep && s.kind != SeriesKind::noise_pixel_removal) {
        j["n_dots_per_color"] = s.n_dots_per_color;
        j["diameter_px"] = s.diameter_px;
    }
    return j;
}

SeriesSpec series_spec_from_json(const Json& j) {
    if (!j.is_object() || j.empty()) throw ValidationError("spec", "expected a non-empty JSON object");
    static const std::set<std::string> known{"name",     "kind",      "width",          "height",   "size",
                                             "seed",     "polarity",  "percents",       "shifts_px", "channel",
                                             "channel_values", "g_values", "n_images", "n_dots_per_color",
                                             "diameter_px", "training"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ValidationError(key, "unknown field");
    if (!j.contains("kind")) throw ValidationError("kind", "missing");

    SeriesSpec s = SeriesSpec::defaults(series_kind_from_string(field<std::string>(j, "kind")));
    if (j.contains("name")) s.name = field<std::string>(j, "name");
    if (j.contains("size")) {
        const auto preset = field<std::string>(j, "size");
        if (preset == "desk") {
            s.width = 1024;
            s.height = 768;
        } else if (preset == "small") {
            s.width = 512;
            s.height = 512;
        } else if (preset != "full") {
            throw ValidationError("size", "expected full|desk|small, got '" + preset + "'");
        }
    }
    if (j.contains("width")) s.width = field<std::size_t>(j, "width");
    if (j.contains("height")) s.height = field<std::size_t>(j, "height");
    if (j.contains("seed")) s.seed = field<std::uint64_t>(j, "seed");
    if (j.contains("polarity")) s.polarity = polarity_from_string(field<std::string>(j, "polarity"));
    if (j.contains("percents")) s.percents = field<std::vector<int>>(j, "percents");
    if (j.contains("shifts_px")) s.shifts_px = field<std::vector<int>>(j, "shifts_px");
    if (j.contains("channel")) s.channel = channel_from_string(field<std::string>(j, "channel"));
    if (j.contains("channel_values")) s.channel_values = field<std::vector<int>>(j, "channel_values");
    if (j.contains("g_values")) s.g_values = field<std::vector<int>>(j, "g_values");
    if (j.contains("n_images")) s.n_images = field<std::size_t>(j, "n_images");
    if (j.contains("n_dots_per_color")) s.n_dots_per_color = field<std::size_t>(j, "n_dots_per_color");
    if (j.contains("diameter_px")) s.diameter_px = field<long>(j, "diameter_px");
    if (s.name.find_first_of("/\\") != std::string::npos) throw ValidationError("name", "must not contain path separators");
    validate(s);
    return s;
}

Json to_json(const SpecDocument& doc) {
    Json j = to_json(doc.series);
    j["training"] = to_json(doc.training);
    return j;
}

SpecDocument spec_document_from_json(const Json& j) {
    SpecDocument doc;
    doc.series = series_spec_from_json(j);
    doc.training.seed = doc.series.seed;
    if (j.contains("training")) doc.training = training_config_from_json(j.at("training"), doc.training);
    return doc;
}

SpecDocument load_spec_document(const std::filesystem::path& path) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(path, ec) && std::filesystem::file_size(path, ec) == 0)
        throw ValidationError("spec", "empty spec file " + path.string());
    return spec_document_from_json(read_json(path));
}

Json manifest_to_json(const SeriesSpec& spec, const GeneratedSeries& series, const std::vector<std::string>& files) {
    Json images = Json::array();
    for (std::size_t i = 0; i < series.manifest.size(); ++i) {
        const ManifestEntry& e = series.manifest[i];
        Json params = Json::object();
        for (const auto& [k, v] : e.params) params[k] = v;
        Json entry{{"index", e.index}, {"role", e.index == 0 ? "reference" : "test"}, {"delta", e.description},
                   {"params", params}};
        if (i < files.size()) entry["file"] = files[i];
        images.push_back(entry);
    }
    Json j{{"spec", to_json(spec)}, {"seed", spec.seed}, {"images", images}};
    if (!series.notes.empty()) j["notes"] = series.notes;
    return j;
}

}  // namespace somqe
