#include <fstream>
#include <set>

#include "somqe/error.hpp"
#include "somqe/json_io.hpp"

namespace somqe {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ValidationError(where.empty() ? key : where + "." + key, "unknown field");
}

template <typename T>
T get_field(const Json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(where.empty() ? key : where + "." + key, e.what());
    }
}

}  // namespace

Json to_json(const TrainingConfig& c) {
    return {{"rows", c.rows},
            {"cols", c.cols},
            {"iterations", c.iterations},
            {"alpha0", c.alpha0},
            {"radius0", c.radius0},
            {"seed", c.seed},
            {"alpha_schedule", std::string(to_string(c.alpha_schedule))},
            {"radius_schedule", std::string(to_string(c.radius_schedule))},
            {"kernel", "gaussian"}};
}

TrainingConfig training_config_from_json(const Json& j, TrainingConfig c) {
    const std::string where = "training";
    if (!j.is_object()) throw ValidationError(where, "expected an object");
    reject_unknown(j, {"rows", "cols", "iterations", "alpha0", "radius0", "seed", "alpha_schedule", "radius_schedule", "kernel"},
                   where);
    if (j.contains("rows")) c.rows = get_field<std::size_t>(j, "rows", where);
    if (j.contains("cols")) c.cols = get_field<std::size_t>(j, "cols", where);
    if (j.contains("iterations")) c.iterations = get_field<std::size_t>(j, "iterations", where);
    if (j.contains("alpha0")) c.alpha0 = get_field<double>(j, "alpha0", where);
    if (j.contains("radius0")) c.radius0 = get_field<double>(j, "radius0", where);
    if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed", where);
    if (j.contains("alpha_schedule"))
        c.alpha_schedule = decay_schedule_from_string(get_field<std::string>(j, "alpha_schedule", where));
    if (j.contains("radius_schedule"))
        c.radius_schedule = decay_schedule_from_string(get_field<std::string>(j, "radius_schedule", where));
    if (j.contains("kernel") && get_field<std::string>(j, "kernel", where) != "gaussian")
        throw ValidationError("training.kernel", "only 'gaussian' is supported");
    validate(c);
    return c;
}

Json to_json(const MapDocument& doc) {
    Json models = Json::array();
    for (const PixelVector& m : doc.map.models()) models.push_back({m.r, m.g, m.b});
    Json j{{"rows", doc.map.rows()},
           {"cols", doc.map.cols()},
           {"models", models},
           {"config", to_json(doc.config)},
           {"seed", doc.config.seed}};
    if (doc.training_fit) {
        j["diagnostics"] = {{"training_qe", doc.training_fit->qe},
                            {"assignment_counts", doc.training_fit->assignment_counts},
                            {"empty_models", doc.training_fit->empty_models()}};
    }
    return j;
}

MapDocument map_document_from_json(const Json& j) {
    try {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        std::vector<PixelVector> models;
        for (const auto& m : j.at("models")) {
            if (!m.is_array() || m.size() != 3)
                throw ValidationError("models", "each model must be an [r, g, b] triple (3 channels)");
            models.push_back({m[0].get<double>(), m[1].get<double>(), m[2].get<double>()});
        }
        TrainingConfig config;
        if (j.contains("config")) config = training_config_from_json(j.at("config"));
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        config.rows = rows;
        config.cols = cols;
        return {SomMap(rows, cols, std::move(models)), config, std::nullopt};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("map", e.what());
    } catch (const PreconditionError& e) {
        throw ValidationError("map", e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string(), std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace somqe
