// somqe: generate image series, train a SOM, score images by quantization
// error and RGB Mean, and compare them against a ground-state image.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "somqe/analysis.hpp"
#include "somqe/error.hpp"
#include "somqe/json_io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

using namespace somqe;
namespace fs = std::filesystem;

struct TrainingFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iterations;
    std::optional<double> alpha0;
    std::optional<double> radius0;
    std::optional<std::size_t> rows;
    std::optional<std::size_t> cols;
    std::string alpha_schedule;
    std::string radius_schedule;

    void add_to(CLI::App& app) {
        app.add_option("--seed", seed, "RNG seed");
        app.add_option("--iterations", iterations, "training steps (default 10000)");
        app.add_option("--alpha0", alpha0, "initial learning rate (default 0.2)");
        app.add_option("--radius0", radius0, "initial neighborhood width (default 1.2)");
        app.add_option("--rows", rows, "map rows (default 4)");
        app.add_option("--cols", cols, "map columns (default 4)");
        app.add_option("--alpha-schedule", alpha_schedule, "linear|exponential");
        app.add_option("--radius-schedule", radius_schedule, "linear|exponential");
    }

    TrainingConfig apply(TrainingConfig c) const {
        if (seed) c.seed = *seed;
        if (iterations) c.iterations = *iterations;
        if (alpha0) c.alpha0 = *alpha0;
        if (radius0) c.radius0 = *radius0;
        if (rows) c.rows = *rows;
        if (cols) c.cols = *cols;
        if (!alpha_schedule.empty()) c.alpha_schedule = decay_schedule_from_string(alpha_schedule);
        if (!radius_schedule.empty()) c.radius_schedule = decay_schedule_from_string(radius_schedule);
        validate(c);
        return c;
    }
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

int cmd_generate(const fs::path& spec_path, const fs::path& out, std::optional<std::uint64_t> seed) {
    SpecDocument doc = load_spec_document(spec_path);
    if (seed) doc.series.seed = *seed;
    const GeneratedSeries series = gen_series(doc.series);
    const GenerateResult written = write_series(doc.series, series, out);
    for (const auto& note : series.notes) std::cerr << "note: " << note << '\n';
    std::cout << "wrote " << written.files.size() << " images and " << written.manifest.string() << '\n';
    return 0;
}

int cmd_train(const fs::path& image_path, const fs::path& out, const fs::path& config_path, const TrainingFlags& flags,
              unsigned threads) {
    TrainingConfig config;
    if (!config_path.empty()) config = training_config_from_json(read_json(config_path));
    config = flags.apply(config);
    const RasterImage image = load_png(image_path);
    const auto start = std::chrono::steady_clock::now();
    const SomMap map = train(image, config);
    const double train_ms = elapsed_ms(start);
    const QeResult fit = quantization_error(map, image, threads);
    Json doc = to_json(MapDocument{map, config, fit});
    doc["diagnostics"]["wall_time_train_ms"] = train_ms;
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    write_json(out, doc);
    std::cerr << "trained " << map.rows() << "x" << map.cols() << " map on " << image.size() << " pixels in "
              << train_ms << " ms (training QE " << fit.qe << ")\n";
    if (const auto empty = fit.empty_models(); !empty.empty())
        std::cerr << "warning: " << empty.size() << " model(s) attract no pixels of the training image\n";
    std::cout << out.string() << '\n';
    return 0;
}

int cmd_analyze(const fs::path& map_path, const std::vector<fs::path>& images, const fs::path& out,
                ReportFormat format, unsigned threads) {
    const MapDocument doc = map_document_from_json(read_json(map_path));
    const auto records = analyze_files(doc.map, images, threads);
    Json inputs = Json::array();
    for (const auto& p : images) inputs.push_back(p.string());
    const Json config{{"map", map_path.string()}, {"images", inputs}, {"training", to_json(doc.config)}};
    fs::create_directories(out);
    if (wants_csv(format)) write_records_csv(out / "records.csv", records, config);
    if (wants_json(format)) write_records_json(out / "records.json", records, config);
    write_timings_csv(out / "timings.csv", records);
    for (const auto& r : records)
        std::cerr << r.image_id << ": QE " << format_double(r.som_qe) << " (" << r.wall_time_qe_ms << " ms), RGB mean "
                  << format_double(r.rgb_mean_reported) << '\n';
    return 0;
}

int cmd_compare(const fs::path& records_path, const std::string& ground, const std::string& covariate,
                const fs::path& out) {
    const RecordTable table = read_records(records_path);
    const CompareReport report = compare(table, ground, covariate);
    write_compare_outputs(out, report, table, table.config);
    for (const MetricComparison* m : {&report.qe, &report.rgb_mean})
        std::cout << m->metric << ": " << to_string(m->verdict) << " (p = " << format_double(m->t_test.p_two_sided)
                  << ")\n";
    return 0;
}

int cmd_pipeline(const fs::path& spec_path, const fs::path& out, std::optional<std::uint64_t> seed,
                 const std::string& run_name, ReportFormat format, unsigned threads) {
    SpecDocument doc = load_spec_document(spec_path);
    if (seed) {
        doc.series.seed = *seed;
        doc.training.seed = *seed;
    }
    PipelineOptions options;
    options.run_dir = out / (run_name.empty() ? doc.series.name + "-" + timestamp() : run_name);
    options.format = format;
    options.threads = threads;
    const PipelineResult result = run_pipeline(doc, options);
    std::cerr << "trained in " << result.train_ms << " ms; scored " << result.records.size() << " images\n";
    std::cout << "verdict: " << to_string(result.report.qe.verdict) << '\n' << options.run_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SOM quantization-error change detection for image series"};
    app.require_subcommand(1);

    fs::path spec, out, map_path, records, config_path, image;
    std::vector<fs::path> images;
    std::optional<std::uint64_t> seed;
    std::string ground, covariate, run_name, format_name = "both";
    unsigned threads = 1;
    TrainingFlags training;

    auto* gen = app.add_subcommand("generate", "write a synthetic image series and its manifest");
    gen->add_option("--spec", spec, "series spec (JSON)")->required();
    gen->add_option("--out", out, "output directory")->required();
    gen->add_option("--seed", seed, "override the spec seed");

    auto* trn = app.add_subcommand("train", "train a SOM on a reference image");
    trn->add_option("image", image, "reference PNG")->required();
    trn->add_option("--out", out, "map JSON to write")->required();
    trn->add_option("--config", config_path, "training config JSON");
    trn->add_option("--threads", threads, "threads for the training-fit QE");
    training.add_to(*trn);

    auto* ana = app.add_subcommand("analyze", "score images with SOM-QE and RGB Mean");
    ana->add_option("--map", map_path, "trained map JSON")->required();
    ana->add_option("images", images, "PNG files, in series order")->required();
    ana->add_option("--out", out, "output directory")->required();
    ana->add_option("--format", format_name, "csv|json|both");
    ana->add_option("--threads", threads, "images scored concurrently");

    auto* cmp = app.add_subcommand("compare", "statistics and verdicts against a ground-state image");
    cmp->add_option("--records", records, "records.csv or records.json")->required();
    cmp->add_option("--ground-state", ground, "image_id of the ground state")->required();
    cmp->add_option("--covariate", covariate, "column to correlate with (e.g. series_index)");
    cmp->add_option("--out", out, "output directory")->required();

    auto* pipe = app.add_subcommand("pipeline", "generate, train, analyze and compare in one run");
    pipe->add_option("--spec", spec, "series spec (JSON)")->required();
    pipe->add_option("--out", out, "parent directory for the run")->required();
    pipe->add_option("--seed", seed, "override series and training seeds");
    pipe->add_option("--run-name", run_name, "run directory name (default <name>-<timestamp>)");
    pipe->add_option("--format", format_name, "csv|json|both");
    pipe->add_option("--threads", threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const ReportFormat format = report_format_from_string(format_name);
        if (threads == 0) throw ValidationError("threads", "must be >= 1");
        if (*gen) return cmd_generate(spec, out, seed);
        if (*trn) return cmd_train(image, out, config_path, training, threads);
        if (*ana) return cmd_analyze(map_path, images, out, format, threads);
        if (*cmp) return cmd_compare(records, ground, covariate, out);
        if (*pipe) return cmd_pipeline(spec, out, seed, run_name, format, threads);
    } catch (const ValidationError& e) {
        std::cerr << "error: invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const StageError& e) {
        std::cerr << "error: pipeline stage " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
