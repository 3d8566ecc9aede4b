#include <chrono>

#include "somqe/analysis.hpp"
#include "somqe/error.hpp"

namespace somqe {

namespace {

std::string image_id(const SeriesSpec& spec, std::size_t index) { return spec.name + "_" + std::to_string(index); }

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

GenerateResult write_series(const SeriesSpec& spec, const GeneratedSeries& series, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    GenerateResult result;
    std::vector<std::string> names;
    auto emit = [&](const RasterImage& image, std::size_t index) {
        const std::string file = image_id(spec, index) + ".png";
        save_png(image, dir / file);
        result.files.push_back(dir / file);
        names.push_back(file);
    };
    emit(series.reference, 0);
    for (std::size_t i = 0; i < series.tests.size(); ++i) emit(series.tests[i], i + 1);
    result.manifest = dir / (spec.name + "_manifest.json");
    write_json(result.manifest, manifest_to_json(spec, series, names));
    return result;
}

PipelineResult run_pipeline(const SpecDocument& doc, const PipelineOptions& options) {
    const SeriesSpec& spec = doc.series;
    const Json config = to_json(doc);
    std::filesystem::create_directories(options.run_dir);
    write_json(options.run_dir / "config.json", config);

    const GeneratedSeries series = stage("generate", [&] {
        GeneratedSeries s = gen_series(spec);
        write_series(spec, s, options.run_dir / "images");
        return s;
    });

    PipelineResult result;
    const SomMap map = stage("train", [&] {
        const auto start = std::chrono::steady_clock::now();
        SomMap m = train(series.reference, doc.training);
        result.train_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        write_json(options.run_dir / "map.json",
                   to_json(MapDocument{m, doc.training, quantization_error(m, series.reference, options.threads)}));
        return m;
    });

    RecordTable table = stage("analyze", [&] {
        std::vector<NamedImage> images;
        images.push_back({image_id(spec, 0), series.reference});
        for (std::size_t i = 0; i < series.tests.size(); ++i) images.push_back({image_id(spec, i + 1), series.tests[i]});
        RecordTable t;
        t.records = analyze(map, images, options.threads, result.train_ms);
        t.config = config;
        if (wants_csv(options.format)) write_records_csv(options.run_dir / "records.csv", t.records, config);
        if (wants_json(options.format)) write_records_json(options.run_dir / "records.json", t.records, config);
        write_timings_csv(options.run_dir / "timings.csv", t.records);
        return t;
    });
    result.records = table.records;

    result.report = stage("compare", [&] {
        CompareReport r = compare(table, image_id(spec, 0), "series_index");
        write_compare_outputs(options.run_dir, r, table, config);
        return r;
    });
    return result;
}

}  // namespace somqe
