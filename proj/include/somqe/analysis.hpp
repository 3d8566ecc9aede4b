#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "somqe/error.hpp"
#include "somqe/image.hpp"
#include "somqe/json_io.hpp"
#include "somqe/som.hpp"
#include "somqe/stats.hpp"

namespace somqe {

struct AnalysisRecord {
    std::string image_id;
    std::size_t series_index = 0;
    double som_qe = 0.0;
    double rgb_mean_full = 0.0;
    double rgb_mean_reported = 0.0;
    double wall_time_train_ms = 0.0;
    double wall_time_qe_ms = 0.0;
};

struct NamedImage {
    std::string id;
    RasterImage image;
};

/// Scores each image against the frozen map. Images may be scored on up to
/// `threads` workers; records come back in input order.
std::vector<AnalysisRecord> analyze(const SomMap& map, std::span<const NamedImage> images, unsigned threads = 1,
                                    double train_ms = 0.0);

/// Loads and scores PNG files; ids are the file stems.
std::vector<AnalysisRecord> analyze_files(const SomMap& map, const std::vector<std::filesystem::path>& files,
                                          unsigned threads = 1, double train_ms = 0.0);

/// Records plus any extra numeric columns found in a report (covariates).
struct RecordTable {
    std::vector<AnalysisRecord> records;
    std::map<std::string, std::vector<double>> extra_columns;
    Json config;  // embedded run config echo, if any
};

// Deterministic report files: timings are excluded (see write_timings_csv).
void write_records_csv(const std::filesystem::path& path, std::span<const AnalysisRecord> records, const Json& config);
void write_records_json(const std::filesystem::path& path, std::span<const AnalysisRecord> records, const Json& config);
void write_timings_csv(const std::filesystem::path& path, std::span<const AnalysisRecord> records);
RecordTable read_records(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

enum class Verdict { change, no_change, degenerate };
std::string_view to_string(Verdict v);

/// Verdict rule: change iff the t-test is non-degenerate and p < 0.05.
Verdict verdict_for(const stats::TTestResult& t);

struct MetricComparison {
    std::string metric;  // "som_qe" or "rgb_mean"
    double ground_state_value = 0.0;
    stats::TTestResult t_test;
    std::optional<stats::ShapiroWilkResult> normality;
    std::string normality_note;  // why normality was skipped, if it was
    std::optional<stats::CorrelationResult> correlation;
    std::optional<stats::TrendResult> trend;
    std::string covariate_note;
    Verdict verdict = Verdict::no_change;
};

struct CompareReport {
    std::string ground_state_id;
    std::string covariate;  // empty when none
    std::size_t n_records = 0;
    MetricComparison qe;
    MetricComparison rgb_mean;
};

/// One-sample t of every record's value (ground state included) against the
/// ground state's value, for SOM-QE and RGB Mean. With a covariate column,
/// also Pearson and a linear trend of each metric on it.
CompareReport compare(const RecordTable& table, const std::string& ground_state_id,
                      const std::string& covariate = {});

Json to_json(const CompareReport& report);

/// report.json, verdicts.csv, plot_som_qe.tsv and plot_rgb_mean.tsv under `dir`.
void write_compare_outputs(const std::filesystem::path& dir, const CompareReport& report, const RecordTable& table,
                           const Json& config);

enum class ReportFormat { csv, json, both };
ReportFormat report_format_from_string(std::string_view s);
bool wants_csv(ReportFormat f);
bool wants_json(ReportFormat f);

/// A failure inside one pipeline stage; what() starts with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct GenerateResult {
    std::vector<std::filesystem::path> files;  // reference first
    std::filesystem::path manifest;
};

/// Writes <name>_<index>.png for every image plus <name>_manifest.json.
GenerateResult write_series(const SeriesSpec& spec, const GeneratedSeries& series, const std::filesystem::path& dir);

struct PipelineOptions {
    std::filesystem::path run_dir;
    ReportFormat format = ReportFormat::both;
    unsigned threads = 1;
};

struct PipelineResult {
    std::vector<AnalysisRecord> records;
    CompareReport report;
    double train_ms = 0.0;
};

/// generate -> train on the reference -> analyze every image -> compare
/// against the reference. Everything is written below options.run_dir.
PipelineResult run_pipeline(const SpecDocument& doc, const PipelineOptions& options);

}  // namespace somqe
