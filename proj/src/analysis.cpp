#include "somqe/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "somqe/error.hpp"

namespace somqe {

namespace {

const std::vector<std::string> kCoreColumns{"image_id", "series_index", "som_qe", "rgb_mean_full", "rgb_mean_reported"};

AnalysisRecord score(const SomMap& map, const NamedImage& named, std::size_t index, double train_ms) {
    AnalysisRecord rec;
    rec.image_id = named.id;
    rec.series_index = index;
    const auto start = std::chrono::steady_clock::now();
    rec.som_qe = quantization_error(map, named.image).qe;
    rec.wall_time_qe_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const RgbMeanResult mean = rgb_mean(named.image);
    rec.rgb_mean_full = mean.mean_full;
    rec.rgb_mean_reported = mean.mean_reported;
    rec.wall_time_train_ms = train_ms;
    return rec;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& s, const std::string& column) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ValidationError(column, "not a number: '" + s + "'");
    return v;
}

Json record_to_json(const AnalysisRecord& r) {
    return {{"image_id", r.image_id},
            {"series_index", r.series_index},
            {"som_qe", r.som_qe},
            {"rgb_mean_full", r.rgb_mean_full},
            {"rgb_mean_reported", r.rgb_mean_reported}};
}

RecordTable read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open records file");
    RecordTable table;
    std::vector<std::string> header;
    std::string line;
    const std::string config_tag = "# run_config=";
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind(config_tag, 0) == 0) {
            table.config = Json::parse(line.substr(config_tag.size()), nullptr, false);
            continue;
        }
        if (line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = std::move(fields);
            for (const auto& c : kCoreColumns)
                if (std::find(header.begin(), header.end(), c) == header.end())
                    throw ValidationError(c, "missing column in " + path.string());
            continue;
        }
        if (fields.size() != header.size()) throw ValidationError(path.string(), "ragged CSV row: " + line);
        AnalysisRecord r;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto& col = header[i];
            const auto& val = fields[i];
            if (col == "image_id") r.image_id = val;
            else if (col == "series_index") r.series_index = static_cast<std::size_t>(parse_double(val, col));
            else if (col == "som_qe") r.som_qe = parse_double(val, col);
            else if (col == "rgb_mean_full") r.rgb_mean_full = parse_double(val, col);
            else if (col == "rgb_mean_reported") r.rgb_mean_reported = parse_double(val, col);
            else table.extra_columns[col].push_back(parse_double(val, col));
        }
        table.records.push_back(std::move(r));
    }
    return table;
}

RecordTable read_records_json(const std::filesystem::path& path) {
    const Json j = read_json(path);
    RecordTable table;
    if (j.contains("config")) table.config = j.at("config");
    try {
        for (const auto& item : j.at("records")) {
            AnalysisRecord r;
            r.image_id = item.at("image_id").get<std::string>();
            r.series_index = item.at("series_index").get<std::size_t>();
            r.som_qe = item.at("som_qe").get<double>();
            r.rgb_mean_full = item.at("rgb_mean_full").get<double>();
            r.rgb_mean_reported = item.at("rgb_mean_reported").get<double>();
            for (const auto& [k, v] : item.items())
                if (std::find(kCoreColumns.begin(), kCoreColumns.end(), k) == kCoreColumns.end() && v.is_number())
                    table.extra_columns[k].push_back(v.get<double>());
            table.records.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string(), e.what());
    }
    return table;
}

MetricComparison compare_metric(const std::string& name, const std::vector<double>& values, double ground,
                                const std::vector<double>* covariate) {
    MetricComparison m;
    m.metric = name;
    m.ground_state_value = ground;
    m.t_test = stats::one_sample_t(values, ground);
    m.verdict = verdict_for(m.t_test);
    if (values.size() >= stats::kShapiroMinN && values.size() <= stats::kShapiroMaxN)
        m.normality = stats::shapiro_wilk(values);
    else
        m.normality_note = "n = " + std::to_string(values.size()) + " outside the Shapiro-Wilk range [3, 50]";
    if (covariate) {
        try {
            m.correlation = stats::pearson(*covariate, values);
        } catch (const PreconditionError& e) {
            m.covariate_note = e.what();
        }
        try {
            m.trend = stats::linear_trend(*covariate, values);
        } catch (const PreconditionError& e) {
            if (m.covariate_note.empty()) m.covariate_note = e.what();
        }
    }
    return m;
}

Json to_json(const stats::TTestResult& t) {
    Json j{{"df", t.df},
           {"mean_difference", t.mean_difference},
           {"p_two_sided", t.p_two_sided},
           {"ci95", {t.ci95.first, t.ci95.second}},
           {"significant_at_05", t.significant_at_05},
           {"degenerate", t.degenerate}};
    j["t_stat"] = t.degenerate ? Json(nullptr) : Json(t.t_stat);
    return j;
}

Json to_json(const MetricComparison& m) {
    Json j{{"metric", m.metric}, {"ground_state_value", m.ground_state_value}, {"t_test", to_json(m.t_test)},
           {"verdict", std::string(to_string(m.verdict))}};
    if (m.normality)
        j["normality"] = {{"test", "shapiro_wilk"},
                          {"w", m.normality->w},
                          {"p_value", m.normality->p_value},
                          {"degenerate", m.normality->degenerate}};
    else
        j["normality"] = {{"skipped", m.normality_note}};
    if (m.correlation) j["pearson"] = {{"r", m.correlation->r}, {"p_value", m.correlation->p_value}, {"n", m.correlation->n}};
    if (m.trend)
        j["linear_trend"] = {{"slope", m.trend->slope}, {"intercept", m.trend->intercept}, {"r_squared", m.trend->r_squared}};
    if (!m.covariate_note.empty()) j["covariate_note"] = m.covariate_note;
    return j;
}

void write_plot(const std::filesystem::path& path, const std::string& y_name, std::span<const AnalysisRecord> records,
                double AnalysisRecord::*field) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "series_index\t" << y_name << '\n';
    for (const auto& r : records) out << r.series_index << '\t' << format_double(r.*field) << '\n';
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<AnalysisRecord> analyze(const SomMap& map, std::span<const NamedImage> images, unsigned threads,
                                    double train_ms) {
    std::vector<AnalysisRecord> records(images.size());
    parallel_for(images.size(), threads, [&](std::size_t i) { records[i] = score(map, images[i], i, train_ms); });
    return records;
}

std::vector<AnalysisRecord> analyze_files(const SomMap& map, const std::vector<std::filesystem::path>& files,
                                          unsigned threads, double train_ms) {
    std::vector<AnalysisRecord> records(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        const NamedImage named{files[i].stem().string(), load_png(files[i])};
        records[i] = score(map, named, i, train_ms);
    });
    return records;
}

void write_records_csv(const std::filesystem::path& path, std::span<const AnalysisRecord> records, const Json& config) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    if (!config.is_null()) out << "# run_config=" << config.dump() << '\n';
    out << "image_id,series_index,som_qe,rgb_mean_full,rgb_mean_reported\n";
    for (const auto& r : records)
        out << csv_field(r.image_id) << ',' << r.series_index << ',' << format_double(r.som_qe) << ','
            << format_double(r.rgb_mean_full) << ',' << format_double(r.rgb_mean_reported) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

void write_records_json(const std::filesystem::path& path, std::span<const AnalysisRecord> records, const Json& config) {
    Json list = Json::array();
    for (const auto& r : records) list.push_back(record_to_json(r));
    write_json(path, {{"config", config}, {"records", list}});
}

void write_timings_csv(const std::filesystem::path& path, std::span<const AnalysisRecord> records) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "image_id,wall_time_train_ms,wall_time_qe_ms\n";
    for (const auto& r : records)
        out << csv_field(r.image_id) << ',' << format_double(r.wall_time_train_ms) << ','
            << format_double(r.wall_time_qe_ms) << '\n';
}

RecordTable read_records(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw ValidationError(path.string(), "no such records file");
    if (path.extension() == ".json") return read_records_json(path);
    return read_records_csv(path);
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::change: return "change";
        case Verdict::no_change: return "no-change";
        case Verdict::degenerate: return "degenerate";
    }
    return "?";
}

Verdict verdict_for(const stats::TTestResult& t) {
    if (t.degenerate) return Verdict::degenerate;
    return t.significant_at_05 ? Verdict::change : Verdict::no_change;
}

CompareReport compare(const RecordTable& table, const std::string& ground_state_id, const std::string& covariate) {
    const auto& recs = table.records;
    if (recs.size() < 3)
        throw PreconditionError("compare needs at least 3 records including the ground state, got " +
                                std::to_string(recs.size()));
    const auto ground = std::find_if(recs.begin(), recs.end(), [&](const auto& r) { return r.image_id == ground_state_id; });
    if (ground == recs.end()) throw ValidationError("ground-state", "no record with image_id '" + ground_state_id + "'");

    std::vector<double> qe, mean, cov;
    for (const auto& r : recs) {
        qe.push_back(r.som_qe);
        mean.push_back(r.rgb_mean_full);
    }
    const std::vector<double>* cov_ptr = nullptr;
    if (!covariate.empty()) {
        if (covariate == "series_index") {
            for (const auto& r : recs) cov.push_back(static_cast<double>(r.series_index));
        } else {
            const auto it = table.extra_columns.find(covariate);
            if (it == table.extra_columns.end()) throw ValidationError("covariate", "no column named '" + covariate + "'");
            cov = it->second;
        }
        cov_ptr = &cov;
    }

    CompareReport report;
    report.ground_state_id = ground_state_id;
    report.covariate = covariate;
    report.n_records = recs.size();
    report.qe = compare_metric("som_qe", qe, ground->som_qe, cov_ptr);
    report.rgb_mean = compare_metric("rgb_mean", mean, ground->rgb_mean_full, cov_ptr);
    return report;
}

Json to_json(const CompareReport& report) {
    Json j{{"ground_state_id", report.ground_state_id},
           {"n_records", report.n_records},
           {"metrics", {to_json(report.qe), to_json(report.rgb_mean)}},
           {"verdict", std::string(to_string(report.qe.verdict))}};
    if (!report.covariate.empty()) j["covariate"] = report.covariate;
    return j;
}

void write_compare_outputs(const std::filesystem::path& dir, const CompareReport& report, const RecordTable& table,
                           const Json& config) {
    std::filesystem::create_directories(dir);
    Json records = Json::array();
    for (const auto& r : table.records) records.push_back(record_to_json(r));
    write_json(dir / "report.json", {{"config", config}, {"records", records}, {"stats", to_json(report)}});

    std::ofstream out(dir / "verdicts.csv");
    if (!out) throw Error("cannot write " + (dir / "verdicts.csv").string());
    out << "metric,ground_state_value,n,mean_difference,t_stat,df,p_two_sided,ci95_low,ci95_high,degenerate,"
           "significant_at_05,normality_w,normality_p,verdict\n";
    for (const MetricComparison* m : {&report.qe, &report.rgb_mean}) {
        const auto& t = m->t_test;
        out << m->metric << ',' << format_double(m->ground_state_value) << ',' << report.n_records << ','
            << format_double(t.mean_difference) << ',' << (t.degenerate ? "" : format_double(t.t_stat)) << ',' << t.df
            << ',' << format_double(t.p_two_sided) << ',' << format_double(t.ci95.first) << ','
            << format_double(t.ci95.second) << ',' << (t.degenerate ? "true" : "false") << ','
            << (t.significant_at_05 ? "true" : "false") << ','
            << (m->normality ? format_double(m->normality->w) : "") << ','
            << (m->normality ? format_double(m->normality->p_value) : "") << ',' << to_string(m->verdict) << '\n';
    }
    write_plot(dir / "plot_som_qe.tsv", "som_qe", table.records, &AnalysisRecord::som_qe);
    write_plot(dir / "plot_rgb_mean.tsv", "rgb_mean", table.records, &AnalysisRecord::rgb_mean_full);
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "both") return ReportFormat::both;
    throw ValidationError("format", "expected csv|json|both");
}

bool wants_csv(ReportFormat f) { return f != ReportFormat::json; }
bool wants_json(ReportFormat f) { return f != ReportFormat::csv; }

}  // namespace somqe
