#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "somqe/analysis.hpp"
#include "somqe/error.hpp"
#include "somqe/json_io.hpp"
#include "somqe/series.hpp"

using namespace somqe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("somqe_analysis_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(SOMQE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

AnalysisRecord rec(std::string id, std::size_t index, double qe, double mean) {
    AnalysisRecord r;
    r.image_id = std::move(id);
    r.series_index = index;
    r.som_qe = qe;
    r.rgb_mean_full = mean;
    r.rgb_mean_reported = round_to_decimals(mean, 3);
    return r;
}

constexpr const char* kSmallSpec = R"({"name": "tiny", "kind": "dot_size_sweep", "width": 320, "height": 240,
  "n_dots_per_color": 8, "polarity": "negative", "seed": 4, "training": {"iterations": 2000}})";

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("analyze scores images in input order") {
    SeriesSpec s = SeriesSpec::defaults(SeriesKind::dot_size_sweep);
    s.width = 320;
    s.height = 240;
    s.n_dots_per_color = 8;
    const GeneratedSeries g = gen_series(s);
    TrainingConfig c;
    c.iterations = 2000;
    const SomMap map = train(g.reference, c);

    std::vector<NamedImage> images{{"ref", g.reference}};
    for (std::size_t i = 0; i < g.tests.size(); ++i) images.push_back({"t" + std::to_string(i + 1), g.tests[i]});
    const auto one = analyze(map, images, 1);
    const auto four = analyze(map, images, 4);
    REQUIRE(one.size() == 6);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].image_id == images[i].id);
        CHECK(one[i].series_index == i);
        CHECK(one[i].som_qe == quantization_error(map, images[i].image).qe);
        CHECK(one[i].rgb_mean_full == rgb_mean(images[i].image).mean_full);
        CHECK(one[i].rgb_mean_reported == rgb_mean(images[i].image).mean_reported);
        CHECK(four[i].som_qe == one[i].som_qe);
        if (i > 0) CHECK(one[i].som_qe > one[i - 1].som_qe);
    }
}

TEST_CASE("format_double round-trips") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(gen) * std::pow(10.0, i % 20 - 10);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("CSV and JSON reports carry identical values") {
    const fs::path dir = scratch("parity");
    std::vector<AnalysisRecord> recs;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0, 255);
    for (std::size_t i = 0; i < 12; ++i) recs.push_back(rec("img,\"" + std::to_string(i) + "\"", i, u(gen) / 7, u(gen)));
    recs[3].wall_time_qe_ms = 12.5;
    const Json config{{"seed", 7}};
    write_records_csv(dir / "records.csv", recs, config);
    write_records_json(dir / "records.json", recs, config);
    const RecordTable a = read_records(dir / "records.csv");
    const RecordTable b = read_records(dir / "records.json");
    REQUIRE(a.records.size() == recs.size());
    REQUIRE(b.records.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(a.records[i].image_id == recs[i].image_id);
        CHECK(b.records[i].image_id == recs[i].image_id);
        CHECK(a.records[i].som_qe == recs[i].som_qe);
        CHECK(b.records[i].som_qe == recs[i].som_qe);
        CHECK(a.records[i].rgb_mean_full == b.records[i].rgb_mean_full);
        CHECK(a.records[i].rgb_mean_reported == b.records[i].rgb_mean_reported);
        CHECK(a.records[i].series_index == b.records[i].series_index);
    }
    CHECK(a.config == config);
    CHECK(b.config == config);
    CHECK(slurp(dir / "records.csv").find("12.5") == std::string::npos);
}

TEST_CASE("reading records") {
    const fs::path dir = scratch("read");
    write_text(dir / "extra.csv",
               "image_id,series_index,som_qe,rgb_mean_full,rgb_mean_reported,percent\n"
               "a,0,1.0,10,10,0\nb,1,1.5,10,10,10\nc,2,2.5,10,10,20\n");
    const RecordTable t = read_records(dir / "extra.csv");
    CHECK(t.extra_columns.at("percent") == std::vector<double>{0, 10, 20});

    write_text(dir / "missing.csv", "image_id,som_qe\na,1\n");
    CHECK_THROWS_AS(read_records(dir / "missing.csv"), ValidationError);
    write_text(dir / "ragged.csv", "image_id,series_index,som_qe,rgb_mean_full,rgb_mean_reported\na,0,1\n");
    CHECK_THROWS_AS(read_records(dir / "ragged.csv"), ValidationError);
    write_text(dir / "text.csv", "image_id,series_index,som_qe,rgb_mean_full,rgb_mean_reported\na,0,x,1,1\n");
    CHECK_THROWS_AS(read_records(dir / "text.csv"), ValidationError);
    CHECK_THROWS_AS(read_records(dir / "absent.csv"), ValidationError);
}

TEST_CASE("compare") {
    RecordTable t;
    for (std::size_t i = 0; i < 6; ++i) t.records.push_back(rec("s_" + std::to_string(i), i, 10.0 + 5.0 * i, 150.0));
    t.extra_columns["percent"] = {0, 10, 20, 30, 40, 60};

    SUBCASE("increasing QE is a change, constant RGB mean is degenerate") {
        const auto r = compare(t, "s_0", "series_index");
        CHECK(r.qe.verdict == Verdict::change);
        CHECK(r.qe.t_test.mean_difference > 0);
        CHECK(r.rgb_mean.verdict == Verdict::degenerate);
        CHECK(r.rgb_mean.t_test.p_two_sided == 1.0);
        REQUIRE(r.qe.correlation);
        CHECK(r.qe.correlation->r > 0.9);
        CHECK(r.qe.normality);
        CHECK_FALSE(r.rgb_mean.correlation);
        CHECK_FALSE(r.rgb_mean.covariate_note.empty());
        CHECK(to_json(r).at("verdict") == "change");
    }
    SUBCASE("covariate from an extra column") {
        const auto r = compare(t, "s_0", "percent");
        REQUIRE(r.qe.trend);
        CHECK(r.qe.trend->slope > 0);
        CHECK_THROWS_AS(compare(t, "s_0", "nope"), ValidationError);
    }
    SUBCASE("noise around the ground state is no change") {
        RecordTable n;
        const double qe[] = {5.0, 5.2, 4.8, 5.1, 4.9, 5.05, 4.95};
        for (std::size_t i = 0; i < 7; ++i) n.records.push_back(rec("n" + std::to_string(i), i, qe[i], 100 + i % 2));
        const auto r = compare(n, "n0");
        CHECK(r.qe.verdict == Verdict::no_change);
        CHECK_FALSE(r.qe.correlation);
    }
    SUBCASE("preconditions") {
        RecordTable small;
        small.records = {rec("a", 0, 1, 1), rec("b", 1, 2, 1)};
        CHECK_THROWS_AS(compare(small, "a"), PreconditionError);
        CHECK_THROWS_AS(compare(t, "missing"), ValidationError);
    }
    SUBCASE("Shapiro-Wilk is skipped outside its range") {
        RecordTable big;
        for (std::size_t i = 0; i < 70; ++i) big.records.push_back(rec("b" + std::to_string(i), i, 1.0 + i, 9));
        const auto r = compare(big, "b0");
        CHECK_FALSE(r.qe.normality);
        CHECK_FALSE(r.qe.normality_note.empty());
    }
    SUBCASE("outputs") {
        const fs::path dir = scratch("compare_out");
        const auto r = compare(t, "s_0", "series_index");
        write_compare_outputs(dir, r, t, Json{{"k", 1}});
        for (const char* f : {"report.json", "verdicts.csv", "plot_som_qe.tsv", "plot_rgb_mean.tsv"})
            CHECK(fs::exists(dir / f));
        const Json report = read_json(dir / "report.json");
        CHECK(report.at("config") == Json{{"k", 1}});
        CHECK(report.at("records").size() == 6);
        CHECK(slurp(dir / "plot_som_qe.tsv").rfind("series_index\tsom_qe\n0\t10\n1\t15\n", 0) == 0);
    }
}

TEST_CASE("cli") {
    const fs::path dir = scratch("cli");
    write_text(dir / "spec.json", kSmallSpec);

    SUBCASE("generate writes reference, tests and manifest") {
        REQUIRE(run("generate --spec " + (dir / "spec.json").string() + " --out " + (dir / "gen").string()) == 0);
        for (int i = 0; i <= 5; ++i) CHECK(fs::exists(dir / "gen" / ("tiny_" + std::to_string(i) + ".png")));
        CHECK_FALSE(fs::exists(dir / "gen" / "tiny_6.png"));
        const Json manifest = read_json(dir / "gen" / "tiny_manifest.json");
        CHECK(manifest.dump().find("tiny_5.png") != std::string::npos);
        SeriesSpec s = series_spec_from_json(Json::parse(kSmallSpec));
        CHECK(load_png(dir / "gen" / "tiny_0.png") == gen_reference(s));
    }
    SUBCASE("validation failures exit with 2") {
        write_text(dir / "dup.json", R"({"kind": "dot_size_sweep", "percents": [10, 20, 20]})");
        CHECK(run("generate --spec " + (dir / "dup.json").string() + " --out " + (dir / "x").string()) == 2);
        write_text(dir / "empty.json", "");
        CHECK(run("pipeline --spec " + (dir / "empty.json").string() + " --out " + (dir / "x").string()) == 2);
        CHECK(run("generate --out " + (dir / "x").string()) == 2);
        CHECK(run("frobnicate") == 2);
        CHECK(run("pipeline --spec " + (dir / "spec.json").string() + " --out " + (dir / "x").string() +
                  " --threads 0") == 2);
    }
    SUBCASE("runtime failures exit with 3") {
        CHECK(run("train " + (dir / "nope.png").string() + " --out " + (dir / "m.json").string()) == 3);
    }
    SUBCASE("train, analyze, compare") {
        REQUIRE(run("generate --spec " + (dir / "spec.json").string() + " --out " + (dir / "g").string()) == 0);
        const fs::path map = dir / "map.json";
        REQUIRE(run("train " + (dir / "g" / "tiny_0.png").string() + " --out " + map.string() +
                    " --iterations 1500 --seed 9") == 0);
        const Json m = read_json(map);
        CHECK(m.at("rows") == 4);
        CHECK(m.at("seed") == 9);
        CHECK(m.at("config").at("iterations") == 1500);
        CHECK(m.at("config").at("alpha0") == 0.2);
        CHECK(m.at("config").at("radius0") == 1.2);

        std::string images;
        for (int i = 0; i <= 5; ++i) images += " " + (dir / "g" / ("tiny_" + std::to_string(i) + ".png")).string();
        REQUIRE(run("analyze --map " + map.string() + images + " --out " + (dir / "a").string() + " --threads 3") == 0);
        const RecordTable t = read_records(dir / "a" / "records.csv");
        REQUIRE(t.records.size() == 6);
        CHECK(t.records[0].image_id == "tiny_0");
        for (std::size_t i = 1; i < 6; ++i) CHECK(t.records[i].som_qe > t.records[i - 1].som_qe);
        CHECK(read_records(dir / "a" / "records.json").records[5].som_qe == t.records[5].som_qe);
        CHECK(fs::exists(dir / "a" / "timings.csv"));

        REQUIRE(run("compare --records " + (dir / "a" / "records.csv").string() +
                    " --ground-state tiny_0 --covariate series_index --out " + (dir / "c").string()) == 0);
        CHECK(read_json(dir / "c" / "report.json").at("stats").at("verdict") == "change");
        CHECK(run("compare --records " + (dir / "a" / "records.csv").string() + " --ground-state nope --out " +
                  (dir / "c").string()) == 2);
    }
    SUBCASE("pipeline is deterministic and reproducible from its config") {
        const std::string base = "pipeline --spec " + (dir / "spec.json").string() + " --out " + dir.string();
        REQUIRE(run(base + " --run-name r1") == 0);
        REQUIRE(run(base + " --run-name r2 --threads 2") == 0);
        for (const char* f : {"records.csv", "records.json", "report.json", "verdicts.csv", "map.json", "config.json"}) {
            INFO(f);
            if (std::string(f) == "map.json") {
                Json a = read_json(dir / "r1" / f), b = read_json(dir / "r2" / f);
                a.erase("diagnostics");
                b.erase("diagnostics");
                CHECK(a == b);
            } else {
                CHECK(slurp(dir / "r1" / f) == slurp(dir / "r2" / f));
            }
        }
        // The config echoed into the run reproduces it.
        REQUIRE(run("pipeline --spec " + (dir / "r1" / "config.json").string() + " --out " + dir.string() +
                    " --run-name r3") == 0);
        CHECK(slurp(dir / "r1" / "records.csv") == slurp(dir / "r3" / "records.csv"));
        for (int i = 0; i <= 5; ++i) {
            const std::string f = "tiny_" + std::to_string(i) + ".png";
            CHECK(slurp(dir / "r1" / "images" / f) == slurp(dir / "r3" / "images" / f));
        }
        CHECK(read_json(dir / "r1" / "report.json").at("stats").at("verdict") == "change");
    }
    fs::remove_all(dir.parent_path());
}

}  // TEST_SUITE
