#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "mfl/experiment.hpp"
#include "mfl/expsum.hpp"
#include "mfl/families.hpp"
#include "mfl/spectral.hpp"

using namespace mfl;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

json correlate_doc() {
    return json{
        {"experiment", "correlate"},
        {"function", "iii"},
        {"parameters",
         {{"query", {{"shifts", {0, 1}}, {"exponents", {1, 1}}, {"mode", "cesaro"}}}}},
        {"schedule", {{"type", "explicit"}, {"windows", {10000, 30000}}}},
    };
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

bool message_mentions(const std::exception& e, const std::string& needle) {
    return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("configs round-trip through JSON with a stable semantic hash") {
    auto cfg = ExperimentConfig::from_json(correlate_doc());
    CHECK(cfg.experiment == "correlate");
    CHECK(cfg.schedule.windows == std::vector<int64_t>{10000, 30000});
    CHECK(cfg.threads == 0);
    CHECK(cfg.seed == 1);

    auto back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.hash() == cfg.hash());

    // threads and output never affect the hash; the semantic fields do
    auto doc2 = correlate_doc();
    doc2["threads"] = 7;
    doc2["output"] = {{"path", "x.csv"}, {"format", "csv"}};
    CHECK(ExperimentConfig::from_json(doc2).hash() == cfg.hash());
    auto doc3 = correlate_doc();
    doc3["seed"] = 99;
    CHECK(ExperimentConfig::from_json(doc3).hash() != cfg.hash());
    auto doc4 = correlate_doc();
    doc4["parameters"]["query"]["shifts"] = {0, 2};
    CHECK(ExperimentConfig::from_json(doc4).hash() != cfg.hash());

    json geo = {{"experiment", "ceslog"},
                {"function", "one"},
                {"schedule", {{"type", "geometric"}, {"first", 10}, {"last", 1000}, {"ratio", 10.0}}}};
    auto gcfg = ExperimentConfig::from_json(geo);
    CHECK(gcfg.schedule.windows == std::vector<int64_t>{10, 100, 1000});
    CHECK(ExperimentConfig::from_json(gcfg.to_json()).to_json() == gcfg.to_json());
}

TEST_CASE("strict parsing names the offending field") {
    auto expect_reject = [](json doc, const std::string& needle) {
        try {
            ExperimentConfig::from_json(doc);
            FAIL_CHECK("expected a config_error mentioning " << needle);
        } catch (const config_error& e) {
            CHECK(message_mentions(e, needle));
        }
    };
    auto doc = correlate_doc();
    doc["bogus"] = 1;
    expect_reject(doc, "bogus");

    doc = correlate_doc();
    doc["schedule"]["foo"] = 2;
    expect_reject(doc, "foo");

    doc = correlate_doc();
    doc["schedule"] = {{"type", "geometric"}, {"first", 10}, {"last", 100}};
    expect_reject(doc, "ratio");

    doc = correlate_doc();
    doc["output"] = {{"path", "x"}, {"mode", "fast"}};
    expect_reject(doc, "mode");

    doc = correlate_doc();
    doc["output"] = {{"path", "x"}, {"format", "xml"}};
    expect_reject(doc, "format");

    doc = correlate_doc();
    doc["experiment"] = "frobnicate";
    expect_reject(doc, "frobnicate");

    doc = correlate_doc();
    doc["parameters"]["quer"] = 1;
    try {
        run(ExperimentConfig::from_json(doc));
        FAIL_CHECK("expected a config_error mentioning quer");
    } catch (const config_error& e) {
        CHECK(message_mentions(e, "quer"));
    }
}

TEST_CASE("correlation runs attach the scale-schedule oracle") {
    json doc = {{"experiment", "correlate"},
                {"function", "mrt-phase"},
                {"parameters",
                 {{"query",
                   {{"shifts", {0, 1}}, {"exponents", {1, -1}}, {"mode", "logarithmic"}}}}},
                {"schedule",
                 {{"type", "power-of-scale"}, {"power", 2.0}, {"scales", {31, 100, 316, 1000}}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() == 4);
    CHECK(rep.series[0].fields[0].key == "scale");
    CHECK(rep.series[0].fields[1].key == "N");
    REQUIRE(rep.oracle.has_value());
    CHECK(rep.oracle->kind == LimitPrediction::Kind::exact_scalar);
    CHECK(rep.oracle->scalar == cplx(0.5, 0.0));
    REQUIRE(rep.defect.has_value());
    CHECK(*rep.defect < 0.25);

    // same schedule read against the Cesaro weights: windows shorter than the
    // scale, vanishing product moment, so the predicted limit is plain zero
    json doc2 = {{"experiment", "correlate"},
                 {"function", "mrt-phase"},
                 {"parameters",
                  {{"query", {{"shifts", {0, 1}}, {"exponents", {1, -1}}, {"mode", "cesaro"}}}}},
                 {"schedule",
                  {{"type", "power-of-scale"}, {"power", 0.5}, {"scales", {100000000}}}}};
    auto rep2 = run(ExperimentConfig::from_json(doc2));
    REQUIRE(rep2.series.size() == 1);
    REQUIRE(rep2.oracle.has_value());
    CHECK(rep2.oracle->kind == LimitPrediction::Kind::exact_scalar);
    CHECK(rep2.oracle->scalar == cplx(0.0, 0.0));
    CHECK(*rep2.defect < 0.5);
}

TEST_CASE("explicit numeric oracles win over schedule shapes") {
    auto doc = correlate_doc();
    doc["parameters"]["oracle"] = -1.0 / 3.0;
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.oracle.has_value());
    REQUIRE(rep.defect.has_value());
    CHECK(*rep.defect < 1e-12);  // the period-3 pair correlation is exactly -1/3

    doc["parameters"]["oracle"] = {{"re", -1.0 / 3.0}, {"im", 0.0}};
    auto rep2 = run(ExperimentConfig::from_json(doc));
    CHECK(*rep2.defect == *rep.defect);

    doc["parameters"]["oracle"] = "one third";
    CHECK_THROWS_AS(run(ExperimentConfig::from_json(doc)), config_error);
}

TEST_CASE("table-backed runs record the multiplicativity spot check") {
    auto rep = run(ExperimentConfig::from_json(correlate_doc()));
    REQUIRE(rep.series.size() == 2);
    REQUIRE(rep.extras.contains("mult_check_defect"));
    CHECK(rep.extras["mult_check_defect"].get<double>() == 0.0);
    CHECK(!rep.oracle.has_value());
    CHECK(!rep.defect.has_value());
}

TEST_CASE("distance runs tabulate the partial prime sums") {
    json doc = {{"experiment", "distance"},
                {"function", json{{"builtin", "vi"}}},
                {"parameters", {{"P", 10000}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() >= 4);
    CHECK(rep.series[0].fields[0].key == "P");
    CHECK(rep.series[0].fields[1].key == "dist_sq");
    double prev = -1.0;
    for (const auto& r : rep.series) {
        double v = r.fields[1].value.get<double>();
        CHECK(v >= prev);  // partial sums of nonnegative prime terms
        prev = v;
    }
    CHECK(rep.series.back().fields[0].value.get<int64_t>() == 10000);
    CHECK(!rep.oracle.has_value());
}

TEST_CASE("runs are reproducible byte for byte across thread counts") {
    json doc = {{"experiment", "correlate"},
                {"function", "vi"},
                {"parameters",
                 {{"query", {{"shifts", {0, 1}}, {"exponents", {1, 1}}, {"mode", "cesaro"}}}}},
                {"schedule", {{"type", "explicit"}, {"windows", {10000, 100000}}}}};
    auto cfg1 = ExperimentConfig::from_json(doc);
    cfg1.threads = 1;
    auto cfg3 = ExperimentConfig::from_json(doc);
    cfg3.threads = 3;
    CHECK(run(cfg1).to_csv() == run(cfg3).to_csv());
}

TEST_CASE("reports land on disk as CSV plus a JSON mirror") {
    fs::remove_all("emit-test-dir");
    fs::create_directories("emit-test-dir");
    auto rep = run(ExperimentConfig::from_json(correlate_doc()));

    auto paths = report_emit(rep, "emit-test-dir/out.csv", "csv");
    REQUIRE(paths.size() == 2);
    CHECK(paths[0] == "emit-test-dir/out.csv");
    CHECK(paths[1] == "emit-test-dir/out.json");

    std::string csv = slurp(paths[0]);
    CHECK(csv == rep.to_csv());
    CHECK(csv.rfind("# schema-version,1\n", 0) == 0);
    int data_rows = 0;
    bool seen_header = false;
    for (size_t pos = 0; pos < csv.size();) {
        size_t end = csv.find('\n', pos);
        std::string line = csv.substr(pos, end - pos);
        if (!line.empty() && line[0] != '#') {
            if (!seen_header)
                seen_header = true;
            else
                ++data_rows;
        }
        pos = end + 1;
    }
    CHECK(data_rows == static_cast<int>(rep.series.size()));

    json mirror = json::parse(slurp(paths[1]));
    CHECK(mirror["schema_version"] == 1);
    REQUIRE(mirror["series"].is_array());
    CHECK(mirror["series"].size() == rep.series.size());
    CHECK(mirror["series"][0]["N"].get<int64_t>() == 10000);
    // the embedded config reparses to the same semantics
    auto back = ExperimentConfig::from_json(mirror["config"]);
    CHECK(back.hash() == rep.config_hash);

    auto jpaths = report_emit(rep, "emit-test-dir/solo.json", "json");
    REQUIRE(jpaths.size() == 1);
    CHECK(json::parse(slurp(jpaths[0]))["config_hash"] == mirror["config_hash"]);

    CHECK_THROWS_AS(report_emit(rep, "emit-test-dir/x.csv", "yaml"), config_error);
    CHECK_THROWS_AS(report_emit(rep, "", "csv"), config_error);
    CHECK_THROWS_AS(report_emit(rep, "no-such-dir-xyz/out.csv", "csv"), io_error);
    fs::remove_all("emit-test-dir");
}

TEST_CASE("the sieve cache is reused, validated and rebuilt") {
    fs::remove_all("cache-test-dir");
    std::string note;
    std::string path = cache(100000, "cache-test-dir", &note);
    CHECK(note == "cache miss");
    CHECK(fs::file_size(path) == 6 + 8 + 4 * 99999);

    cache(100000, "cache-test-dir", &note);
    CHECK(note == "cache hit");

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXX", 3);
    }
    cache(100000, "cache-test-dir", &note);
    CHECK(note == "rebuilt after corruption");
    cache(100000, "cache-test-dir", &note);
    CHECK(note == "cache hit");

    CHECK_THROWS_AS(cache(2, "cache-test-dir"), config_error);
    CHECK_THROWS_AS(cache(kSpfCapacity + 1, "cache-test-dir"), capacity_error);
    fs::remove_all("cache-test-dir");
}

TEST_CASE("value tables past the sieve capacity are refused up front") {
    json doc = {{"experiment", "correlate"},
                {"function", "vi"},
                {"parameters", {{"query", {{"shifts", {0}}, {"exponents", {1}}}}}},
                {"schedule", {{"type", "explicit"}, {"windows", {300000000}}}}};
    CHECK_THROWS_AS(run(ExperimentConfig::from_json(doc)), capacity_error);
}

TEST_CASE("assembly verification reports per-block defects") {
    json doc = {{"experiment", "mrt-verify"},
                {"parameters", {{"t", {1, 100, 100000000}}, {"s", {1, 5, 1555}}, {"delta", 0.3}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() == 2);  // one row per block between consecutive scales
    CHECK(rep.series[0].fields[0].key == "block");
    CHECK(rep.series[0].fields[2].value.get<double>() == 0.0);  // first block has no prior

    MRTScaleData sd;
    sd.t = {1, 100, 100000000};
    sd.s = {1, 5, 1555};
    sd.delta = 0.3;
    auto defects = mrt_assembly_verify(sd);
    double worst = 0.0;
    for (size_t m = 0; m < defects.size(); ++m) {
        CHECK(rep.series[m].fields[2].value.get<double>() == defects[m]);
        worst = std::max(worst, defects[m]);
    }
    CHECK(rep.extras["max_defect"].get<double>() == worst);

    json bad = doc;
    bad["parameters"]["t"] = {100, 1, 100000000};
    CHECK_THROWS_AS(run(ExperimentConfig::from_json(bad)), config_error);
}

TEST_CASE("decay runs mirror the library report and attach the zero oracle") {
    json doc = {{"experiment", "expsum-decay"},
                {"parameters", {{"g", {{"c0", 1.0}}}, {"c", 0.5}, {"q", 2}, {"mode", "cesaro"}}},
                {"schedule",
                 {{"type", "power-of-scale"}, {"power", 0.5}, {"scales", {100000}}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() == 1);

    auto direct = decay_experiment(LogPolyPhase{1.0, {}}, {{1e5, 316}}, 0.5,
                                   AveragingMode::cesaro, 2);
    CHECK(rep.series[0].fields[4].key == "abs_empirical");
    CHECK(rep.series[0].fields[4].value.get<double>() == direct.rows[0].abs_empirical);
    CHECK(rep.extras["C3"].get<double>() == direct.C3);
    CHECK(rep.extras["i0"].get<int64_t>() == 0);
    CHECK(rep.extras["growth_window_ok"].get<bool>());
    REQUIRE(rep.oracle.has_value());
    CHECK(rep.oracle->scalar == cplx(0.0, 0.0));
    CHECK(*rep.defect == direct.rows.back().abs_empirical);

    json bad = doc;
    bad["schedule"] = {{"type", "explicit"}, {"windows", {100}}};
    CHECK_THROWS_AS(run(ExperimentConfig::from_json(bad)), config_error);
}

TEST_CASE("stationarity runs match the direct probe") {
    json doc = {{"experiment", "stationarity"},
                {"function", "iii"},
                {"parameters",
                 {{"query", {{"shifts", {0, 1}}, {"exponents", {1, 1}}, {"mode", "cesaro"}}},
                  {"r", 3}}},
                {"schedule", {{"type", "explicit"}, {"windows", {30000}}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() == 1);
    double defect = rep.series[0].fields[1].value.get<double>();
    CHECK(std::abs(defect - 4.0 / 3.0) < 1e-12);

    auto spf = build_spf(30003);
    auto table = evaluate_range(example_family(FamilyId::iii), 30003, spf);
    CorrelationQuery q{{0, 1}, {1, 1}, AveragingMode::cesaro};
    CHECK(defect == stationarity_defect(Sequence(table), q, 3, 30000));
}

TEST_CASE("spectrum runs expose probe trends and ranked scans") {
    json probe_doc = {{"experiment", "spectrum-scan"},
                      {"function", "iii"},
                      {"parameters",
                       {{"alpha_num", 1},
                        {"alpha_den", 3},
                        {"queries", json::array({{{"shifts", {0}}, {"exponents", {1}}}})}}},
                      {"schedule", {{"type", "explicit"}, {"windows", {3002, 30002}}}}};
    auto rep = run(ExperimentConfig::from_json(probe_doc));
    REQUIRE(rep.series.size() == 2);
    CHECK(rep.extras["lights_up"].get<bool>());
    CHECK(std::abs(rep.series[1].fields[2].value.get<double>() - 2.0 / 3.0) < 1e-3);

    json scan_doc = {{"experiment", "spectrum-scan"},
                     {"function", "iii"},
                     {"parameters",
                      {{"Q_max", 3},
                       {"queries", json::array({{{"shifts", {0}}, {"exponents", {1}}}})}}},
                     {"schedule", {{"type", "explicit"}, {"windows", {30000}}}}};
    auto scan = run(ExperimentConfig::from_json(scan_doc));
    REQUIRE(scan.series.size() == 4);
    CHECK(scan.series[0].fields[2].key == "alpha_den");
    CHECK(scan.series[0].fields[2].value.get<int64_t>() == 3);
    CHECK(scan.series[0].fields[3].value.get<double>() > 0.6);
    CHECK(scan.series[3].fields[3].value.get<double>() < 0.01);
}

TEST_CASE("divisibility runs rank the dilated probes") {
    json doc = {{"experiment", "divisibility"},
                {"function", "iii"},
                {"parameters",
                 {{"alpha", 1.0 / 3.0},
                  {"r", 2},
                  {"queries", json::array({{{"shifts", {0}}, {"exponents", {1}}}})}}},
                {"schedule", {{"type", "explicit"}, {"windows", {30000}}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() == 2);
    CHECK(rep.series[0].fields[3].value.get<double>() > 0.5);
    CHECK(rep.series[1].fields[3].value.get<double>() < 0.01);
}

TEST_CASE("mode-agreement and drift runs wrap the spectral probes") {
    json ces_doc = {{"experiment", "ceslog"},
                    {"function", json{{"builtin", "mrt-phase"}, {"params", {{"s", 1000}}}}},
                    {"parameters",
                     {{"queries", json::array({{{"shifts", {0}}, {"exponents", {1}}}})}}},
                    {"schedule", {{"type", "explicit"}, {"windows", {10000}}}}};
    auto rep = run(ExperimentConfig::from_json(ces_doc));
    REQUIRE(rep.series.size() == 1);
    std::vector<CorrelationQuery> qs = {CorrelationQuery{{0}, {1}, AveragingMode::cesaro}};
    Sequence a(mrt_phase_spec(1000));
    CHECK(rep.series[0].fields[1].value.get<double>() == ceslog_agreement(a, qs, 10000));

    json hal_doc = {{"experiment", "halasz"},
                    {"function", json{{"builtin", "archimedean"}, {"params", {{"t", 1.0}}}}},
                    {"parameters", {{"t", 1.0}}},
                    {"schedule", {{"type", "explicit"}, {"windows", {10000, 100000}}}}};
    auto hal = run(ExperimentConfig::from_json(hal_doc));
    REQUIRE(hal.series.size() == 2);
    auto pts = halasz_drift(Sequence(ArchimedeanSpec{1.0}.spec()), 1.0,
                            WindowSchedule::explicit_windows({10000, 100000}));
    CHECK(hal.series[1].fields[3].value.get<double>() == pts[1].modulus);
    CHECK(std::abs(pts[1].residual - cplx(0.5, -0.5)) < 5e-3);
}

TEST_CASE("decomposition runs surface the split documents") {
    json doc = {{"experiment", "decompose"},
                {"function", json{{"builtin", "vi"}}},
                {"parameters", {{"eps", 1e-4}, {"P_max", 100000}}}};
    auto rep = run(ExperimentConfig::from_json(doc));
    REQUIRE(rep.series.size() == 1);
    CHECK(rep.series[0].fields[0].key == "P_eps");
    CHECK(rep.series[0].fields[1].value.get<double>() <= 1e-4);
    CHECK(rep.extras.contains("f1"));
    CHECK(rep.extras.contains("f2"));
    // the emitted split reparses into usable specs
    CHECK_NOTHROW(spec_from_json(rep.extras["f1"]));
    CHECK_NOTHROW(spec_from_json(rep.extras["f2"]));
}

TEST_CASE("experiments without windows are rejected in one place") {
    json doc = {{"experiment", "correlate"}, {"function", "one"}};
    CHECK_THROWS_AS(run(ExperimentConfig::from_json(doc)), config_error);
}
