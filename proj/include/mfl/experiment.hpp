// Experiment runner: config validation, dispatch into the statistics
// modules, oracle attachment, and report emission (CSV + JSON mirror).
#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "mfl/averaging.hpp"
#include "mfl/oracles.hpp"

namespace mfl {

struct ExperimentConfig {
    std::string experiment;     // correlate, spectrum-scan, distance, decompose, mrt-verify,
                                // expsum-decay, stationarity, divisibility, ceslog, halasz
    nlohmann::json function;    // family document or builtin id string
    nlohmann::json parameters;  // per-experiment map (validated at dispatch)
    WindowSchedule schedule;
    std::string output_path;
    std::string format = "csv";
    int threads = 0;
    uint64_t seed = 1;

    // Strict parse: unknown keys anywhere in the envelope are rejected with
    // the offending field named.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    // Hash of the semantic content (experiment, function, parameters,
    // schedule, seed); threads and output do not change results.
    uint64_t hash() const;
};

// One series record: ordered fields with a CSV rendering and a JSON value.
struct ReportRecord {
    struct Field {
        std::string key;
        std::string text;       // CSV cell
        nlohmann::json value;   // JSON mirror
    };
    std::vector<Field> fields;

    void add(const std::string& key, double v);
    void add(const std::string& key, int64_t v);
    void add(const std::string& key, const std::string& v);
    void add(const std::string& key, const char* v);  // keeps literals off the bool overload
    void add(const std::string& key, bool v);
    void add_cplx(const std::string& key, cplx v);  // key_re, key_im
};

struct ExperimentReport {
    ExperimentConfig config;
    uint64_t config_hash = 0;
    std::vector<ReportRecord> series;
    std::optional<LimitPrediction> oracle;
    std::optional<double> defect;  // |empirical_final - oracle|; present iff oracle is
    nlohmann::json extras;         // experiment-specific scalars (fitted constants, flags)
    int64_t runtime_ms = 0;
    uint64_t seed = 1;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

ExperimentReport run(const ExperimentConfig& cfg);

// Writes the report atomically (tmp + rename).  format "json" writes one
// file at `path`; format "csv" writes the CSV at `path` plus a full JSON
// mirror alongside it.  Returns the written paths.
std::vector<std::string> report_emit(const ExperimentReport& rep, const std::string& path,
                                     const std::string& format);

// Builds or reuses the SPF cache file under `dir`; validates magic and limit
// on reuse and rebuilds corrupt files.  `note` (when given) receives
// "cache hit" / "cache miss" / "rebuilt after corruption".
std::string cache(int64_t spf_limit, const std::string& dir, std::string* note = nullptr);

}  // namespace mfl
