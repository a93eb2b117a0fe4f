#include "mfl/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "mfl/expsum.hpp"
#include "mfl/families.hpp"
#include "mfl/pretentious.hpp"
#include "mfl/spectral.hpp"

namespace mfl {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& where, const std::string& what) {
    throw config_error(where + ": " + what);
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) bad_field(where, "unknown key '" + it.key() + "'");
    }
}

template <class T>
T get_field(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) bad_field(where, "missing key '" + std::string(key) + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad_field(where, "key '" + std::string(key) + "' has the wrong type");
    }
}

template <class T>
T get_field_or(const json& j, const std::string& where, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad_field(where, "key '" + std::string(key) + "' has the wrong type");
    }
}

AveragingMode mode_from_string(const std::string& s, const std::string& where) {
    if (s == "cesaro") return AveragingMode::cesaro;
    if (s == "logarithmic" || s == "log") return AveragingMode::logarithmic;
    bad_field(where, "mode must be 'cesaro' or 'logarithmic', got '" + s + "'");
}

WindowSchedule schedule_from_json(const json& j) {
    if (!j.is_object()) bad_field("schedule", "expected an object");
    std::string type = get_field_or<std::string>(j, "schedule", "type", "explicit");
    try {
        if (type == "explicit") {
            reject_unknown(j, "schedule", {"type", "windows"});
            return WindowSchedule::explicit_windows(
                get_field<std::vector<int64_t>>(j, "schedule", "windows"));
        }
        if (type == "geometric") {
            reject_unknown(j, "schedule", {"type", "first", "last", "ratio"});
            return WindowSchedule::geometric(get_field<int64_t>(j, "schedule", "first"),
                                             get_field<int64_t>(j, "schedule", "last"),
                                             get_field<double>(j, "schedule", "ratio"));
        }
        if (type == "power-of-scale") {
            reject_unknown(j, "schedule", {"type", "coef_a", "power", "scales"});
            return WindowSchedule::power_of_scale(
                get_field_or<double>(j, "schedule", "coef_a", 1.0),
                get_field<double>(j, "schedule", "power"),
                get_field<std::vector<int64_t>>(j, "schedule", "scales"));
        }
    } catch (const config_error& e) {
        throw config_error("schedule: " + std::string(e.what()));
    }
    bad_field("schedule", "type must be explicit, geometric or power-of-scale");
}

json schedule_to_json(const WindowSchedule& s) {
    switch (s.generator) {
        case WindowSchedule::Generator::geometric:
            return {{"type", "geometric"},
                    {"first", s.windows.front()},
                    {"last", s.windows.back()},
                    {"ratio", s.base}};
        case WindowSchedule::Generator::power_of_scale:
            return {{"type", "power-of-scale"},
                    {"coef_a", s.coef_a},
                    {"power", s.power},
                    {"scales", s.scales}};
        case WindowSchedule::Generator::explicit_list:
        default:
            return {{"type", "explicit"}, {"windows", s.windows}};
    }
}

CorrelationQuery query_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) bad_field(where, "expected a query object");
    reject_unknown(j, where, {"shifts", "exponents", "mode"});
    CorrelationQuery q;
    q.shifts = get_field<std::vector<int64_t>>(j, where, "shifts");
    q.exponents = get_field<std::vector<int64_t>>(j, where, "exponents");
    q.mode = mode_from_string(get_field_or<std::string>(j, where, "mode", "cesaro"), where);
    try {
        q.validate();
    } catch (const config_error& e) {
        throw config_error(where + ": " + std::string(e.what()));
    }
    return q;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_hash(uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

MultiplicativeSpec spec_from_function(const json& fn) {
    if (fn.is_string()) return spec_from_json(json{{"builtin", fn.get<std::string>()}});
    if (fn.is_object()) return spec_from_json(fn);
    throw config_error("function: expected a builtin id string or a family document");
}

bool is_mrt_phase(const json& fn) {
    if (fn.is_string()) return fn.get<std::string>() == "mrt-phase";
    return fn.is_object() && fn.value("builtin", "") == "mrt-phase";
}

cplx prediction_value(const LimitPrediction& p) {
    if (p.kind == LimitPrediction::Kind::exact_scalar) return p.scalar;
    return oscillatory_integral(p.beta, p.d, 1e-8);
}

// Owns the value table (when one is needed) so the Sequence view stays valid.
struct SeqHolder {
    MultiplicativeSpec spec;
    ValueTable table;
    std::optional<Sequence> seq;
};

void materialize(SeqHolder& h, int64_t limit, uint64_t seed, json& extras) {
    if (h.spec.pure_phase_t) {
        h.seq.emplace(h.spec);
        return;
    }
    if (limit < 1) bad_field("schedule", "windows leave no room for the value table");
    if (limit > kSpfCapacity)
        throw capacity_error("value table of " + std::to_string(limit) +
                             " entries exceeds the sieve capacity " +
                             std::to_string(kSpfCapacity));
    {
        SPFTable spf = build_spf(std::max<int64_t>(limit, 3));
        h.table = evaluate_range(h.spec, std::max<int64_t>(limit, 3), spf);
    }
    auto check = verify_multiplicativity(h.table, 128, seed);
    extras["mult_check_defect"] = check.max_defect;
    h.seq.emplace(h.table);
}

int64_t queries_max_shift(const std::vector<CorrelationQuery>& qs) {
    int64_t m = 0;
    for (const auto& q : qs) m = std::max(m, q.max_shift());
    return m;
}

std::vector<CorrelationQuery> queries_from_params(const json& params, AveragingMode mode,
                                                  const std::string& where) {
    if (!params.contains("queries")) return default_query_set(mode);
    const json& arr = params.at("queries");
    if (!arr.is_array() || arr.empty()) bad_field(where, "'queries' must be a nonempty array");
    std::vector<CorrelationQuery> out;
    for (const auto& qj : arr) out.push_back(query_from_json(qj, where + ".queries"));
    return out;
}

void need_windows(const ExperimentConfig& cfg) {
    if (cfg.schedule.windows.empty())
        bad_field("schedule", "this experiment needs a window schedule");
    cfg.schedule.validate();
}

// ---- per-experiment runners ------------------------------------------------

void run_correlate(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"query", "oracle"});
    need_windows(cfg);
    CorrelationQuery q = query_from_json(
        cfg.parameters.contains("query") ? cfg.parameters.at("query") : json(),
        "parameters.query");
    cplx final_value{0.0, 0.0};
    bool per_scale = is_mrt_phase(cfg.function) &&
                     cfg.schedule.generator == WindowSchedule::Generator::power_of_scale;
    if (per_scale) {
        for (size_t i = 0; i < cfg.schedule.scales.size(); ++i) {
            MultiplicativeSpec spec = mrt_phase_spec(cfg.schedule.scales[i]);
            Sequence a(spec);
            cplx v = correlation(a, q, cfg.schedule.windows[i], cfg.threads);
            ReportRecord r;
            r.add("scale", cfg.schedule.scales[i]);
            r.add("N", cfg.schedule.windows[i]);
            r.add_cplx("value", v);
            r.add("abs", std::abs(v));
            rep.series.push_back(std::move(r));
            final_value = v;
        }
    } else {
        SeqHolder h;
        h.spec = spec_from_function(cfg.function);
        materialize(h, cfg.schedule.windows.back() + std::max<int64_t>(0, q.max_shift()),
                    cfg.seed, rep.extras);
        auto series = correlation_series(*h.seq, q, cfg.schedule, cfg.threads);
        for (const auto& [N, v] : series) {
            ReportRecord r;
            r.add("N", N);
            r.add_cplx("value", v);
            r.add("abs", std::abs(v));
            rep.series.push_back(std::move(r));
            final_value = v;
        }
    }
    // oracle: explicit parameter wins, then the MRT schedule shapes
    std::optional<LimitPrediction> pred;
    if (cfg.parameters.contains("oracle")) {
        const json& oj = cfg.parameters.at("oracle");
        LimitPrediction p;
        if (oj.is_number()) {
            p.scalar = cplx(oj.get<double>(), 0.0);
        } else if (oj.is_object()) {
            reject_unknown(oj, "parameters.oracle", {"re", "im"});
            p.scalar = cplx(get_field_or<double>(oj, "parameters.oracle", "re", 0.0),
                            get_field_or<double>(oj, "parameters.oracle", "im", 0.0));
        } else {
            bad_field("parameters.oracle", "expected a number or {re, im}");
        }
        pred = p;
    } else if (per_scale && cfg.schedule.power > 0.0) {
        if (q.mode == AveragingMode::logarithmic) {
            if (cfg.schedule.power >= 1.0) {
                LimitPrediction p;
                p.scalar = cplx(mrt_log_limit(1.0 / cfg.schedule.power, q.exponents, q.shifts), 0.0);
                pred = p;
            }
        } else {
            double dd = 1.0 / cfg.schedule.power;
            if (std::abs(dd - std::round(dd)) < 1e-9 && std::round(dd) >= 1.0) {
                pred = mrt_cesaro_alpha_limit(cfg.schedule.coef_a,
                                              static_cast<int>(std::lround(dd)), q.exponents,
                                              q.shifts);
            } else if (dd > 1.0) {
                LimitPrediction p;
                p.scalar = cplx(mrt_cesaro_band_limit(static_cast<int64_t>(std::floor(dd)),
                                                      q.exponents, q.shifts),
                                0.0);
                pred = p;
            }
        }
    }
    if (pred) {
        rep.oracle = *pred;
        rep.defect = std::abs(final_value - prediction_value(*pred));
    }
}

void push_probe_row(ExperimentReport& rep, const ProbeResult& pr) {
    ReportRecord r;
    r.add("alpha", pr.alpha);
    r.add("alpha_num", pr.alpha_num);
    r.add("alpha_den", pr.alpha_den);
    r.add("magnitude", pr.magnitude);
    r.add("window", pr.window);
    r.add("lights_up", pr.lights_up);
    r.add("query", pr.best_query.describe());
    rep.series.push_back(std::move(r));
}

void run_spectrum_scan(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters",
                   {"Q_max", "alpha", "alpha_num", "alpha_den", "mode", "queries"});
    need_windows(cfg);
    AveragingMode mode = mode_from_string(
        get_field_or<std::string>(cfg.parameters, "parameters", "mode", "cesaro"), "parameters");
    auto queries = queries_from_params(cfg.parameters, mode, "parameters");
    SeqHolder h;
    h.spec = spec_from_function(cfg.function);
    materialize(h, cfg.schedule.windows.back() + queries_max_shift(queries), cfg.seed,
                rep.extras);
    if (cfg.parameters.contains("alpha_num") || cfg.parameters.contains("alpha_den")) {
        auto pr = spectral_probe(*h.seq, get_field<int64_t>(cfg.parameters, "parameters", "alpha_num"),
                                 get_field<int64_t>(cfg.parameters, "parameters", "alpha_den"),
                                 queries, cfg.schedule, cfg.threads);
        for (const auto& [N, mag] : pr.trend) {
            ReportRecord r;
            r.add("alpha", pr.alpha);
            r.add("N", N);
            r.add("magnitude", mag);
            rep.series.push_back(std::move(r));
        }
        rep.extras["lights_up"] = pr.lights_up;
    } else if (cfg.parameters.contains("alpha")) {
        auto pr = spectral_probe(*h.seq, get_field<double>(cfg.parameters, "parameters", "alpha"),
                                 queries, cfg.schedule, cfg.threads);
        for (const auto& [N, mag] : pr.trend) {
            ReportRecord r;
            r.add("alpha", pr.alpha);
            r.add("N", N);
            r.add("magnitude", mag);
            rep.series.push_back(std::move(r));
        }
        rep.extras["lights_up"] = pr.lights_up;
    } else {
        int64_t qmax = get_field<int64_t>(cfg.parameters, "parameters", "Q_max");
        for (const auto& pr : rational_scan(*h.seq, qmax, queries, cfg.schedule, cfg.threads))
            push_probe_row(rep, pr);
    }
}

void run_distance(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"g", "P", "grid"});
    MultiplicativeSpec f = spec_from_function(cfg.function);
    MultiplicativeSpec g = cfg.parameters.contains("g")
                               ? spec_from_function(cfg.parameters.at("g"))
                               : one_spec();
    int64_t P = get_field<int64_t>(cfg.parameters, "parameters", "P");
    if (P < 2) bad_field("parameters.P", "needs P >= 2");
    std::vector<int64_t> grid;
    if (cfg.parameters.contains("grid")) {
        grid = get_field<std::vector<int64_t>>(cfg.parameters, "parameters", "grid");
    } else {
        for (int i = 1; i <= 8; ++i) {
            auto Pi = static_cast<int64_t>(
                std::pow(static_cast<double>(P), static_cast<double>(i) / 8.0));
            Pi = std::max<int64_t>(Pi, 2);
            if (grid.empty() || Pi > grid.back()) grid.push_back(Pi);
        }
        grid.back() = P;
    }
    for (int64_t Pi : grid) {
        ReportRecord r;
        r.add("P", Pi);
        r.add("dist_sq", distance_sq_partial(f, g, Pi));
        rep.series.push_back(std::move(r));
    }
}

void run_decompose(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"eps", "P_max"});
    MultiplicativeSpec f = spec_from_function(cfg.function);
    double eps = get_field<double>(cfg.parameters, "parameters", "eps");
    int64_t P_max = get_field<int64_t>(cfg.parameters, "parameters", "P_max");
    auto res = decompose(f, eps, P_max);
    ReportRecord r;
    r.add("P_eps", res.P_eps);
    r.add("tail_bound", res.tail_bound);
    rep.series.push_back(std::move(r));
    if (!res.f1.doc.empty()) {
        rep.extras["f1"] = spec_to_json(res.f1);
        rep.extras["f2"] = spec_to_json(res.f2);
    }
}

void run_mrt_verify(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"t", "s", "delta"});
    MRTScaleData sd;
    sd.t = get_field<std::vector<int64_t>>(cfg.parameters, "parameters", "t");
    sd.s = get_field<std::vector<int64_t>>(cfg.parameters, "parameters", "s");
    sd.delta = get_field_or<double>(cfg.parameters, "parameters", "delta", 0.05);
    auto defects = mrt_assembly_verify(sd);
    double worst = 0.0;
    for (size_t m = 0; m < defects.size(); ++m) {
        ReportRecord r;
        r.add("block", static_cast<int64_t>(m + 1));
        r.add("t", sd.t[m]);
        r.add("max_defect", defects[m]);
        rep.series.push_back(std::move(r));
        worst = std::max(worst, defects[m]);
    }
    rep.extras["max_defect"] = worst;
}

void run_expsum_decay(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"g", "c", "q", "mode"});
    if (cfg.schedule.generator != WindowSchedule::Generator::power_of_scale)
        bad_field("schedule",
                  "expsum-decay needs a power-of-scale schedule (N from scales, L from windows)");
    need_windows(cfg);
    if (!cfg.parameters.contains("g")) bad_field("parameters", "missing key 'g'");
    const json& gj = cfg.parameters.at("g");
    reject_unknown(gj, "parameters.g", {"c0", "c"});
    LogPolyPhase g;
    g.c0 = get_field_or<double>(gj, "parameters.g", "c0", 0.0);
    g.c = get_field_or<std::vector<double>>(gj, "parameters.g", "c", {});
    double c = get_field_or<double>(cfg.parameters, "parameters", "c", 0.5);
    int q = static_cast<int>(get_field_or<int64_t>(cfg.parameters, "parameters", "q", 2));
    AveragingMode mode = mode_from_string(
        get_field_or<std::string>(cfg.parameters, "parameters", "mode", "cesaro"), "parameters");
    std::vector<std::pair<double, int64_t>> pairs;
    for (size_t i = 0; i < cfg.schedule.scales.size(); ++i)
        pairs.push_back({static_cast<double>(cfg.schedule.scales[i]), cfg.schedule.windows[i]});
    auto dr = decay_experiment(g, pairs, c, mode, q, cfg.threads);
    for (const auto& row : dr.rows) {
        ReportRecord r;
        r.add("N", row.N);
        r.add("L", row.L);
        r.add("window_lo", row.window_lo);
        r.add("window_hi", row.window_hi);
        r.add("abs_empirical", row.abs_empirical);
        r.add("bound", row.bound);
        r.add("ratio", row.ratio);
        rep.series.push_back(std::move(r));
    }
    rep.extras["C3"] = dr.C3;
    rep.extras["i0"] = dr.i0;
    rep.extras["max_ratio"] = dr.max_ratio;
    rep.extras["growth_window_ok"] = dr.growth_window_ok;
    bool log_boundary_ok = mode == AveragingMode::logarithmic && dr.i0 >= 1;
    if (log_boundary_ok)
        for (const auto& [N, L] : pairs)
            log_boundary_ok = log_boundary_ok &&
                              std::log(static_cast<double>(L)) / std::log(N) <=
                                  1.0 / static_cast<double>(dr.i0) + 1e-9;
    if (dr.growth_window_ok || log_boundary_ok) {
        LimitPrediction p;  // the in-window prediction is plain decay to zero
        p.scalar = cplx(0.0, 0.0);
        rep.oracle = p;
        rep.defect = dr.rows.back().abs_empirical;
    }
}

void run_stationarity(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"query", "r"});
    need_windows(cfg);
    CorrelationQuery q = query_from_json(
        cfg.parameters.contains("query") ? cfg.parameters.at("query") : json(),
        "parameters.query");
    int64_t r = get_field<int64_t>(cfg.parameters, "parameters", "r");
    if (r < 1) bad_field("parameters.r", "needs r >= 1");
    SeqHolder h;
    h.spec = spec_from_function(cfg.function);
    materialize(h, cfg.schedule.windows.back() + std::max<int64_t>(0, q.max_shift()) * r,
                cfg.seed, rep.extras);
    for (int64_t N : cfg.schedule.windows) {
        ReportRecord rec;
        rec.add("N", N);
        rec.add("defect", stationarity_defect(*h.seq, q, r, N, cfg.threads));
        rep.series.push_back(std::move(rec));
    }
}

void run_divisibility(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"alpha", "r", "mode", "queries"});
    need_windows(cfg);
    double alpha = get_field<double>(cfg.parameters, "parameters", "alpha");
    int64_t r = get_field<int64_t>(cfg.parameters, "parameters", "r");
    AveragingMode mode = mode_from_string(
        get_field_or<std::string>(cfg.parameters, "parameters", "mode", "cesaro"), "parameters");
    auto queries = queries_from_params(cfg.parameters, mode, "parameters");
    SeqHolder h;
    h.spec = spec_from_function(cfg.function);
    materialize(h, cfg.schedule.windows.back() + queries_max_shift(queries), cfg.seed,
                rep.extras);
    for (const auto& pr : divisibility_probe(*h.seq, alpha, r, queries, cfg.schedule, cfg.threads))
        push_probe_row(rep, pr);
}

void run_ceslog(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"queries"});
    need_windows(cfg);
    auto queries = queries_from_params(cfg.parameters, AveragingMode::cesaro, "parameters");
    SeqHolder h;
    h.spec = spec_from_function(cfg.function);
    materialize(h, cfg.schedule.windows.back() + queries_max_shift(queries), cfg.seed,
                rep.extras);
    for (int64_t N : cfg.schedule.windows) {
        ReportRecord r;
        r.add("N", N);
        r.add("max_gap", ceslog_agreement(*h.seq, queries, N, cfg.threads));
        rep.series.push_back(std::move(r));
    }
}

void run_halasz(const ExperimentConfig& cfg, ExperimentReport& rep) {
    reject_unknown(cfg.parameters, "parameters", {"t"});
    need_windows(cfg);
    double t = get_field<double>(cfg.parameters, "parameters", "t");
    SeqHolder h;
    h.spec = spec_from_function(cfg.function);
    materialize(h, cfg.schedule.windows.back(), cfg.seed, rep.extras);
    for (const auto& pt : halasz_drift(*h.seq, t, cfg.schedule, cfg.threads)) {
        ReportRecord r;
        r.add("N", pt.N);
        r.add_cplx("residual", pt.residual);
        r.add("modulus", pt.modulus);
        r.add("phase_increment", pt.phase_increment);
        rep.series.push_back(std::move(r));
    }
}

}  // namespace

// ---- config ------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw config_error("config: expected a JSON object");
    reject_unknown(doc, "config",
                   {"experiment", "function", "parameters", "schedule", "output", "threads",
                    "seed"});
    ExperimentConfig cfg;
    cfg.experiment = get_field<std::string>(doc, "config", "experiment");
    static const char* kNames[] = {"correlate",    "spectrum-scan", "distance",  "decompose",
                                   "mrt-verify",   "expsum-decay",  "stationarity",
                                   "divisibility", "ceslog",        "halasz"};
    bool known = false;
    for (const char* n : kNames) known = known || cfg.experiment == n;
    if (!known) bad_field("config.experiment", "unknown experiment '" + cfg.experiment + "'");
    cfg.function = doc.contains("function") ? doc.at("function") : json("one");
    if (doc.contains("parameters")) {
        if (!doc.at("parameters").is_object())
            bad_field("config.parameters", "expected an object");
        cfg.parameters = doc.at("parameters");
    } else {
        cfg.parameters = json::object();
    }
    if (doc.contains("schedule")) cfg.schedule = schedule_from_json(doc.at("schedule"));
    if (doc.contains("output")) {
        const json& out = doc.at("output");
        reject_unknown(out, "output", {"path", "format"});
        cfg.output_path = get_field_or<std::string>(out, "output", "path", "");
        cfg.format = get_field_or<std::string>(out, "output", "format", "csv");
        if (cfg.format != "csv" && cfg.format != "json")
            bad_field("output.format", "must be 'csv' or 'json'");
    }
    cfg.threads = static_cast<int>(get_field_or<int64_t>(doc, "config", "threads", 0));
    if (cfg.threads < 0) bad_field("config.threads", "must be >= 0");
    cfg.seed = get_field_or<uint64_t>(doc, "config", "seed", 1);
    return cfg;
}

json ExperimentConfig::to_json() const {
    json out;
    out["experiment"] = experiment;
    out["function"] = function;
    out["parameters"] = parameters;
    if (!schedule.windows.empty()) out["schedule"] = schedule_to_json(schedule);
    if (!output_path.empty() || format != "csv")
        out["output"] = {{"path", output_path}, {"format", format}};
    out["threads"] = threads;
    out["seed"] = seed;
    return out;
}

uint64_t ExperimentConfig::hash() const {
    json core;
    core["experiment"] = experiment;
    core["function"] = function;
    core["parameters"] = parameters;
    if (!schedule.windows.empty()) core["schedule"] = schedule_to_json(schedule);
    core["seed"] = seed;
    std::string s = core.dump();
    return detail::fnv1a64(s.data(), s.size());
}

// ---- records and reports -------------------------------------------------

void ReportRecord::add(const std::string& key, double v) { fields.push_back({key, fmt(v), v}); }
void ReportRecord::add(const std::string& key, int64_t v) {
    fields.push_back({key, std::to_string(v), v});
}
void ReportRecord::add(const std::string& key, const std::string& v) {
    fields.push_back({key, v, v});
}
void ReportRecord::add(const std::string& key, const char* v) { add(key, std::string(v)); }
void ReportRecord::add(const std::string& key, bool v) {
    fields.push_back({key, v ? "1" : "0", v});
}
void ReportRecord::add_cplx(const std::string& key, cplx v) {
    add(key + "_re", v.real());
    add(key + "_im", v.imag());
}

json ExperimentReport::to_json() const {
    json out;
    out["schema_version"] = 1;
    out["config"] = config.to_json();
    out["config_hash"] = fmt_hash(config_hash);
    json rows = json::array();
    for (const auto& rec : series) {
        json row;
        for (const auto& f : rec.fields) row[f.key] = f.value;
        rows.push_back(std::move(row));
    }
    out["series"] = rows;
    if (!extras.empty()) out["extras"] = extras;
    if (oracle) {
        out["oracle"] = oracle->to_json();
        out["defect"] = *defect;
    }
    out["runtime_ms"] = runtime_ms;
    out["seed"] = seed;
    return out;
}

std::string ExperimentReport::to_csv() const {
    std::string out;
    out += "# schema-version,1\n";
    out += "# experiment," + config.experiment + "\n";
    out += "# config-hash," + fmt_hash(config_hash) + "\n";
    out += "# seed," + std::to_string(seed) + "\n";
    if (oracle) {
        cplx v = prediction_value(*oracle);
        out += "# oracle," + fmt(v.real()) + "," + fmt(v.imag()) + "\n";
        out += "# defect," + fmt(*defect) + "\n";
    }
    if (!series.empty()) {
        for (size_t i = 0; i < series[0].fields.size(); ++i)
            out += (i ? "," : "") + series[0].fields[i].key;
        out += "\n";
        for (const auto& rec : series) {
            for (size_t i = 0; i < rec.fields.size(); ++i)
                out += (i ? "," : "") + rec.fields[i].text;
            out += "\n";
        }
    }
    return out;
}

// ---- run -------------------------------------------------------------

ExperimentReport run(const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.config = cfg;
    rep.config_hash = cfg.hash();
    rep.seed = cfg.seed;
    rep.extras = json::object();

    if (cfg.experiment == "correlate")
        run_correlate(cfg, rep);
    else if (cfg.experiment == "spectrum-scan")
        run_spectrum_scan(cfg, rep);
    else if (cfg.experiment == "distance")
        run_distance(cfg, rep);
    else if (cfg.experiment == "decompose")
        run_decompose(cfg, rep);
    else if (cfg.experiment == "mrt-verify")
        run_mrt_verify(cfg, rep);
    else if (cfg.experiment == "expsum-decay")
        run_expsum_decay(cfg, rep);
    else if (cfg.experiment == "stationarity")
        run_stationarity(cfg, rep);
    else if (cfg.experiment == "divisibility")
        run_divisibility(cfg, rep);
    else if (cfg.experiment == "ceslog")
        run_ceslog(cfg, rep);
    else if (cfg.experiment == "halasz")
        run_halasz(cfg, rep);
    else
        bad_field("config.experiment", "unknown experiment '" + cfg.experiment + "'");

    if (rep.series.empty())
        throw config_error("experiment '" + cfg.experiment + "' produced no series rows");
    rep.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return rep;
}

// ---- emission and cache ----------------------------------------------

namespace {

void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw io_error("cannot open '" + tmp + "' for writing");
    bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size();
    ok = (std::fclose(f) == 0) && ok;
    if (!ok || std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw io_error("failed to write '" + path + "'");
    }
}

struct LockFile {
    std::string path;
    bool held = false;
    explicit LockFile(std::string p) : path(std::move(p)) {
        for (int tries = 0; tries < 1200; ++tries) {
            int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
            if (fd >= 0) {
                ::close(fd);
                held = true;
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        throw io_error("cache lock busy: " + path);
    }
    ~LockFile() {
        if (held) ::unlink(path.c_str());
    }
};

}  // namespace

std::vector<std::string> report_emit(const ExperimentReport& rep, const std::string& path,
                                     const std::string& format) {
    if (path.empty()) throw config_error("report_emit needs an output path");
    std::string jdump = rep.to_json().dump(2) + "\n";
    if (format == "json") {
        write_atomic(path, jdump);
        return {path};
    }
    if (format != "csv") throw config_error("format must be 'csv' or 'json'");
    write_atomic(path, rep.to_csv());
    std::string jpath = path;
    if (jpath.size() > 4 && jpath.substr(jpath.size() - 4) == ".csv")
        jpath = jpath.substr(0, jpath.size() - 4);
    jpath += ".json";
    write_atomic(jpath, jdump);
    return {path, jpath};
}

std::string cache(int64_t spf_limit, const std::string& dir, std::string* note) {
    if (spf_limit < 3) throw config_error("cache needs spf limit >= 3");
    if (spf_limit > kSpfCapacity)
        throw capacity_error("spf limit exceeds capacity " + std::to_string(kSpfCapacity));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create cache directory '" + dir + "'");
    std::string path = dir + "/spf-" + std::to_string(spf_limit) + ".bin";
    LockFile lock(path + ".lock");
    bool existed = std::filesystem::exists(path);
    if (read_spf_cache(path, spf_limit).has_value()) {
        if (note) *note = "cache hit";
        return path;
    }
    SPFTable table = build_spf(spf_limit);
    write_spf_cache(table, path);
    if (note) *note = existed ? "rebuilt after corruption" : "cache miss";
    return path;
}

}  // namespace mfl
