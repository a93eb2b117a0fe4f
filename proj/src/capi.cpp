#include "mfl.h"

#include <cstdlib>
#include <cstring>
#include <new>

#include "mfl/experiment.hpp"
#include "mfl/families.hpp"
#include "mfl/oracles.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return MFL_OK;
    } catch (const mfl::config_error& e) {
        g_last_error = e.what();
        return MFL_ERR_CONFIG;
    } catch (const mfl::capacity_error& e) {
        g_last_error = e.what();
        return MFL_ERR_CAPACITY;
    } catch (const mfl::io_error& e) {
        g_last_error = e.what();
        return MFL_ERR_IO;
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return MFL_ERR_CONFIG;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return MFL_ERR_CAPACITY;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MFL_ERR_INTERNAL;
    }
}

int null_arg(const char* what) {
    g_last_error = std::string("null argument: ") + what;
    return MFL_ERR_CONFIG;
}

}  // namespace

struct mfl_spec {
    mfl::MultiplicativeSpec spec;
};

extern "C" {

const char* mfl_version(void) { return "1.0.0"; }

const char* mfl_last_error(void) { return g_last_error.c_str(); }

void mfl_set_threads(int n) { mfl::set_default_threads(n); }

int mfl_spec_from_json(const char* json_doc, mfl_spec** out) {
    if (!json_doc) return null_arg("json_doc");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        auto doc = nlohmann::json::parse(json_doc);
        auto* handle = new mfl_spec{mfl::spec_from_json(doc)};
        *out = handle;
    });
}

int mfl_spec_value(const mfl_spec* spec, uint64_t n, double* re, double* im) {
    if (!spec) return null_arg("spec");
    if (!re || !im) return null_arg("re/im");
    return guarded([&] {
        mfl::cplx v = mfl::value_at(spec->spec, n);
        *re = v.real();
        *im = v.imag();
    });
}

void mfl_spec_free(mfl_spec* spec) { delete spec; }

int mfl_run_experiment_json(const char* config_json, const char* out_path, const char* format,
                            int threads, uint64_t seed, char** report_json) {
    if (!config_json) return null_arg("config_json");
    if (report_json) *report_json = nullptr;
    return guarded([&] {
        auto doc = nlohmann::json::parse(config_json);
        mfl::ExperimentConfig cfg = mfl::ExperimentConfig::from_json(doc);
        if (out_path && *out_path) cfg.output_path = out_path;
        if (format && *format) {
            cfg.format = format;
            if (cfg.format != "csv" && cfg.format != "json")
                throw mfl::config_error("format must be 'csv' or 'json'");
        }
        if (threads > 0) cfg.threads = threads;
        if (seed != 0) cfg.seed = seed;
        mfl::ExperimentReport rep = mfl::run(cfg);
        if (!cfg.output_path.empty()) mfl::report_emit(rep, cfg.output_path, cfg.format);
        if (report_json) *report_json = dup_string(rep.to_json().dump(2));
    });
}

void mfl_string_free(char* s) { std::free(s); }

int mfl_cache_build(int64_t spf_limit, const char* dir, char** out_path, char** note) {
    if (!dir) return null_arg("dir");
    if (out_path) *out_path = nullptr;
    if (note) *note = nullptr;
    return guarded([&] {
        std::string n;
        std::string path = mfl::cache(spf_limit, dir, &n);
        if (out_path) *out_path = dup_string(path);
        if (note) *note = dup_string(n);
    });
}

int mfl_oscillatory_integral(double beta, int d, double tol, double* re, double* im) {
    if (!re || !im) return null_arg("re/im");
    return guarded([&] {
        mfl::cplx v = mfl::oscillatory_integral(beta, d, tol);
        *re = v.real();
        *im = v.imag();
    });
}

}  // extern "C"
