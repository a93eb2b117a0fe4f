#pragma once

#include <json.hpp>
#include <optional>
#include <utility>

#include "mfl/mfunc.hpp"

namespace mfl {

struct DirichletCharacterSpec {
    int64_t modulus = 1;
    int64_t index = 0;
    int64_t conductor = 1;
    bool primitive = true;
    std::vector<cplx> residue_values;  // indexed by residue 0..modulus-1

    cplx chi(int64_t n) const {
        int64_t r = n % modulus;
        if (r < 0) r += modulus;
        return residue_values[static_cast<size_t>(r)];
    }
    MultiplicativeSpec spec() const;
};

struct MRTScaleData {
    std::vector<int64_t> t;  // t_1=1 < t_2 < ...
    std::vector<int64_t> s;  // aligned exponents; block (t_m, t_{m+1}] uses s_{m+1}
    double delta = 0.05;

    void validate() const;  // throws config_error on an axiom violation
};

struct ArchimedeanSpec {
    double t = 0.0;
    MultiplicativeSpec spec() const;
};

enum class FamilyId { i = 1, ii, iii, iv, v, vi, vii };

struct FamilyParams {
    std::vector<uint64_t> primes;  // for (ii)
    double t = 0.0;                // for (v)
    bool real_variant = false;     // for (vi): false -> e(1/p), true -> 1-1/p
};

DirichletCharacterSpec character(int64_t modulus, int64_t index);
MultiplicativeSpec example_family(FamilyId id, const FamilyParams& params = {});
MultiplicativeSpec mrt_phase_spec(int64_t s);
std::optional<int64_t> mrt_exponent_search(const std::vector<std::pair<uint64_t, cplx>>& prior,
                                           double delta, int64_t lo, int64_t hi, int threads = 0);
MultiplicativeSpec mrt_assemble(const MRTScaleData& scales);
// Axiom-(iii) check: for each m >= 1, max over primes p <= t_m of
// |f(p) - exp(i*s_{m+1}*ln p)| where f is the assembled spec.
std::vector<double> mrt_assembly_verify(const MRTScaleData& scales);

// Family documents: {"builtin": id, "params": {...}} or
// {"kind": ..., "label": ..., "rules": [{"p","s","re","im"}, ...]} (unlisted
// prime powers default to 1; completely multiplicative rules take s=1 only).
MultiplicativeSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const MultiplicativeSpec& spec);

// constant 1 (the trivial character)
MultiplicativeSpec one_spec();

}  // namespace mfl
