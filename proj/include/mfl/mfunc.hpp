#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mfl/common.hpp"

namespace mfl {

// f(n) lives in the closed complex unit disc; |value| may exceed 1 by at
// most 1e-12 of rounding slack.
inline constexpr double kUnitSlack = 1e-12;

struct MultiplicativeSpec {
    enum class Kind { completely_multiplicative, multiplicative };
    Kind kind = Kind::completely_multiplicative;
    // value at p^s; for completely multiplicative specs this must equal
    // prime_power_rule(p,1)^s
    std::function<cplx(uint64_t p, uint32_t s)> prime_power_rule;
    std::string label;
    // Set when f(x) = exp(i*t*ln x) exactly (Archimedean / scale-phase
    // functions): lets window statistics run without a value table.
    std::optional<double> pure_phase_t;
    // serialized family document when the spec came from / can return to JSON
    std::string doc;

    cplx rule(uint64_t p, uint32_t s) const { return prime_power_rule(p, s); }
};

struct SPFTable {
    int64_t limit = 0;
    std::vector<uint32_t> spf;  // spf[n] = smallest prime factor, n in [2, limit]
};

struct ValueTable {
    int64_t limit = 0;
    std::vector<cplx> values;  // values[n], n in [1, limit]; index 0 unused
    bool completely_multiplicative = false;
    std::string label;

    // n <= 0 uses the zero extension; n > limit is a caller bug.
    cplx at(int64_t n) const {
        if (n <= 0) return {0.0, 0.0};
        return values[static_cast<size_t>(n)];
    }
};

struct MultVerifyReport {
    int64_t trials = 0;
    double max_defect = 0.0;
    int64_t worst_m = 0, worst_n = 0;
};

inline constexpr int64_t kSpfCapacity = 200'000'000;

SPFTable build_spf(int64_t N);
ValueTable evaluate_range(const MultiplicativeSpec& spec, int64_t N, const SPFTable& spf);
// Same contract as evaluate_range for [lo, hi] with primes above sqrt(hi)
// handled per segment; used when hi exceeds the sieve capacity.
std::vector<cplx> evaluate_segment(const MultiplicativeSpec& spec, int64_t lo, int64_t hi);
cplx value_at(const MultiplicativeSpec& spec, uint64_t n);
MultVerifyReport verify_multiplicativity(const ValueTable& table, int64_t trials, uint64_t seed);

std::vector<uint32_t> primes_up_to(int64_t N);

void write_spf_cache(const SPFTable& table, const std::string& path);
std::optional<SPFTable> read_spf_cache(const std::string& path, int64_t expected_limit);

}  // namespace mfl
