#include "mfl/mfunc.hpp"

#include <atomic>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <random>

namespace mfl {

namespace {
std::atomic<int> g_threads{1};
}

int default_threads() { return g_threads.load(std::memory_order_relaxed); }
void set_default_threads(int n) {
    g_threads.store(n > 0 ? n : 1, std::memory_order_relaxed);
}

namespace detail {
uint64_t fnv1a64(const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = 1469598103934665603ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}
}  // namespace detail

SPFTable build_spf(int64_t N) {
    if (N < 2) throw config_error("build_spf: N must be at least 2");
    if (N > kSpfCapacity)
        throw capacity_error("build_spf: N exceeds the sieve capacity (" +
                             std::to_string(kSpfCapacity) + "); use segmented evaluation");
    SPFTable t;
    t.limit = N;
    t.spf.assign(static_cast<size_t>(N) + 1, 0);
    std::vector<uint32_t> primes;
    primes.reserve(static_cast<size_t>(N > 100 ? N / (std::log((double)N) - 1.1) : 32));
    for (int64_t i = 2; i <= N; ++i) {
        if (t.spf[i] == 0) {
            t.spf[i] = static_cast<uint32_t>(i);
            primes.push_back(static_cast<uint32_t>(i));
        }
        for (uint32_t p : primes) {
            if (p > t.spf[i] || static_cast<int64_t>(p) * i > N) break;
            t.spf[p * i] = p;
        }
    }
    return t;
}

std::vector<uint32_t> primes_up_to(int64_t N) {
    std::vector<uint32_t> out;
    if (N < 2) return out;
    std::vector<uint8_t> comp(static_cast<size_t>(N) + 1, 0);
    for (int64_t i = 2; i * i <= N; ++i)
        if (!comp[i])
            for (int64_t j = i * i; j <= N; j += i) comp[j] = 1;
    for (int64_t i = 2; i <= N; ++i)
        if (!comp[i]) out.push_back(static_cast<uint32_t>(i));
    return out;
}

ValueTable evaluate_range(const MultiplicativeSpec& spec, int64_t N, const SPFTable& spf) {
    if (N < 1) throw config_error("evaluate_range: N must be at least 1");
    if (spf.limit < N) throw config_error("evaluate_range: sieve limit below N");
    ValueTable t;
    t.limit = N;
    t.label = spec.label;
    t.completely_multiplicative = spec.kind == MultiplicativeSpec::Kind::completely_multiplicative;
    t.values.assign(static_cast<size_t>(N) + 1, cplx{0.0, 0.0});
    t.values[0] = 0.0;
    if (N >= 1) t.values[1] = 1.0;
    for (int64_t n = 2; n <= N; ++n) {
        uint32_t p = spf.spf[n];
        int64_t m = n;
        uint32_t s = 0;
        do {
            m /= p;
            ++s;
        } while (m % p == 0);
        t.values[n] = t.values[m] * spec.rule(p, s);
    }
    return t;
}

std::vector<cplx> evaluate_segment(const MultiplicativeSpec& spec, int64_t lo, int64_t hi) {
    if (lo < 1 || hi < lo) throw config_error("evaluate_segment: bad range");
    int64_t root = static_cast<int64_t>(std::sqrt(static_cast<double>(hi))) + 1;
    auto primes = primes_up_to(root);
    size_t len = static_cast<size_t>(hi - lo + 1);
    std::vector<cplx> val(len, cplx{1.0, 0.0});
    std::vector<int64_t> rem(len);
    std::iota(rem.begin(), rem.end(), lo);
    for (uint32_t p : primes) {
        int64_t first = ((lo + p - 1) / p) * p;
        for (int64_t m = first; m <= hi; m += p) {
            size_t i = static_cast<size_t>(m - lo);
            uint32_t s = 0;
            while (rem[i] % p == 0) {
                rem[i] /= p;
                ++s;
            }
            val[i] *= spec.rule(p, s);
        }
    }
    for (size_t i = 0; i < len; ++i)
        if (rem[i] > 1) val[i] *= spec.rule(static_cast<uint64_t>(rem[i]), 1);
    return val;
}

cplx value_at(const MultiplicativeSpec& spec, uint64_t n) {
    if (n == 0) return {0.0, 0.0};
    cplx v{1.0, 0.0};
    uint64_t m = n;
    for (uint64_t p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
        if (m % p) continue;
        uint32_t s = 0;
        do {
            m /= p;
            ++s;
        } while (m % p == 0);
        v *= spec.rule(p, s);
    }
    if (m > 1) v *= spec.rule(m, 1);
    return v;
}

MultVerifyReport verify_multiplicativity(const ValueTable& table, int64_t trials, uint64_t seed) {
    MultVerifyReport rep;
    rep.trials = trials;
    if (table.limit < 6) return rep;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int64_t> dm(2, table.limit / 2);
    for (int64_t t = 0; t < trials; ++t) {
        int64_t m = 0, n = 0;
        for (int tries = 0; tries < 64; ++tries) {
            m = dm(rng);
            std::uniform_int_distribution<int64_t> dn(2, table.limit / m);
            n = dn(rng);
            if (table.completely_multiplicative || std::gcd(m, n) == 1) break;
            m = 0;
        }
        if (m == 0) continue;
        double defect = std::abs(table.at(m * n) - table.at(m) * table.at(n));
        if (defect > rep.max_defect) {
            rep.max_defect = defect;
            rep.worst_m = m;
            rep.worst_n = n;
        }
    }
    return rep;
}

static constexpr char kSpfMagic[6] = {'M', 'F', 'S', 'P', 'F', '1'};

void write_spf_cache(const SPFTable& table, const std::string& path) {
    if (table.limit >= (int64_t(1) << 32))
        throw capacity_error("spf cache format holds limits below 2^32 only");
    std::string tmp = path + ".tmp";
    FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw io_error("cannot open " + tmp + " for writing");
    uint64_t limit = static_cast<uint64_t>(table.limit);
    bool ok = std::fwrite(kSpfMagic, 1, 6, f) == 6 &&
              std::fwrite(&limit, 8, 1, f) == 1 &&
              std::fwrite(table.spf.data() + 2, 4, static_cast<size_t>(table.limit - 1), f) ==
                  static_cast<size_t>(table.limit - 1);
    ok = std::fclose(f) == 0 && ok;
    if (!ok || std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw io_error("failed writing spf cache to " + path);
    }
}

std::optional<SPFTable> read_spf_cache(const std::string& path, int64_t expected_limit) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) return std::nullopt;
    char magic[6];
    uint64_t limit = 0;
    bool ok = std::fread(magic, 1, 6, f) == 6 && std::memcmp(magic, kSpfMagic, 6) == 0 &&
              std::fread(&limit, 8, 1, f) == 1 &&
              limit == static_cast<uint64_t>(expected_limit);
    SPFTable t;
    if (ok) {
        t.limit = static_cast<int64_t>(limit);
        t.spf.assign(limit + 1, 0);
        ok = std::fread(t.spf.data() + 2, 4, limit - 1, f) == limit - 1;
        // must be the whole file
        ok = ok && std::fgetc(f) == EOF;
    }
    std::fclose(f);
    if (!ok) return std::nullopt;
    return t;
}

}  // namespace mfl
