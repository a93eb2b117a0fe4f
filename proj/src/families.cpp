#include "mfl/families.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <numeric>

namespace mfl {

using json = nlohmann::json;

namespace {

cplx ipow(cplx z, uint32_t s) {
    cplx r{1.0, 0.0};
    while (s) {
        if (s & 1) r *= z;
        z *= z;
        s >>= 1;
    }
    return r;
}

MultiplicativeSpec make_cm(std::function<cplx(uint64_t)> at_p, std::string label) {
    MultiplicativeSpec spec;
    spec.kind = MultiplicativeSpec::Kind::completely_multiplicative;
    spec.label = std::move(label);
    spec.prime_power_rule = [fp = std::move(at_p)](uint64_t p, uint32_t s) {
        return ipow(fp(p), s);
    };
    return spec;
}

int64_t pow_mod(int64_t b, int64_t e, int64_t m) {
    int64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = (__int128)r * b % m;
        b = (__int128)b * b % m;
        e >>= 1;
    }
    return r;
}

// one cyclic component of (Z/mZ)*: <gen> of order `order` inside residues mod q
struct UnitComponent {
    int64_t q;      // prime-power piece of the modulus
    int64_t gen;    // generator (for 2^k, k>=3 there are two components: -1 and 5)
    int64_t order;
    std::map<int64_t, int64_t> dlog;  // residue mod q -> exponent of gen
};

int64_t primitive_root(int64_t q, int64_t p) {
    // q = p^a, p odd prime: smallest primitive root
    int64_t phi = q / p * (p - 1);
    std::vector<int64_t> prime_factors;
    int64_t m = phi;
    for (int64_t d = 2; d * d <= m; ++d)
        if (m % d == 0) {
            prime_factors.push_back(d);
            while (m % d == 0) m /= d;
        }
    if (m > 1) prime_factors.push_back(m);
    for (int64_t g = 2; g < q; ++g) {
        if (std::gcd(g, q) != 1) continue;
        bool ok = true;
        for (int64_t d : prime_factors)
            if (pow_mod(g, phi / d, q) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    throw config_error("no primitive root found");  // unreachable for valid q
}

void fill_dlog(UnitComponent& c) {
    int64_t x = 1 % c.q;
    for (int64_t e = 0; e < c.order; ++e) {
        if (!c.dlog.count(x)) c.dlog[x] = e;
        x = (__int128)x * c.gen % c.q;
    }
}

// cyclic decomposition with the canonical generator ordering; components are
// listed factor by factor in increasing prime order, with 2^k contributing
// (-1, 5) in that order
std::vector<UnitComponent> unit_group(int64_t m) {
    std::vector<std::pair<int64_t, int>> fact;
    int64_t x = m;
    for (int64_t p = 2; p * p <= x; ++p)
        if (x % p == 0) {
            int a = 0;
            while (x % p == 0) {
                x /= p;
                ++a;
            }
            fact.push_back({p, a});
        }
    if (x > 1) fact.push_back({x, 1});
    std::sort(fact.begin(), fact.end());

    std::vector<UnitComponent> comps;
    for (auto [p, a] : fact) {
        int64_t q = 1;
        for (int i = 0; i < a; ++i) q *= p;
        if (p == 2) {
            if (a == 1) continue;  // trivial group
            if (a == 2) {
                comps.push_back({q, 3, 2, {}});
            } else {
                comps.push_back({q, q - 1, 2, {}});          // -1
                comps.push_back({q, 5, q / 4, {}});          // 5 has order 2^(k-2)
            }
        } else {
            comps.push_back({q, primitive_root(q, p), q / p * (p - 1), {}});
        }
        // 2^k with k>=3: residues decompose as (-1)^e0 * 5^e1; dlog needs both,
        // handled below in chi_exponents
    }
    for (auto& c : comps) fill_dlog(c);
    return comps;
}

int64_t euler_phi(int64_t m) {
    int64_t r = m, x = m;
    for (int64_t p = 2; p * p <= x; ++p)
        if (x % p == 0) {
            r -= r / p;
            while (x % p == 0) x /= p;
        }
    if (x > 1) r -= r / x;
    return r;
}

// exponents of residue r in the component list (the 2^k (-1,5) pair needs a
// joint solve since neither alone generates)
std::vector<int64_t> residue_exponents(const std::vector<UnitComponent>& comps, int64_t r) {
    std::vector<int64_t> e(comps.size(), 0);
    for (size_t i = 0; i < comps.size(); ++i) {
        const auto& c = comps[i];
        int64_t rq = r % c.q;
        if (i + 1 < comps.size() && comps[i + 1].q == c.q) {
            // joint (-1,5) component pair mod 2^k
            const auto& c5 = comps[i + 1];
            auto it = c5.dlog.find(rq);
            int64_t sign = 0;
            if (it == c5.dlog.end()) {
                it = c5.dlog.find((c.q - rq) % c.q);
                sign = 1;
            }
            e[i] = sign;
            e[i + 1] = it->second;
            ++i;
        } else {
            e[i] = c.dlog.at(rq);
        }
    }
    return e;
}

}  // namespace

DirichletCharacterSpec character(int64_t modulus, int64_t index) {
    if (modulus < 1) throw config_error("character: modulus must be >= 1");
    int64_t phi = euler_phi(modulus);
    if (index < 0 || index >= phi) throw config_error("character: index out of range [0, phi)");

    DirichletCharacterSpec ch;
    ch.modulus = modulus;
    ch.index = index;
    ch.residue_values.assign(static_cast<size_t>(modulus), cplx{0.0, 0.0});

    auto comps = unit_group(modulus);
    // index -> exponent tuple, lexicographic (first component most significant)
    std::vector<int64_t> chi_e(comps.size(), 0);
    {
        int64_t rem = index;
        for (size_t i = comps.size(); i-- > 0;) {
            chi_e[i] = rem % comps[i].order;
            rem /= comps[i].order;
        }
    }
    if (modulus == 1) {
        ch.residue_values = {cplx{1.0, 0.0}};
    } else {
        for (int64_t r = 0; r < modulus; ++r) {
            if (std::gcd(r, modulus) != 1) continue;
            auto e = residue_exponents(comps, r);
            double rev = 0.0;
            for (size_t i = 0; i < comps.size(); ++i)
                rev += static_cast<double>(chi_e[i]) * static_cast<double>(e[i]) /
                       static_cast<double>(comps[i].order);
            ch.residue_values[static_cast<size_t>(r)] = e_rev(rev);
        }
    }

    // conductor: least d | m with chi(a)=1 whenever a = 1 (mod d), gcd(a,m)=1
    for (int64_t d = 1; d <= modulus; ++d) {
        if (modulus % d) continue;
        bool factors = true;
        for (int64_t a = 1; a < modulus && factors; a += d)
            if (std::gcd(a, modulus) == 1 &&
                std::abs(ch.residue_values[static_cast<size_t>(a)] - cplx{1.0, 0.0}) > 1e-9)
                factors = false;
        if (factors) {
            ch.conductor = d;
            break;
        }
    }
    if (modulus == 1) ch.conductor = 1;
    ch.primitive = ch.conductor == ch.modulus;
    return ch;
}

MultiplicativeSpec DirichletCharacterSpec::spec() const {
    auto values = std::make_shared<std::vector<cplx>>(residue_values);
    int64_t m = modulus;
    auto s = make_cm(
        [values, m](uint64_t p) { return (*values)[static_cast<size_t>(p % m)]; },
        "character(" + std::to_string(modulus) + "," + std::to_string(index) + ")");
    s.doc = json{{"builtin", "character"},
                 {"params", {{"modulus", modulus}, {"index", index}}}}
                .dump();
    return s;
}

MultiplicativeSpec ArchimedeanSpec::spec() const {
    double tt = t;
    auto s = make_cm([tt](uint64_t p) { return e_rad(tt * std::log(static_cast<double>(p))); },
                     "n^(it), t=" + std::to_string(t));
    s.pure_phase_t = t;
    s.doc = json{{"builtin", "archimedean"}, {"params", {{"t", t}}}}.dump();
    return s;
}

MultiplicativeSpec one_spec() {
    auto s = make_cm([](uint64_t) { return cplx{1.0, 0.0}; }, "1");
    s.pure_phase_t = 0.0;
    s.doc = json{{"builtin", "one"}}.dump();
    return s;
}

MultiplicativeSpec example_family(FamilyId id, const FamilyParams& params) {
    switch (id) {
        case FamilyId::i: {
            auto s = make_cm([](uint64_t p) { return cplx{p == 2 ? -1.0 : 1.0, 0.0}; },
                             "f(2)=-1, f(p)=1 else");
            s.doc = json{{"builtin", "i"}}.dump();
            return s;
        }
        case FamilyId::ii: {
            if (params.primes.empty())
                throw config_error("family (ii) needs a nonempty prime list");
            auto set = std::make_shared<std::vector<uint64_t>>(params.primes);
            std::sort(set->begin(), set->end());
            auto s = make_cm(
                [set](uint64_t p) {
                    bool hit = std::binary_search(set->begin(), set->end(), p);
                    return cplx{hit ? -1.0 : 1.0, 0.0};
                },
                "f=-1 on a finite prime set");
            s.doc = json{{"builtin", "ii"}, {"params", {{"primes", params.primes}}}}.dump();
            return s;
        }
        case FamilyId::iii: {
            MultiplicativeSpec s;
            s.kind = MultiplicativeSpec::Kind::multiplicative;
            s.label = "1 off multiples of 3, -1 on them";
            s.prime_power_rule = [](uint64_t p, uint32_t) {
                return cplx{p == 3 ? -1.0 : 1.0, 0.0};
            };
            s.doc = json{{"builtin", "iii"}}.dump();
            return s;
        }
        case FamilyId::iv: {
            MultiplicativeSpec s;
            s.kind = MultiplicativeSpec::Kind::multiplicative;
            s.label = "mu^2";
            s.prime_power_rule = [](uint64_t, uint32_t sp) {
                return cplx{sp == 1 ? 1.0 : 0.0, 0.0};
            };
            s.doc = json{{"builtin", "iv"}}.dump();
            return s;
        }
        case FamilyId::v: {
            if (params.t == 0.0) throw config_error("family (v) needs t != 0");
            return ArchimedeanSpec{params.t}.spec();
        }
        case FamilyId::vi: {
            if (params.real_variant) {
                auto s = make_cm(
                    [](uint64_t p) { return cplx{1.0 - 1.0 / static_cast<double>(p), 0.0}; },
                    "f(p)=1-1/p");
                s.doc = json{{"builtin", "vi"}, {"params", {{"real_variant", true}}}}.dump();
                return s;
            }
            auto s = make_cm([](uint64_t p) { return e_rev(1.0 / static_cast<double>(p)); },
                             "f(p)=e(1/p)");
            s.doc = json{{"builtin", "vi"}}.dump();
            return s;
        }
        case FamilyId::vii: {
            // log log 2 < 0; the formula starts at p=3 and f(2):=1
            auto s = make_cm(
                [](uint64_t p) {
                    if (p == 2) return cplx{1.0, 0.0};
                    return e_rev(1.0 / std::log(std::log(static_cast<double>(p))));
                },
                "f(p)=e(1/log log p)");
            s.doc = json{{"builtin", "vii"}}.dump();
            return s;
        }
    }
    throw config_error("unknown family id");
}

MultiplicativeSpec mrt_phase_spec(int64_t s) {
    if (s < 0) throw config_error("mrt_phase_spec: s must be >= 0");
    double t = static_cast<double>(s);
    auto spec = make_cm([t](uint64_t p) { return e_rad(t * std::log(static_cast<double>(p))); },
                        "scale-phase s=" + std::to_string(s));
    spec.pure_phase_t = t;
    spec.doc = json{{"builtin", "mrt-phase"}, {"params", {{"s", s}}}}.dump();
    return spec;
}

std::optional<int64_t> mrt_exponent_search(const std::vector<std::pair<uint64_t, cplx>>& prior,
                                           double delta, int64_t lo, int64_t hi, int threads) {
    if (delta <= 0) throw config_error("mrt_exponent_search: delta must be positive");
    if (hi < lo) return std::nullopt;
    std::vector<double> logp;
    logp.reserve(prior.size());
    for (auto& [p, v] : prior) {
        (void)v;
        logp.push_back(std::log(static_cast<double>(p)));
    }
    auto admissible = [&](int64_t s) {
        for (size_t i = 0; i < prior.size(); ++i) {
            double a = static_cast<double>(s) * logp[i];
            if (std::abs(prior[i].second - e_rad(a)) > delta) return false;
        }
        return true;
    };
    constexpr int64_t kChunk = 1024;
    int64_t nchunks = (hi - lo) / kChunk + 1;
    std::atomic<int64_t> best{std::numeric_limits<int64_t>::max()};
    detail::parallel_blocks(nchunks, threads, [&](int64_t c) {
        int64_t clo = lo + c * kChunk;
        if (clo > best.load(std::memory_order_relaxed)) return;
        int64_t chi = std::min(hi, clo + kChunk - 1);
        for (int64_t s = clo; s <= chi; ++s) {
            if (admissible(s)) {
                int64_t cur = best.load(std::memory_order_relaxed);
                while (s < cur && !best.compare_exchange_weak(cur, s)) {
                }
                return;
            }
        }
    });
    int64_t b = best.load();
    if (b == std::numeric_limits<int64_t>::max()) return std::nullopt;
    return b;
}

void MRTScaleData::validate() const {
    if (t.size() != s.size() || t.size() < 2)
        throw config_error("scale data needs matched t/s lists with at least two entries");
    if (t.front() != 1) throw config_error("scale data must start at t_1 = 1");
    for (size_t m = 0; m + 1 < t.size(); ++m) {
        if (!(t[m] < s[m + 1]))
            throw config_error("scale axiom violated: t_m < s_{m+1} fails at m=" +
                               std::to_string(m + 1));
        if (!((__int128)s[m + 1] * s[m + 1] <= t[m + 1]))
            throw config_error("scale axiom violated: s_{m+1}^2 <= t_{m+1} fails at m=" +
                               std::to_string(m + 1));
    }
    for (size_t m = 0; m + 1 < t.size(); ++m)
        if (!(t[m] < t[m + 1]) || !(s[m] < s[m + 1]))
            throw config_error("scale lists must be strictly increasing");
}

MultiplicativeSpec mrt_assemble(const MRTScaleData& scales) {
    scales.validate();
    auto t = std::make_shared<std::vector<int64_t>>(scales.t);
    auto s = std::make_shared<std::vector<int64_t>>(scales.s);
    auto spec = make_cm(
        [t, s](uint64_t p) {
            auto it = std::lower_bound(t->begin() + 1, t->end(), static_cast<int64_t>(p));
            size_t idx = it == t->end() ? t->size() - 1
                                        : static_cast<size_t>(it - t->begin());
            double ex = static_cast<double>((*s)[idx]);
            return e_rad(ex * std::log(static_cast<double>(p)));
        },
        "assembled scale-phase");
    bool uniform = std::all_of(scales.s.begin() + 1, scales.s.end(),
                               [&](int64_t v) { return v == scales.s[1]; });
    if (uniform) spec.pure_phase_t = static_cast<double>(scales.s[1]);
    spec.doc = json{{"builtin", "mrt-assemble"},
                    {"params", {{"t", scales.t}, {"s", scales.s}, {"delta", scales.delta}}}}
                   .dump();
    return spec;
}

std::vector<double> mrt_assembly_verify(const MRTScaleData& scales) {
    scales.validate();
    auto spec = mrt_assemble(scales);
    std::vector<double> defects;
    auto primes = primes_up_to(scales.t.back());
    for (size_t m = 1; m < scales.t.size(); ++m) {
        double target = static_cast<double>(scales.s[m]);
        double worst = 0.0;
        for (uint32_t p : primes) {
            if (static_cast<int64_t>(p) > scales.t[m - 1]) break;
            double d = std::abs(spec.rule(p, 1) - e_rad(target * std::log(static_cast<double>(p))));
            worst = std::max(worst, d);
        }
        defects.push_back(worst);
    }
    return defects;
}

MultiplicativeSpec spec_from_json(const nlohmann::json& doc) {
    if (doc.contains("builtin")) {
        std::string id = doc["builtin"].get<std::string>();
        json params = doc.value("params", json::object());
        if (id == "one") return one_spec();
        if (id == "character")
            return character(params.at("modulus").get<int64_t>(),
                             params.at("index").get<int64_t>())
                .spec();
        if (id == "archimedean") return ArchimedeanSpec{params.at("t").get<double>()}.spec();
        if (id == "mrt-phase") return mrt_phase_spec(params.at("s").get<int64_t>());
        if (id == "mrt-assemble") {
            MRTScaleData sc;
            sc.t = params.at("t").get<std::vector<int64_t>>();
            sc.s = params.at("s").get<std::vector<int64_t>>();
            sc.delta = params.value("delta", 0.05);
            return mrt_assemble(sc);
        }
        static const std::map<std::string, FamilyId> ids = {
            {"i", FamilyId::i},   {"ii", FamilyId::ii}, {"iii", FamilyId::iii},
            {"iv", FamilyId::iv}, {"v", FamilyId::v},   {"vi", FamilyId::vi},
            {"vii", FamilyId::vii}};
        auto it = ids.find(id);
        if (it == ids.end()) throw config_error("unknown builtin family: " + id);
        FamilyParams fp;
        if (params.contains("primes")) fp.primes = params["primes"].get<std::vector<uint64_t>>();
        if (params.contains("t")) fp.t = params["t"].get<double>();
        if (params.contains("real_variant")) fp.real_variant = params["real_variant"].get<bool>();
        return example_family(it->second, fp);
    }
    if (doc.contains("derived")) {
        std::string kind = doc.at("derived").get<std::string>();
        MultiplicativeSpec base = spec_from_json(doc.at("base"));
        int64_t peps = doc.at("P_eps").get<int64_t>();
        auto base_rule = base.prime_power_rule;
        MultiplicativeSpec out;
        out.kind = MultiplicativeSpec::Kind::multiplicative;
        out.doc = doc.dump();
        auto theta = [base_rule](uint64_t p) {
            cplx v = base_rule(p, 1);
            double th = std::atan2(v.imag(), v.real()) / kTwoPi;
            if (th >= 0.5) th -= 1.0;  // [-1/2, 1/2)
            return th;
        };
        if (kind == "twist-tail") {
            out.label = base.label + " with tail phases removed";
            out.prime_power_rule = [base_rule, theta, peps](uint64_t p, uint32_t s) {
                cplx v = base_rule(p, s);
                if (static_cast<int64_t>(p) <= peps) return v;
                return v * e_rev(-theta(p));
            };
            return out;
        }
        if (kind == "phase-tail") {
            out.label = "tail phases of " + base.label;
            out.prime_power_rule = [theta, peps](uint64_t p, uint32_t) {
                if (static_cast<int64_t>(p) <= peps) return cplx{1.0, 0.0};
                return e_rev(theta(p));
            };
            return out;
        }
        throw config_error("unknown derived spec kind: " + kind);
    }
    if (!doc.contains("rules")) throw config_error("family document needs builtin, derived or rules");
    MultiplicativeSpec out;
    std::string kind = doc.value("kind", "completely-multiplicative");
    if (kind == "completely-multiplicative")
        out.kind = MultiplicativeSpec::Kind::completely_multiplicative;
    else if (kind == "multiplicative")
        out.kind = MultiplicativeSpec::Kind::multiplicative;
    else
        throw config_error("unknown spec kind: " + kind);
    out.label = doc.value("label", "rules");
    bool cm = out.kind == MultiplicativeSpec::Kind::completely_multiplicative;
    auto rules = std::make_shared<std::map<std::pair<uint64_t, uint32_t>, cplx>>();
    for (const auto& r : doc.at("rules")) {
        uint64_t p = r.at("p").get<uint64_t>();
        uint32_t s = r.value("s", 1u);
        if (cm && s != 1)
            throw config_error("completely multiplicative rules must use s=1");
        cplx v{r.at("re").get<double>(), r.value("im", 0.0)};
        if (std::abs(v) > 1.0 + kUnitSlack)
            throw config_error("rule value leaves the unit disc at p=" + std::to_string(p));
        (*rules)[{p, s}] = v;
    }
    out.prime_power_rule = [rules, cm](uint64_t p, uint32_t s) {
        if (cm) {
            auto it = rules->find({p, 1});
            return it == rules->end() ? cplx{1.0, 0.0} : ipow(it->second, s);
        }
        auto it = rules->find({p, s});
        return it == rules->end() ? cplx{1.0, 0.0} : it->second;
    };
    out.doc = doc.dump();
    return out;
}

nlohmann::json spec_to_json(const MultiplicativeSpec& spec) {
    if (spec.doc.empty())
        throw config_error("spec '" + spec.label + "' carries no serializable document");
    return json::parse(spec.doc);
}

}  // namespace mfl
