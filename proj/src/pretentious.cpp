#include "mfl/pretentious.hpp"

#include <json.hpp>

#include "mfl/families.hpp"

namespace mfl {

double theta_rev(cplx v) {
    if (std::abs(v) == 0.0) return 0.0;
    double th = std::atan2(v.imag(), v.real()) / kTwoPi;  // (-1/2, 1/2]
    if (th >= 0.5) th -= 1.0;
    return th;
}

double distance_sq_partial(const MultiplicativeSpec& f, const MultiplicativeSpec& g, int64_t P) {
    if (P < 2) throw config_error("distance needs P >= 2");
    double acc = 0.0;
    for (uint32_t p : primes_up_to(P)) {
        cplx prod = f.rule(p, 1) * std::conj(g.rule(p, 1));
        acc += (1.0 - prod.real()) / static_cast<double>(p);
    }
    return acc;
}

PolarPrimeData polar_data(const MultiplicativeSpec& f, int64_t P) {
    PolarPrimeData out;
    auto primes = primes_up_to(P);
    out.p = primes;
    out.r.reserve(primes.size());
    out.theta.reserve(primes.size());
    for (uint32_t p : primes) {
        cplx v = f.rule(p, 1);
        double r = std::abs(v);
        if (r > 1.0 + kUnitSlack)
            throw config_error("polar data: |f(p)| > 1 at p=" + std::to_string(p));
        r = std::min(r, 1.0);
        double th = theta_rev(v);
        out.r.push_back(r);
        out.theta.push_back(th);
        out.sum_one_minus_r_over_p += (1.0 - r) / static_cast<double>(p);
        out.sum_theta_sq_over_p += th * th / static_cast<double>(p);
    }
    return out;
}

ANResult A_of_N(const MultiplicativeSpec& f, int64_t P_eps, int64_t N, double c) {
    if (P_eps < 1 || N < P_eps) throw config_error("A_of_N needs 1 <= P_eps <= N");
    if (!(c > 0.0 && c < 1.0)) throw config_error("slow-variation exponent c must be in (0,1)");
    auto primes = primes_up_to(N);
    std::vector<double> prefix;  // prefix[i] = sum over the first i primes >= P_eps
    prefix.reserve(primes.size() + 1);
    prefix.push_back(0.0);
    for (uint32_t p : primes) {
        double term = 0.0;
        if (static_cast<int64_t>(p) >= P_eps)
            term = theta_rev(f.rule(p, 1)) / static_cast<double>(p);
        prefix.push_back(prefix.back() + term);
    }
    auto A_at = [&](double x) {
        // number of primes <= x
        auto it = std::upper_bound(primes.begin(), primes.end(), static_cast<uint32_t>(x));
        return prefix[static_cast<size_t>(it - primes.begin())];
    };
    ANResult res;
    res.value = prefix.back();
    double lo = std::pow(static_cast<double>(N), c);
    double llo = std::log(lo), lhi = std::log(static_cast<double>(N));
    constexpr int kGrid = 64;
    for (int j = 0; j < kGrid; ++j) {
        double x = std::exp(llo + (lhi - llo) * j / (kGrid - 1));
        res.slow_variation_defect =
            std::max(res.slow_variation_defect, std::abs(A_at(x) - res.value));
    }
    return res;
}

double concentration_defect(const Sequence& a, int64_t N, double phase_rev, AveragingMode mode,
                            int threads) {
    if (!a.analytic() && N > a.limit())
        throw config_error("concentration defect: table shorter than window");
    cplx target = e_rev(phase_rev);
    for (int64_t n = 1; n <= std::min<int64_t>(N, 64); ++n) {
        double m = std::abs(a.at(n));
        if (std::abs(m - 1.0) > 1e-9)
            throw config_error("concentration defect expects unit-modulus values (|f(" +
                               std::to_string(n) + ")| = " + std::to_string(m) + ")");
    }
    auto r = detail::block_weighted_sum(
        1, N, threads,
        [&](int64_t n) {
            double d = std::abs(a.at(n) - target);
            return cplx{d * d, 0.0};
        },
        [mode](int64_t n) {
            return mode == AveragingMode::cesaro ? 1.0 : 1.0 / static_cast<double>(n);
        });
    return r.s.real() / r.w;
}

double concentration_defect(const MultiplicativeSpec& f, int64_t N, double phase_rev,
                            AveragingMode mode, int threads) {
    for (uint32_t p : {2u, 3u, 5u, 7u, 11u}) {
        for (uint32_t s = 1; s <= 3; ++s) {
            if (f.kind == MultiplicativeSpec::Kind::completely_multiplicative && s > 1) continue;
            double m = std::abs(f.rule(p, s));
            if (std::abs(m - 1.0) > 1e-9)
                throw config_error("concentration defect expects |f| = 1 on prime powers; got |f(" +
                                   std::to_string(p) + "^" + std::to_string(s) +
                                   ")| = " + std::to_string(m));
        }
    }
    if (f.pure_phase_t) return concentration_defect(Sequence(f), N, phase_rev, mode, threads);
    auto spf = build_spf(N);
    auto table = evaluate_range(f, N, spf);
    return concentration_defect(Sequence(table), N, phase_rev, mode, threads);
}

DecompositionResult decompose(const MultiplicativeSpec& f, double eps, int64_t P_max) {
    if (eps <= 0) throw config_error("decompose needs eps > 0");
    if (P_max < 2) throw config_error("decompose needs P_max >= 2");
    auto primes = primes_up_to(P_max);
    size_t np = primes.size();
    std::vector<double> suffix(np + 1, 0.0);
    for (size_t i = np; i-- > 0;) {
        double th = theta_rev(f.rule(primes[i], 1));
        suffix[i] = suffix[i + 1] + th * th / static_cast<double>(primes[i]);
    }
    size_t jstar = np;
    for (size_t j = 0; j <= np; ++j)
        if (suffix[j] <= eps) {
            jstar = j;
            break;
        }
    DecompositionResult out;
    out.P_eps = jstar == 0 ? 2 : static_cast<int64_t>(primes[jstar - 1]);
    out.tail_bound = suffix[std::max<size_t>(jstar, 1)];

    auto base_rule = f.prime_power_rule;
    int64_t peps = out.P_eps;
    auto theta = [base_rule](uint64_t p) { return theta_rev(base_rule(p, 1)); };

    out.f1.kind = MultiplicativeSpec::Kind::multiplicative;
    out.f1.label = f.label + " (tail phases removed)";
    out.f1.prime_power_rule = [base_rule, theta, peps](uint64_t p, uint32_t s) {
        cplx v = base_rule(p, s);
        if (static_cast<int64_t>(p) <= peps) return v;
        return v * e_rev(-theta(p));
    };
    out.f2.kind = MultiplicativeSpec::Kind::multiplicative;
    out.f2.label = "tail phases of " + f.label;
    out.f2.prime_power_rule = [theta, peps](uint64_t p, uint32_t) {
        if (static_cast<int64_t>(p) <= peps) return cplx{1.0, 0.0};
        return e_rev(theta(p));
    };
    if (!f.doc.empty()) {
        nlohmann::json base = nlohmann::json::parse(f.doc);
        out.f1.doc = nlohmann::json{{"derived", "twist-tail"}, {"base", base}, {"P_eps", peps}}
                         .dump();
        out.f2.doc = nlohmann::json{{"derived", "phase-tail"}, {"base", base}, {"P_eps", peps}}
                         .dump();
    }
    return out;
}

double besicovitch_defect(const Sequence& a, const std::vector<cplx>& approx, double alpha_rev,
                          int64_t N, AveragingMode mode, int threads) {
    if (approx.empty()) throw config_error("besicovitch defect needs a nonempty period");
    if (!a.analytic() && N > a.limit())
        throw config_error("besicovitch defect: table shorter than window");
    cplx rot = e_rev(alpha_rev);
    int64_t q = static_cast<int64_t>(approx.size());
    auto r = detail::block_weighted_sum(
        1, N, threads,
        [&](int64_t n) {
            double d = std::abs(a.at(n) - rot * approx[static_cast<size_t>(n % q)]);
            return cplx{d * d, 0.0};
        },
        [mode](int64_t n) {
            return mode == AveragingMode::cesaro ? 1.0 : 1.0 / static_cast<double>(n);
        });
    return r.s.real() / r.w;
}

double besicovitch_defect(const MultiplicativeSpec& f, const std::vector<cplx>& approx,
                          double alpha_rev, int64_t N, AveragingMode mode, int threads) {
    if (f.pure_phase_t)
        return besicovitch_defect(Sequence(f), approx, alpha_rev, N, mode, threads);
    auto spf = build_spf(N);
    auto table = evaluate_range(f, N, spf);
    return besicovitch_defect(Sequence(table), approx, alpha_rev, N, mode, threads);
}

}  // namespace mfl
