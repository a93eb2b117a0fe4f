#include "mfl/expsum.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mfl {

namespace detail {

namespace {

inline PhaseAccumulator two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline PhaseAccumulator quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline PhaseAccumulator two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

constexpr PhaseAccumulator kLn2 = {6.93147180559945286e-01, 2.31904681384629956e-17};
constexpr PhaseAccumulator kTwoPiDD = {6.28318530717958623e+00, 2.44929359829470635e-16};

}  // namespace

PhaseAccumulator dd_add(PhaseAccumulator a, PhaseAccumulator b) {
    PhaseAccumulator s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    return quick_two_sum(s.hi, s.lo);
}

PhaseAccumulator dd_add(PhaseAccumulator a, double b) {
    PhaseAccumulator s = two_sum(a.hi, b);
    s.lo += a.lo;
    return quick_two_sum(s.hi, s.lo);
}

PhaseAccumulator dd_mul(PhaseAccumulator a, PhaseAccumulator b) {
    PhaseAccumulator p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

PhaseAccumulator dd_mul(PhaseAccumulator a, double b) {
    PhaseAccumulator p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

PhaseAccumulator dd_div(PhaseAccumulator a, PhaseAccumulator b) {
    double q1 = a.hi / b.hi;
    PhaseAccumulator r = dd_add(a, dd_mul(b, -q1));
    double q2 = r.hi / b.hi;
    r = dd_add(r, dd_mul(b, -q2));
    double q3 = r.hi / b.hi;
    PhaseAccumulator q = quick_two_sum(q1, q2);
    return dd_add(q, q3);
}

namespace {

// ln(1 + j/256) to full two-term precision, built once via the atanh series
// 2·Σ t^{2m+1}/(2m+1), t = (r-1)/(r+1) <= 1/3, with hi/lo coefficients.
std::array<PhaseAccumulator, 256> build_ln_table() {
    std::array<PhaseAccumulator, 256> tab;
    tab[0] = {0.0, 0.0};
    for (int j = 1; j < 256; ++j) {
        double rm1 = j * (1.0 / 256.0);
        PhaseAccumulator t = dd_div({rm1, 0.0}, {2.0 + rm1, 0.0});
        PhaseAccumulator t2 = dd_mul(t, t);
        PhaseAccumulator acc = dd_div({1.0, 0.0}, {69.0, 0.0});
        for (int m = 33; m >= 0; --m)
            acc = dd_add(dd_mul(acc, t2), dd_div({1.0, 0.0}, {2.0 * m + 1.0, 0.0}));
        tab[j] = dd_mul(dd_mul(acc, t), 2.0);
    }
    return tab;
}

const std::array<PhaseAccumulator, 256>& ln_table() {
    static const std::array<PhaseAccumulator, 256> tab = build_ln_table();
    return tab;
}

}  // namespace

PhaseAccumulator dd_ln(double x) {
    int e = 0;
    double m = std::frexp(x, &e);
    m *= 2.0;
    e -= 1;
    if (m == 2.0) {  // frexp boundary safety; never hit for finite inputs
        m = 1.0;
        e += 1;
    }
    int j = static_cast<int>((m - 1.0) * 256.0);
    if (j > 255) j = 255;
    double r = 1.0 + j * (1.0 / 256.0);
    // m - r is exact (Sterbenz: both in [1,2), |m-r| <= 2^-8)
    PhaseAccumulator w = dd_div({m - r, 0.0}, {r, 0.0});
    static constexpr double kc[9] = {1.0,       -1.0 / 2.0, 1.0 / 3.0, -1.0 / 4.0, 1.0 / 5.0,
                                     -1.0 / 6.0, 1.0 / 7.0, -1.0 / 8.0, 1.0 / 9.0};
    PhaseAccumulator p = {kc[8], 0.0};
    for (int k = 7; k >= 0; --k) p = dd_add(dd_mul(p, w), kc[k]);
    p = dd_mul(p, w);
    return dd_add(dd_add(dd_mul(kLn2, static_cast<double>(e)), ln_table()[j]), p);
}

namespace {

// Collapse a two-term phase to a double in [0, 2π).
double dd_mod_twopi(PhaseAccumulator p) {
    double k = std::nearbyint(p.hi / kTwoPiDD.hi);
    PhaseAccumulator r = dd_add(p, dd_mul(kTwoPiDD, -k));
    double phase = r.hi + r.lo;
    if (phase < 0.0) phase += kTwoPi;
    if (phase >= kTwoPi) phase -= kTwoPi;
    if (phase < 0.0) phase = 0.0;
    return phase;
}

}  // namespace

}  // namespace detail

int64_t LogPolyPhase::i0() const {
    if (c0 != 0.0) return 0;
    for (size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) return static_cast<int64_t>(i) + 1;
    return -1;
}

namespace {

constexpr double kMagnitudeCap = 1e15;
constexpr double kDDThreshold = 8589934592.0;  // 2^33; plain doubles stay under 1e-6 rad

// Un-cancelled magnitude |N|·(|c0| ln n + Σ|c_i| n^{-i}); path choice and the
// capacity cap both key off this, not the (possibly tiny) net phase.
double gross_magnitude(double N, const LogPolyPhase& g, double x) {
    double m = std::abs(g.c0) * std::log(x);
    double invp = 1.0;
    for (double ci : g.c) {
        invp /= x;
        m += std::abs(ci) * invp;
    }
    return std::abs(N) * m;
}

double phase_eval_checked(double N, const LogPolyPhase& g, int64_t n, double gross) {
    double x = static_cast<double>(n);
    if (gross <= kDDThreshold) {
        double v = g.c0 * std::log(x);
        double invp = 1.0;
        for (double ci : g.c) {
            invp /= x;
            v += ci * invp;
        }
        double phase = std::fmod(N * v, kTwoPi);
        if (phase < 0.0) phase += kTwoPi;
        if (phase >= kTwoPi) phase = 0.0;
        return phase;
    }
    PhaseAccumulator acc = {0.0, 0.0};
    if (g.c0 != 0.0) acc = detail::dd_mul(detail::dd_ln(x), g.c0);
    if (!g.c.empty()) {
        PhaseAccumulator inv = detail::dd_div({1.0, 0.0}, {x, 0.0});
        PhaseAccumulator invp = {1.0, 0.0};
        for (double ci : g.c) {
            invp = detail::dd_mul(invp, inv);
            if (ci != 0.0) acc = detail::dd_add(acc, detail::dd_mul(invp, ci));
        }
    }
    return detail::dd_mod_twopi(detail::dd_mul(acc, N));
}

}  // namespace

double phase_eval(double N, const LogPolyPhase& g, int64_t n) {
    if (n < 1) throw config_error("phase_eval needs n >= 1");
    if (N == 0.0) return 0.0;
    double gross = gross_magnitude(N, g, static_cast<double>(n));
    if (!(gross <= kMagnitudeCap))
        throw capacity_error("phase magnitude " + std::to_string(gross) + " exceeds cap 1e15");
    return phase_eval_checked(N, g, n, gross);
}

cplx exp_sum(double N, const LogPolyPhase& g, int64_t a, int64_t b, AveragingMode mode,
             int threads) {
    if (a < 1 || b < a) throw config_error("exp_sum range must satisfy 1 <= a <= b");
    if (N == 0.0) return cplx(1.0, 0.0);
    if (N < 0.0) return std::conj(exp_sum(-N, g, a, b, mode, threads));
    // the gross magnitude is monotone on each piece; checking both ends and
    // x = 1..2 territory is overkill since a >= 1: log grows, powers shrink
    double cap = std::max(gross_magnitude(N, g, static_cast<double>(a)),
                          gross_magnitude(N, g, static_cast<double>(b)));
    if (!(cap <= kMagnitudeCap))
        throw capacity_error("exp_sum phase magnitude " + std::to_string(cap) +
                             " exceeds cap 1e15");
    auto weight = [mode](int64_t n) {
        return mode == AveragingMode::cesaro ? 1.0 : 1.0 / static_cast<double>(n);
    };
    auto term = [&](int64_t n) {
        double gross = gross_magnitude(N, g, static_cast<double>(n));
        return e_rad(phase_eval_checked(N, g, n, gross));
    };
    auto acc = detail::block_weighted_sum(a, b, threads, term, weight);
    return acc.s / acc.w;
}

cplx query_exp_sum(double N, const std::vector<int64_t>& shifts,
                   const std::vector<int64_t>& exponents, int64_t a, int64_t b,
                   AveragingMode mode, int threads) {
    if (shifts.empty() || shifts.size() != exponents.size())
        throw config_error("query_exp_sum needs matching nonempty shift/exponent lists");
    if (a < 1 || b < a) throw config_error("query_exp_sum range must satisfy 1 <= a <= b");
    if (N == 0.0) return cplx(1.0, 0.0);
    if (N < 0.0) return std::conj(query_exp_sum(-N, shifts, exponents, a, b, mode, threads));
    double ksum = 0.0;
    for (int64_t k : exponents) ksum += std::abs(static_cast<double>(k));
    double cap = N * ksum * std::log(static_cast<double>(b) + 3.0 +
                                     static_cast<double>(*std::max_element(shifts.begin(),
                                                                           shifts.end())));
    if (!(cap <= kMagnitudeCap))
        throw capacity_error("query_exp_sum phase magnitude " + std::to_string(cap) +
                             " exceeds cap 1e15");
    auto weight = [mode](int64_t n) {
        return mode == AveragingMode::cesaro ? 1.0 : 1.0 / static_cast<double>(n);
    };
    auto term = [&](int64_t n) -> cplx {
        PhaseAccumulator acc = {0.0, 0.0};
        for (size_t j = 0; j < shifts.size(); ++j) {
            int64_t arg = n + shifts[j];
            if (arg <= 0) return cplx(0.0, 0.0);
            acc = detail::dd_add(
                acc, detail::dd_mul(detail::dd_ln(static_cast<double>(arg)),
                                    static_cast<double>(exponents[j])));
        }
        return e_rad(detail::dd_mod_twopi(detail::dd_mul(acc, N)));
    };
    auto acc = detail::block_weighted_sum(a, b, threads, term, weight);
    return acc.s / acc.w;
}

double vdc_bound(int q, double c, double L, double M, double C3) {
    if (q < 2) throw config_error("vdc_bound needs q >= 2");
    if (!(c > 0.0 && c < 1.0)) throw config_error("vdc_bound needs c in (0,1)");
    if (!(L > 0.0) || !(M > 0.0) || !(C3 > 0.0))
        throw config_error("vdc_bound parameters must be positive");
    double Q = 4.0 * std::ldexp(1.0, q - 2) - 2.0;
    return C3 * (std::pow(M / std::pow(L, q), 1.0 / Q) + 1.0 / M);
}

namespace {

struct BoundShape {
    int q;
    int64_t i0;
    double operator()(double N, double L) const {
        double M = N / std::pow(L, static_cast<double>(i0));
        double Q = 4.0 * std::ldexp(1.0, q - 2) - 2.0;
        return std::pow(M / std::pow(L, q), 1.0 / Q) + 1.0 / M;
    }
};

bool in_growth_window(double N, int64_t L, int64_t i0) {
    if (L < 2) return false;
    if (i0 == 0) return L < N;
    return std::log(static_cast<double>(L)) / std::log(N) < 1.0 / static_cast<double>(i0);
}

}  // namespace

DecayReport decay_experiment(const LogPolyPhase& g,
                             const std::vector<std::pair<double, int64_t>>& schedule, double c,
                             AveragingMode mode, int q, int threads) {
    if (schedule.empty()) throw config_error("decay_experiment needs a nonempty schedule");
    if (!(c > 0.0 && c < 1.0)) throw config_error("decay_experiment needs c in (0,1)");
    if (q < 2) throw config_error("decay_experiment needs q >= 2");
    DecayReport rep;
    rep.i0 = g.i0();
    if (rep.i0 < 0)
        throw config_error("decay_experiment needs at least one nonzero phase coefficient");
    BoundShape shape{q, rep.i0};

    auto push = [&](double N, int64_t L, int64_t wlo, int64_t whi, double emp, double shapeL,
                    std::string tag) {
        DecayRow row;
        row.N = N;
        row.L = L;
        row.window_lo = wlo;
        row.window_hi = whi;
        row.abs_empirical = emp;
        if (rep.rows.empty()) rep.C3 = shapeL > 0.0 ? emp / shapeL : 1.0;
        row.bound = rep.C3 * shapeL;
        row.ratio = row.bound > 0.0 ? emp / row.bound : 0.0;
        row.in_growth_window = in_growth_window(N, L, rep.i0);
        row.tag = std::move(tag);
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        rep.growth_window_ok = rep.growth_window_ok && row.in_growth_window;
        rep.rows.push_back(std::move(row));
    };

    for (const auto& [N, L] : schedule) {
        if (L < 2 || !(N > 0.0)) throw config_error("decay_experiment schedule entries need N > 0, L >= 2");
        if (mode == AveragingMode::cesaro) {
            int64_t lo = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(c * static_cast<double>(L))));
            double emp = std::abs(exp_sum(N, g, lo, L, AveragingMode::cesaro, threads));
            push(N, L, lo, L, emp, shape(N, static_cast<double>(L)), "cesaro");
        } else {
            for (double delta : {0.1, 0.2, 0.3}) {
                double Ld = static_cast<double>(L);
                int64_t wlo = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(std::pow(Ld, delta))));
                int64_t whi = std::max(wlo, static_cast<int64_t>(std::floor(std::pow(Ld, 1.0 - delta))));
                double sup = 0.0;
                int64_t blo = wlo;
                while (blo <= whi) {
                    int64_t bhi = std::min(whi, 2 * blo - 1);
                    sup = std::max(sup, std::abs(exp_sum(N, g, blo, bhi, AveragingMode::cesaro, threads)));
                    blo = bhi + 1;
                }
                push(N, L, wlo, whi, sup, shape(N, static_cast<double>(whi)),
                     "dyadic-sup d=" + std::to_string(delta).substr(0, 3));
            }
            double emp = std::abs(exp_sum(N, g, 1, L, AveragingMode::logarithmic, threads));
            push(N, L, 1, L, emp, shape(N, static_cast<double>(L)), "log-direct");
        }
    }
    return rep;
}

}  // namespace mfl
