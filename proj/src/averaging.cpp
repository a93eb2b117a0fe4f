#include "mfl/averaging.hpp"

#include <algorithm>
#include <sstream>

namespace mfl {

void CorrelationQuery::validate() const {
    if (shifts.empty() || shifts.size() != exponents.size())
        throw config_error("correlation query needs matching nonempty shift/exponent lists");
}

int64_t CorrelationQuery::max_shift() const {
    int64_t m = 0;
    for (int64_t s : shifts) m = std::max(m, s);
    return m;
}

std::string CorrelationQuery::describe() const {
    std::ostringstream os;
    os << "k=(";
    for (size_t i = 0; i < exponents.size(); ++i) os << (i ? "," : "") << exponents[i];
    os << ") n=(";
    for (size_t i = 0; i < shifts.size(); ++i) os << (i ? "," : "") << shifts[i];
    os << ")";
    return os.str();
}

WindowSchedule WindowSchedule::explicit_windows(std::vector<int64_t> ws) {
    WindowSchedule s;
    s.generator = Generator::explicit_list;
    s.windows = std::move(ws);
    s.validate();
    return s;
}

WindowSchedule WindowSchedule::geometric(int64_t first, int64_t last, double base) {
    if (base <= 1.0 || first < 1 || last < first)
        throw config_error("geometric schedule needs base > 1 and 1 <= first <= last");
    WindowSchedule s;
    s.generator = Generator::geometric;
    s.base = base;
    double x = static_cast<double>(first);
    while (true) {
        int64_t w = static_cast<int64_t>(x);
        if (s.windows.empty() || w > s.windows.back()) s.windows.push_back(w);
        if (w >= last) break;
        x *= base;
        if (x > 2e18) break;
    }
    if (s.windows.back() != last) s.windows.push_back(last);
    s.validate();
    return s;
}

WindowSchedule WindowSchedule::power_of_scale(double a, double power, std::vector<int64_t> scales) {
    if (a <= 0 || power <= 0) throw config_error("power-of-scale schedule needs a, power > 0");
    WindowSchedule s;
    s.generator = Generator::power_of_scale;
    s.coef_a = a;
    s.power = power;
    s.scales = std::move(scales);
    for (int64_t sc : s.scales)
        s.windows.push_back(static_cast<int64_t>(a * std::pow(static_cast<double>(sc), power)));
    s.validate();
    return s;
}

void WindowSchedule::validate() const {
    if (windows.empty()) throw config_error("window schedule is empty");
    if (windows.front() < 1) throw config_error("windows must be >= 1");
    for (size_t i = 1; i < windows.size(); ++i)
        if (windows[i] <= windows[i - 1])
            throw config_error("window schedule must be strictly increasing");
}

namespace {

using detail::kBlock;
using detail::wsum;

struct TableProduct {
    const ValueTable* tab;
    const CorrelationQuery* q;
    cplx operator()(int64_t n) const {
        cplx prod{1.0, 0.0};
        for (size_t j = 0; j < q->shifts.size(); ++j) {
            int64_t k = q->exponents[j];
            if (k == 0) continue;
            cplx v = tab->at(n + q->shifts[j]);
            if (k < 0) {
                v = std::conj(v);
                k = -k;
            }
            cplx pw = v;
            for (int64_t i = 1; i < k; ++i) pw *= v;
            prod *= pw;
        }
        return prod;
    }
};

struct PhaseProduct {
    double t;
    const CorrelationQuery* q;
    cplx operator()(int64_t n) const {
        double acc = 0.0;
        for (size_t j = 0; j < q->shifts.size(); ++j) {
            int64_t k = q->exponents[j];
            if (k == 0) continue;
            int64_t m = n + q->shifts[j];
            if (m <= 0) return {0.0, 0.0};  // zero extension
            acc += static_cast<double>(k) * std::log(static_cast<double>(m));
        }
        return e_rad(t * acc);
    }
};

struct RealTwist {
    double alpha;
    cplx operator()(int64_t n) const { return e_rev(-alpha * static_cast<double>(n)); }
};

struct RationalTwist {
    std::vector<cplx> roots;  // roots[r] = e(-num*r/den)
    int64_t den;
    RationalTwist(int64_t num, int64_t den_) : den(den_) {
        roots.resize(static_cast<size_t>(den));
        for (int64_t r = 0; r < den; ++r)
            roots[static_cast<size_t>(r)] =
                e_rev(-static_cast<double>(num % den) * static_cast<double>(r) /
                      static_cast<double>(den));
    }
    cplx operator()(int64_t n) const { return roots[static_cast<size_t>(n % den)]; }
};

template <class Term>
cplx one_window(Term&& term, AveragingMode mode, int64_t N, int threads) {
    if (N < 1) throw config_error("window size must be >= 1");
    wsum r = mode == AveragingMode::cesaro
                 ? detail::block_weighted_sum(1, N, threads, term, [](int64_t) { return 1.0; })
                 : detail::block_weighted_sum(1, N, threads, term,
                                              [](int64_t n) { return 1.0 / static_cast<double>(n); });
    return r.s / r.w;
}

// Windows share full 4096-blocks; each window's ragged tail is recomputed so
// the result is bit-identical with a standalone one_window call.
template <class Term>
std::vector<std::pair<int64_t, cplx>> window_series(Term&& term, AveragingMode mode,
                                                    const std::vector<int64_t>& windows,
                                                    int threads) {
    int64_t nmax = windows.back();
    int64_t nblocks = (nmax + kBlock - 1) / kBlock;
    auto weight = [mode](int64_t n) {
        return mode == AveragingMode::cesaro ? 1.0 : 1.0 / static_cast<double>(n);
    };
    std::vector<wsum> partial(static_cast<size_t>(nblocks));
    detail::parallel_blocks(nblocks, threads, [&](int64_t b) {
        int64_t blo = 1 + b * kBlock;
        int64_t bhi = std::min(nmax, blo + kBlock - 1);
        cplx s{0.0, 0.0};
        double w = 0.0;
        for (int64_t n = blo; n <= bhi; ++n) {
            double wn = weight(n);
            s += wn * term(n);
            w += wn;
        }
        partial[static_cast<size_t>(b)] = {s, w};
    });
    std::vector<std::pair<int64_t, cplx>> out;
    out.reserve(windows.size());
    for (int64_t N : windows) {
        int64_t nfull = N / kBlock;
        std::vector<wsum> v(partial.begin(), partial.begin() + nfull);
        if (nfull * kBlock < N) {
            cplx s{0.0, 0.0};
            double w = 0.0;
            for (int64_t n = nfull * kBlock + 1; n <= N; ++n) {
                double wn = weight(n);
                s += wn * term(n);
                w += wn;
            }
            v.push_back({s, w});
        }
        wsum r = detail::pairwise_reduce(v);
        out.push_back({N, r.s / r.w});
    }
    return out;
}

void require_headroom(const Sequence& a, const CorrelationQuery& q, int64_t N) {
    if (!a.analytic() && N + q.max_shift() > a.limit())
        throw config_error("value table too small: need headroom up to N + max shift");
}

template <class F>
auto with_product(const Sequence& a, const CorrelationQuery& q, F&& f) {
    if (a.analytic()) return f(PhaseProduct{*a.phase_t, &q});
    return f(TableProduct{a.table, &q});
}

}  // namespace

cplx window_average(const Sequence& a, AveragingMode mode, int64_t N, int threads) {
    if (!a.analytic() && N > a.limit()) throw config_error("value table shorter than window");
    return one_window([&](int64_t n) { return a.at(n); }, mode, N, threads);
}

cplx correlation(const Sequence& a, const CorrelationQuery& q, int64_t N, int threads) {
    q.validate();
    require_headroom(a, q, N);
    return with_product(a, q, [&](auto term) { return one_window(term, q.mode, N, threads); });
}

std::vector<std::pair<int64_t, cplx>> correlation_series(const Sequence& a,
                                                         const CorrelationQuery& q,
                                                         const WindowSchedule& schedule,
                                                         int threads) {
    q.validate();
    schedule.validate();
    require_headroom(a, q, schedule.windows.back());
    return with_product(
        a, q, [&](auto term) { return window_series(term, q.mode, schedule.windows, threads); });
}

cplx twisted_correlation(const Sequence& a, double alpha, const CorrelationQuery& q, int64_t N,
                         int threads) {
    q.validate();
    require_headroom(a, q, N);
    return with_product(a, q, [&](auto term) {
        RealTwist tw{alpha};
        return one_window([&](int64_t n) { return tw(n) * term(n); }, q.mode, N, threads);
    });
}

cplx twisted_correlation(const Sequence& a, int64_t alpha_num, int64_t alpha_den,
                         const CorrelationQuery& q, int64_t N, int threads) {
    if (alpha_den < 1) throw config_error("twist denominator must be >= 1");
    q.validate();
    require_headroom(a, q, N);
    return with_product(a, q, [&](auto term) {
        RationalTwist tw(alpha_num, alpha_den);
        return one_window([&](int64_t n) { return tw(n) * term(n); }, q.mode, N, threads);
    });
}

cplx window_average_abel(const Sequence& a, int64_t N) {
    if (N < 1) throw config_error("window size must be >= 1");
    // sum a(n)/n = sum_{n<N} A(n)*(1/n - 1/(n+1)) + A(N)/N with A the prefix sum
    cplx acc{0.0, 0.0}, prefix{0.0, 0.0};
    double H = 0.0;
    for (int64_t n = 1; n <= N; ++n) {
        prefix += a.at(n);
        double dn = static_cast<double>(n);
        H += 1.0 / dn;
        if (n < N)
            acc += prefix * (1.0 / dn - 1.0 / (dn + 1.0));
        else
            acc += prefix / dn;
    }
    return acc / H;
}

}  // namespace mfl
