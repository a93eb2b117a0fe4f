#include "mfl/spectral.hpp"

#include <algorithm>
#include <numeric>

namespace mfl {

std::vector<CorrelationQuery> default_query_set(AveragingMode mode) {
    std::vector<CorrelationQuery> out;
    for (int64_t n = -3; n <= 3; ++n)
        for (int64_t k : {-1, 1}) {
            CorrelationQuery q;
            q.shifts = {n};
            q.exponents = {k};
            q.mode = mode;
            out.push_back(std::move(q));
        }
    for (int64_t n1 = -3; n1 <= 3; ++n1)
        for (int64_t n2 = n1 + 1; n2 <= 3; ++n2)
            for (int64_t k1 : {-1, 1})
                for (int64_t k2 : {-1, 1}) {
                    CorrelationQuery q;
                    q.shifts = {n1, n2};
                    q.exponents = {k1, k2};
                    q.mode = mode;
                    out.push_back(std::move(q));
                }
    return out;
}

namespace {

ProbeResult probe_impl(const Sequence& a, double alpha, int64_t num, int64_t den,
                       const std::vector<CorrelationQuery>& queries,
                       const WindowSchedule& schedule, int threads) {
    if (queries.empty()) throw config_error("spectral probe needs at least one query");
    schedule.validate();
    ProbeResult best;
    best.alpha = alpha;
    best.alpha_num = num;
    best.alpha_den = den;
    best.window = schedule.windows.back();
    for (const auto& q : queries) {
        std::vector<std::pair<int64_t, double>> trend;
        trend.reserve(schedule.windows.size());
        for (int64_t N : schedule.windows) {
            cplx v = den > 0 ? twisted_correlation(a, num, den, q, N, threads)
                             : twisted_correlation(a, alpha, q, N, threads);
            trend.push_back({N, std::abs(v)});
        }
        double mag = trend.back().second;
        if (mag > best.magnitude || best.trend.empty()) {
            best.magnitude = mag;
            best.best_query = q;
            best.trend = std::move(trend);
        }
    }
    bool nondec = true;
    size_t m = best.trend.size();
    for (size_t i = m > 3 ? m - 3 : 0; i + 1 < m; ++i)
        if (best.trend[i + 1].second < best.trend[i].second) nondec = false;
    best.lights_up = best.magnitude >= 0.05 && nondec;
    return best;
}

}  // namespace

ProbeResult spectral_probe(const Sequence& a, double alpha,
                           const std::vector<CorrelationQuery>& queries,
                           const WindowSchedule& schedule, int threads) {
    return probe_impl(a, alpha, 0, 0, queries, schedule, threads);
}

ProbeResult spectral_probe(const Sequence& a, int64_t alpha_num, int64_t alpha_den,
                           const std::vector<CorrelationQuery>& queries,
                           const WindowSchedule& schedule, int threads) {
    if (alpha_den < 1) throw config_error("probe denominator must be >= 1");
    double alpha = static_cast<double>(alpha_num) / static_cast<double>(alpha_den);
    return probe_impl(a, alpha, alpha_num, alpha_den, queries, schedule, threads);
}

double ap_discrepancy(const Sequence& a, int64_t q, int64_t r, int64_t N, AveragingMode mode,
                      int threads) {
    if (q < 2 || r < 0 || r >= q) throw config_error("ap discrepancy needs q >= 2, 0 <= r < q");
    auto weight_of = [mode](int64_t n) {
        return mode == AveragingMode::cesaro ? 1.0 : 1.0 / static_cast<double>(n);
    };
    int64_t Nprog = mode == AveragingMode::cesaro ? N / q : N;
    if (!a.analytic() && q * Nprog + r > a.limit())
        throw config_error("ap discrepancy: table too small for the progression term");
    if (Nprog < 1) throw config_error("ap discrepancy: window too small for q");
    auto prog = detail::block_weighted_sum(
        1, Nprog, threads, [&](int64_t n) { return a.at(q * n + r); }, weight_of);
    auto plain = detail::block_weighted_sum(
        1, N, threads, [&](int64_t n) { return a.at(n); }, weight_of);
    return std::abs(prog.s / prog.w - plain.s / plain.w);
}

std::vector<ProbeResult> rational_scan(const Sequence& a, int64_t Q_max,
                                       const std::vector<CorrelationQuery>& queries,
                                       const WindowSchedule& schedule, int threads) {
    if (Q_max < 2) throw config_error("rational scan needs Q_max >= 2");
    std::vector<ProbeResult> out;
    for (int64_t b = 1; b <= Q_max; ++b)
        for (int64_t num = 0; num < b; ++num) {
            if (std::gcd(num, b) != 1 && !(num == 0 && b == 1)) continue;
            out.push_back(spectral_probe(a, num, b, queries, schedule, threads));
        }
    std::stable_sort(out.begin(), out.end(), [](const ProbeResult& x, const ProbeResult& y) {
        return x.magnitude > y.magnitude;
    });
    return out;
}

double stationarity_defect(const Sequence& a, const CorrelationQuery& q, int64_t r, int64_t N,
                           int threads) {
    if (r < 1) throw config_error("stationarity defect needs r >= 1");
    CorrelationQuery dilated = q;
    for (auto& s : dilated.shifts) s *= r;
    cplx base = correlation(a, q, N, threads);
    cplx dil = correlation(a, dilated, N, threads);
    return std::abs(base - dil);
}

std::vector<ProbeResult> divisibility_probe(const Sequence& a, double alpha, int64_t r,
                                            const std::vector<CorrelationQuery>& queries,
                                            const WindowSchedule& schedule, int threads) {
    if (r < 1) throw config_error("divisibility probe needs r >= 1");
    if (std::abs(a.at(r)) <= 1e-12)
        throw config_error("divisibility probe requires f(r) != 0, got f(" + std::to_string(r) +
                           ") = 0");
    std::vector<ProbeResult> out;
    for (int64_t k = 0; k < r; ++k) {
        double target = (alpha + static_cast<double>(k)) / static_cast<double>(r);
        out.push_back(spectral_probe(a, target, queries, schedule, threads));
    }
    std::stable_sort(out.begin(), out.end(), [](const ProbeResult& x, const ProbeResult& y) {
        return x.magnitude > y.magnitude;
    });
    return out;
}

double ceslog_agreement(const Sequence& a, std::vector<CorrelationQuery> queries, int64_t N,
                        int threads) {
    if (queries.empty()) throw config_error("agreement check needs at least one query");
    double worst = 0.0;
    for (auto& q : queries) {
        q.mode = AveragingMode::cesaro;
        cplx ces = correlation(a, q, N, threads);
        q.mode = AveragingMode::logarithmic;
        cplx lg = correlation(a, q, N, threads);
        worst = std::max(worst, std::abs(ces - lg));
    }
    return worst;
}

std::vector<HalaszPoint> halasz_drift(const Sequence& a, double t, const WindowSchedule& schedule,
                                      int threads) {
    schedule.validate();
    std::vector<HalaszPoint> out;
    for (int64_t N : schedule.windows) {
        cplx mean = window_average(a, AveragingMode::cesaro, N, threads);
        cplx residual = mean * e_rad(-t * std::log(static_cast<double>(N)));
        HalaszPoint pt;
        pt.N = N;
        pt.residual = residual;
        pt.modulus = std::abs(residual);
        if (!out.empty() && pt.modulus > 0 && out.back().modulus > 0)
            pt.phase_increment = std::arg(residual / out.back().residual);
        out.push_back(pt);
    }
    return out;
}

}  // namespace mfl
