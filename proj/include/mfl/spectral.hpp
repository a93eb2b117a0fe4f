#pragma once

#include "mfl/averaging.hpp"

namespace mfl {

struct ProbeResult {
    double alpha = 0.0;
    int64_t alpha_num = 0, alpha_den = 0;  // set when the probe point is rational
    double magnitude = 0.0;
    CorrelationQuery best_query;
    int64_t window = 0;
    std::vector<std::pair<int64_t, double>> trend;  // best query's |value| per window
    bool lights_up = false;  // >= 0.05 at the top window and nondecreasing over the last 3
};

struct HalaszPoint {
    int64_t N = 0;
    cplx residual{0.0, 0.0};  // Cesaro mean divided by N^{it}
    double modulus = 0.0;
    double phase_increment = 0.0;  // vs the previous window, radians
};

// all (k, n) with 1 or 2 factors, |shift| <= 3, exponents in {-1, 1}
std::vector<CorrelationQuery> default_query_set(AveragingMode mode);

ProbeResult spectral_probe(const Sequence& a, double alpha,
                           const std::vector<CorrelationQuery>& queries,
                           const WindowSchedule& schedule, int threads = 0);
ProbeResult spectral_probe(const Sequence& a, int64_t alpha_num, int64_t alpha_den,
                           const std::vector<CorrelationQuery>& queries,
                           const WindowSchedule& schedule, int threads = 0);
double ap_discrepancy(const Sequence& a, int64_t q, int64_t r, int64_t N, AveragingMode mode,
                      int threads = 0);
std::vector<ProbeResult> rational_scan(const Sequence& a, int64_t Q_max,
                                       const std::vector<CorrelationQuery>& queries,
                                       const WindowSchedule& schedule, int threads = 0);
double stationarity_defect(const Sequence& a, const CorrelationQuery& q, int64_t r, int64_t N,
                           int threads = 0);
std::vector<ProbeResult> divisibility_probe(const Sequence& a, double alpha, int64_t r,
                                            const std::vector<CorrelationQuery>& queries,
                                            const WindowSchedule& schedule, int threads = 0);
double ceslog_agreement(const Sequence& a, std::vector<CorrelationQuery> queries, int64_t N,
                        int threads = 0);
std::vector<HalaszPoint> halasz_drift(const Sequence& a, double t, const WindowSchedule& schedule,
                                      int threads = 0);

}  // namespace mfl
