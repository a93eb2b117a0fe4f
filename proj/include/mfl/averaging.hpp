#pragma once

#include "mfl/mfunc.hpp"

namespace mfl {

enum class AveragingMode { cesaro, logarithmic };

// f^k means conj(f)^|k| for k < 0; exponent 0 drops the factor.
struct CorrelationQuery {
    std::vector<int64_t> shifts;
    std::vector<int64_t> exponents;
    AveragingMode mode = AveragingMode::cesaro;

    void validate() const;
    int64_t max_shift() const;
    std::string describe() const;  // e.g. "k=(-1,1) n=(0,1)"
};

struct WindowSchedule {
    enum class Generator { explicit_list, geometric, power_of_scale };
    Generator generator = Generator::explicit_list;
    double base = 0.0;    // geometric ratio
    double coef_a = 1.0;  // power-of-scale: N = floor(a * S^power)
    double power = 1.0;
    std::vector<int64_t> scales;
    std::vector<int64_t> windows;

    static WindowSchedule explicit_windows(std::vector<int64_t> ws);
    static WindowSchedule geometric(int64_t first, int64_t last, double base);
    static WindowSchedule power_of_scale(double a, double power, std::vector<int64_t> scales);
    void validate() const;
};

// The spec-or-table argument of the statistics: either a value table or an
// analytic pure-phase function f(x) = exp(i*t*ln x) (which needs no table
// and honours the zero extension at x <= 0).
struct Sequence {
    const ValueTable* table = nullptr;
    std::optional<double> phase_t;

    Sequence(const ValueTable& t) : table(&t) {}
    Sequence(const MultiplicativeSpec& s) : phase_t(s.pure_phase_t) {
        if (!phase_t)
            throw config_error("spec '" + s.label +
                               "' has no analytic phase; evaluate it into a table first");
    }
    bool analytic() const { return phase_t.has_value(); }
    int64_t limit() const { return table ? table->limit : std::numeric_limits<int64_t>::max(); }
    cplx at(int64_t n) const {
        if (table) return table->at(n);
        if (n <= 0) return {0.0, 0.0};
        return e_rad(*phase_t * std::log(static_cast<double>(n)));
    }
};

cplx window_average(const Sequence& a, AveragingMode mode, int64_t N, int threads = 0);
cplx correlation(const Sequence& a, const CorrelationQuery& q, int64_t N, int threads = 0);
std::vector<std::pair<int64_t, cplx>> correlation_series(const Sequence& a,
                                                         const CorrelationQuery& q,
                                                         const WindowSchedule& schedule,
                                                         int threads = 0);
// mean of e(-n*alpha) * product, with e(t) = exp(2*pi*i*t)
cplx twisted_correlation(const Sequence& a, double alpha, const CorrelationQuery& q, int64_t N,
                         int threads = 0);
// exact rational twist alpha = num/den (root-of-unity table, no drift)
cplx twisted_correlation(const Sequence& a, int64_t alpha_num, int64_t alpha_den,
                         const CorrelationQuery& q, int64_t N, int threads = 0);

// Independent logarithmic average via Abel (partial) summation; cross-check
// for the direct weighted sum.
cplx window_average_abel(const Sequence& a, int64_t N);

}  // namespace mfl
