// Precision-safe oscillatory sums  (1/|W|) Σ_{n∈W} exp(i·N·g(n))  for phases
// g(x) = c0·log x + Σ c_i x^{-i}, with |N·g| allowed up to 1e15.  Plain doubles
// lose the phase long before that, so evaluation switches to a two-term
// hi/lo representation once the product magnitude passes 2^33.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfl/averaging.hpp"
#include "mfl/common.hpp"

namespace mfl {

struct LogPolyPhase {
    double c0 = 0.0;         // coefficient of log x
    std::vector<double> c;   // c[i-1] multiplies x^{-i}

    // Minimal index with a nonzero coefficient, counting c0 as index 0.
    // Returns -1 when every coefficient vanishes.
    int64_t i0() const;
};

// Two-term compensated real: value = hi + lo with |lo| <= ulp(hi)/2.
struct PhaseAccumulator {
    double hi = 0.0;
    double lo = 0.0;
};

namespace detail {

PhaseAccumulator dd_add(PhaseAccumulator a, PhaseAccumulator b);
PhaseAccumulator dd_add(PhaseAccumulator a, double b);
PhaseAccumulator dd_mul(PhaseAccumulator a, PhaseAccumulator b);
PhaseAccumulator dd_mul(PhaseAccumulator a, double b);
PhaseAccumulator dd_div(PhaseAccumulator a, PhaseAccumulator b);
PhaseAccumulator dd_ln(double x);  // x > 0; absolute error ~1e-23

}  // namespace detail

// N·g(n) reduced mod 2π into [0, 2π).  Throws capacity_error once the
// un-cancelled magnitude |N|·(|c0|·ln n + Σ|c_i| n^{-i}) exceeds 1e15.
double phase_eval(double N, const LogPolyPhase& g, int64_t n);

// Mode-weighted mean of exp(i·phase_eval(N,g,n)) over the integer range
// [a,b].  exp_sum(-N,...) == conj(exp_sum(N,...)) exactly.
cplx exp_sum(double N, const LogPolyPhase& g, int64_t a, int64_t b, AveragingMode mode,
             int threads = 0);

// Same machinery for shifted-log phases N·Σ_j k_j·log(n+n_j), which the
// inverse-power expansion of LogPolyPhase cannot represent near n = 1.
// Factors with n+n_j <= 0 contribute zero, matching the averaging module.
cplx query_exp_sum(double N, const std::vector<int64_t>& shifts,
                   const std::vector<int64_t>& exponents, int64_t a, int64_t b,
                   AveragingMode mode, int threads = 0);

// C3·((M/L^q)^{1/Q} + 1/M) with Q = 4·2^{q-2} - 2.
double vdc_bound(int q, double c, double L, double M, double C3);

struct DecayRow {
    double N = 0.0;
    int64_t L = 0;
    int64_t window_lo = 0;
    int64_t window_hi = 0;
    double abs_empirical = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    bool in_growth_window = true;
    std::string tag;  // "cesaro", "dyadic-sup d=0.1", ..., "log-direct"
};

struct DecayReport {
    std::vector<DecayRow> rows;
    double C3 = 0.0;  // fitted on the first row, then frozen
    int64_t i0 = 0;
    double max_ratio = 0.0;
    bool growth_window_ok = true;
};

// Decay experiment over a schedule of (N, L) pairs.  Cesàro mode measures
// |exp_sum| over [c·L, L]; logarithmic mode measures the sup of Cesàro means
// over dyadic blocks inside [L^δ, L^{1-δ}] for δ ∈ {0.1, 0.2, 0.3} plus the
// direct log-weighted mean over [1, L].  The bound column carries the vdc
// shape with C3 fitted once at the first row; schedules outside the growth
// window L < N^{1/i0} are flagged per row, never rejected.
DecayReport decay_experiment(const LogPolyPhase& g,
                             const std::vector<std::pair<double, int64_t>>& schedule, double c,
                             AveragingMode mode, int q, int threads = 0);

}  // namespace mfl
