#pragma once

#include "mfl/averaging.hpp"

namespace mfl {

struct PolarPrimeData {
    std::vector<uint32_t> p;
    std::vector<double> r;      // |f(p)|, in [0,1]
    std::vector<double> theta;  // arg f(p) in revolutions, in [-1/2, 1/2)
    double sum_one_minus_r_over_p = 0.0;
    double sum_theta_sq_over_p = 0.0;
};

struct DecompositionResult {
    MultiplicativeSpec f1;  // f below the threshold, tail phases removed above
    MultiplicativeSpec f2;  // the removed tail phases
    int64_t P_eps = 2;
    double tail_bound = 0.0;  // sum of theta_p^2/p over P_eps < p <= P_max
};

struct ANResult {
    double value = 0.0;                  // sum of theta_p/p over primes in [P_eps, N]
    double slow_variation_defect = 0.0;  // sup over a geometric grid in [N^c, N] of |A(x)-A(N)|
};

// theta in revolutions with the half-open convention: angle 1/2 maps to -1/2
double theta_rev(cplx v);

double distance_sq_partial(const MultiplicativeSpec& f, const MultiplicativeSpec& g, int64_t P);
PolarPrimeData polar_data(const MultiplicativeSpec& f, int64_t P);
ANResult A_of_N(const MultiplicativeSpec& f, int64_t P_eps, int64_t N, double c = 0.5);

double concentration_defect(const Sequence& a, int64_t N, double phase_rev, AveragingMode mode,
                            int threads = 0);
double concentration_defect(const MultiplicativeSpec& f, int64_t N, double phase_rev,
                            AveragingMode mode, int threads = 0);

DecompositionResult decompose(const MultiplicativeSpec& f, double eps, int64_t P_max);

double besicovitch_defect(const Sequence& a, const std::vector<cplx>& approx, double alpha_rev,
                          int64_t N, AveragingMode mode, int threads = 0);
double besicovitch_defect(const MultiplicativeSpec& f, const std::vector<cplx>& approx,
                          double alpha_rev, int64_t N, AveragingMode mode, int threads = 0);

}  // namespace mfl
