#pragma once

#include <json.hpp>

#include "mfl/common.hpp"

namespace mfl {

inline constexpr int64_t kIndexInfinity = std::numeric_limits<int64_t>::max();

struct LimitPrediction {
    enum class Kind { exact_scalar, oscillatory_integral };
    Kind kind = Kind::exact_scalar;
    cplx scalar{0.0, 0.0};
    // integral case: value is the integral over (0,1] of exp(i*beta*x^(-d))
    double beta = 0.0;
    int d = 0;
    double alpha = 0.0;
    // The statement-level exponent sum(k_j * n_j^d) and the model-level
    // exponent sum(k_j * binomial(n_j, d)); they differ by d! in general.
    // Both are carried; nothing picks silently between them.
    long long exponent_variantA = 0;
    long long exponent_variantB = 0;
    bool variant_discrepancy = false;

    nlohmann::json to_json() const;
};

struct MixtureWeights {
    double c = 0.0;
    std::vector<std::pair<int64_t, double>> weights;  // (level d, mass)
    double tail = 0.0;                                // mass beyond the listed levels
};

// minimal i >= 0 with sum(k_j * n_j^i) != 0 (0^0 = 1); equal shifts are
// merged first; kIndexInfinity when every moment vanishes
int64_t min_index_i0(const std::vector<int64_t>& k, const std::vector<int64_t>& n);

double mrt_log_limit(double c, const std::vector<int64_t>& k, const std::vector<int64_t>& n);
int mrt_cesaro_band_limit(int64_t d, const std::vector<int64_t>& k,
                          const std::vector<int64_t>& n);
LimitPrediction mrt_cesaro_alpha_limit(double alpha, int d, const std::vector<int64_t>& k,
                                       const std::vector<int64_t>& n);
cplx oscillatory_integral(double beta, int d, double tol);
cplx riemann_oracle(double beta, int d, int64_t M, int threads = 0);
int unipotent_integral(int64_t d, const std::vector<int64_t>& k, const std::vector<int64_t>& n);
MixtureWeights mixture_weights(double c, int64_t levels);
double mixture_limit(double c, const std::vector<int64_t>& k, const std::vector<int64_t>& n,
                     int64_t truncation = 0);

}  // namespace mfl
