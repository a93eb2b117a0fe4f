#include "mfl/oracles.hpp"

#include <algorithm>
#include <map>

namespace mfl {

using json = nlohmann::json;

json LimitPrediction::to_json() const {
    if (kind == Kind::exact_scalar)
        return json{{"kind", "exact-scalar"}, {"scalar_re", scalar.real()},
                    {"scalar_im", scalar.imag()}};
    return json{{"kind", "oscillatory-integral"},
                {"beta", beta},
                {"d", d},
                {"exponent_variantA", exponent_variantA},
                {"exponent_variantB", exponent_variantB}};
}

namespace {

// shifts merged by summing coefficients; zero coefficients dropped
std::vector<std::pair<int64_t, int64_t>> merged(const std::vector<int64_t>& k,
                                                const std::vector<int64_t>& n) {
    if (k.empty() || k.size() != n.size())
        throw config_error("coefficient and shift lists must match and be nonempty");
    std::map<int64_t, int64_t> m;
    for (size_t j = 0; j < k.size(); ++j) m[n[j]] += k[j];
    std::vector<std::pair<int64_t, int64_t>> out;
    for (auto& [shift, coef] : m)
        if (coef != 0) out.push_back({shift, coef});
    return out;
}

__int128 ipow128(int64_t b, int64_t e) {
    __int128 r = 1;
    for (int64_t i = 0; i < e; ++i) r *= b;
    return r;
}

// generalized binomial(n, i) for integer n (possibly negative): falling
// factorial over i!, always an exact integer
__int128 binom128(int64_t n, int64_t i) {
    __int128 num = 1;
    for (int64_t t = 0; t < i; ++t) num *= (n - t);
    __int128 den = 1;
    for (int64_t t = 2; t <= i; ++t) den *= t;
    return num / den;
}

}  // namespace

int64_t min_index_i0(const std::vector<int64_t>& k, const std::vector<int64_t>& n) {
    auto terms = merged(k, n);
    if (terms.empty()) return kIndexInfinity;
    // distinct shifts with nonzero coefficients: some moment below the count
    // must survive (Vandermonde), so scanning i < ell suffices
    int64_t ell = static_cast<int64_t>(terms.size());
    for (int64_t i = 0; i < ell; ++i) {
        __int128 moment = 0;
        for (auto& [shift, coef] : terms)
            moment += static_cast<__int128>(coef) * (i == 0 ? 1 : ipow128(shift, i));
        if (moment != 0) return i;
    }
    return kIndexInfinity;
}

double mrt_log_limit(double c, const std::vector<int64_t>& k, const std::vector<int64_t>& n) {
    if (c <= 0) throw config_error("mrt_log_limit needs c > 0");
    int64_t i0 = min_index_i0(k, n);
    if (i0 == kIndexInfinity) return 1.0;
    if (static_cast<double>(i0) <= c) return 0.0;
    return 1.0 - c / static_cast<double>(i0);
}

int mrt_cesaro_band_limit(int64_t d, const std::vector<int64_t>& k,
                          const std::vector<int64_t>& n) {
    if (d < 0) throw config_error("band limit needs d >= 0");
    int64_t i0 = min_index_i0(k, n);
    return i0 == kIndexInfinity || i0 > d ? 1 : 0;
}

LimitPrediction mrt_cesaro_alpha_limit(double alpha, int d, const std::vector<int64_t>& k,
                                       const std::vector<int64_t>& n) {
    if (alpha <= 0 || d < 1) throw config_error("alpha-case limit needs alpha > 0, d >= 1");
    LimitPrediction out;
    out.alpha = alpha;
    out.d = d;
    int64_t i0 = min_index_i0(k, n);
    if (i0 != kIndexInfinity && i0 < d) {
        out.kind = LimitPrediction::Kind::exact_scalar;
        out.scalar = {0.0, 0.0};
        return out;
    }
    auto terms = merged(k, n);
    __int128 ka = 0, kb = 0;
    for (auto& [shift, coef] : terms) {
        ka += static_cast<__int128>(coef) * ipow128(shift, d);
        kb += static_cast<__int128>(coef) * binom128(shift, d);
    }
    out.exponent_variantA = static_cast<long long>(ka);
    out.exponent_variantB = static_cast<long long>(kb);
    out.variant_discrepancy = ka != kb;
    if (ka == 0 && kb == 0) {  // i0 > d: a constant phase integrates to 1
        out.kind = LimitPrediction::Kind::exact_scalar;
        out.scalar = {1.0, 0.0};
        return out;
    }
    out.kind = LimitPrediction::Kind::oscillatory_integral;
    out.beta = static_cast<double>(out.exponent_variantA) / std::pow(alpha, d);
    return out;
}

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlX[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                            0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                            0.9445750230732326, 0.9894009349916499};
constexpr double kGlW[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                            0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                            0.0622535239386479, 0.0271524594117541};

cplx panel_integral(double a, double b, double pexp) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx acc{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
        for (double sgn : {-1.0, 1.0}) {
            double t = mid + sgn * half * kGlX[i];
            acc += kGlW[i] * e_rad(t) * std::pow(t, -1.0 - pexp);
        }
    }
    return acc * half;
}

}  // namespace

cplx oscillatory_integral(double beta, int d, double tol) {
    if (!(tol >= 1e-12 && tol <= 1e-3))
        throw config_error("oscillatory integral tolerance must lie in [1e-12, 1e-3]");
    if (d < 1) throw config_error("oscillatory integral needs d >= 1");
    if (beta == 0.0) return {1.0, 0.0};
    if (beta < 0.0) return std::conj(oscillatory_integral(-beta, d, tol));

    // substitute t = beta * x^(-d):
    //   integral = (beta^(1/d)/d) * int_beta^inf exp(it) t^(-1-1/d) dt
    double pexp = 1.0 / d;
    double pref = std::pow(beta, pexp) / d;
    // cut where the remaining tail of the VALUE drops below tol/2
    double T = beta;
    {
        double target = tol / (2.0 * std::max(pref, 1e-300));
        // pref * 2 * T^(-1-p) <= tol/2
        T = std::max(beta, std::pow(2.0 / target, 1.0 / (1.0 + pexp)));
    }
    int64_t panels = static_cast<int64_t>((T - beta) / kTwoPi) + 1;
    T = beta + static_cast<double>(panels) * kTwoPi;

    std::vector<cplx> partial(static_cast<size_t>(panels));
    detail::parallel_blocks(panels, 0, [&](int64_t i) {
        double a = beta + static_cast<double>(i) * kTwoPi;
        partial[static_cast<size_t>(i)] = panel_integral(a, a + kTwoPi, pexp);
    });
    cplx body = detail::pairwise_reduce(partial);

    // two integration-by-parts terms of the tail int_T^inf exp(it) t^(-1-p) dt
    cplx eiT = e_rad(T);
    double Tm = std::pow(T, -1.0 - pexp);
    cplx tail = eiT * Tm * cplx{0.0, 1.0} + (1.0 + pexp) * eiT * Tm / T;
    return pref * (body + tail);
}

cplx riemann_oracle(double beta, int d, int64_t M, int threads) {
    if (M < 1000) throw config_error("riemann oracle needs M >= 1000");
    if (d < 1) throw config_error("riemann oracle needs d >= 1");
    auto r = detail::block_weighted_sum(
        1, M, threads,
        [&](int64_t n) {
            double ratio = static_cast<double>(M) / static_cast<double>(n);
            double pw = 1.0;
            for (int i = 0; i < d; ++i) pw *= ratio;
            return e_rad(beta * pw);
        },
        [](int64_t) { return 1.0; });
    return r.s / r.w;
}

int unipotent_integral(int64_t d, const std::vector<int64_t>& k, const std::vector<int64_t>& n) {
    if (d < 0) throw config_error("unipotent integral needs d >= 0");
    // binomial moment test: the level-d integral is 1 exactly when the
    // coefficients c_i = sum(k_j * binomial(n_j, i)) vanish for all i <= d
    auto terms = merged(k, n);
    for (int64_t i = 0; i <= d; ++i) {
        __int128 ci = 0;
        for (auto& [shift, coef] : terms) ci += static_cast<__int128>(coef) * binom128(shift, i);
        if (ci != 0) return 0;
    }
    return 1;
}

MixtureWeights mixture_weights(double c, int64_t levels) {
    if (c <= 0) throw config_error("mixture needs c > 0");
    MixtureWeights w;
    w.c = c;
    int64_t floor_c = static_cast<int64_t>(std::floor(c));
    int64_t ceil_c = static_cast<int64_t>(std::ceil(c));
    if (ceil_c < 1) ceil_c = 1;
    w.weights.push_back({floor_c, 1.0 - c / static_cast<double>(ceil_c)});
    int64_t top = ceil_c + levels;
    for (int64_t d = ceil_c; d < top; ++d)
        w.weights.push_back({d, c * (1.0 / static_cast<double>(d) -
                                     1.0 / static_cast<double>(d + 1))});
    w.tail = c / static_cast<double>(top);
    return w;
}

double mixture_limit(double c, const std::vector<int64_t>& k, const std::vector<int64_t>& n,
                     int64_t truncation) {
    int64_t i0 = min_index_i0(k, n);
    // finite i0: levels at and beyond i0 integrate to 0, so the sum is exact;
    // infinite i0: every level integrates to 1 and the explicit tail mass
    // belongs in full
    int64_t levels = truncation > 0 ? truncation
                     : i0 == kIndexInfinity
                         ? 64
                         : i0 + 1 - static_cast<int64_t>(std::ceil(c));
    auto w = mixture_weights(c, std::max<int64_t>(levels, 1));
    double acc = 0.0;
    for (auto& [d, mass] : w.weights)
        if (mass != 0.0 && unipotent_integral(d, k, n) == 1) acc += mass;
    if (i0 == kIndexInfinity) acc += w.tail;
    return acc;
}

}  // namespace mfl
