#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "sysmem/errors.hpp"

namespace sysmem::stats {

enum class Alternative { less, greater, two_sided };

inline const char* to_string(Alternative a) {
    switch (a) {
        case Alternative::less: return "less";
        case Alternative::greater: return "greater";
        case Alternative::two_sided: return "two_sided";
    }
    return "?";
}

enum class StatMethod { binomial_exact, z_proportion };

inline const char* to_string(StatMethod m) {
    return m == StatMethod::binomial_exact ? "binomial_exact" : "z_proportion";
}

struct TestResult {
    double p_value = 1.0;
    double statistic = 0.0;
    StatMethod method = StatMethod::binomial_exact;
    Alternative alternative = Alternative::two_sided;
};

/// Binomial(n, p) pmf at k via log-gamma; exact at small n, stable at large.
inline double binomial_pmf(std::uint64_t k, std::uint64_t n, double p) {
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    const auto kd = static_cast<double>(k);
    const auto nd = static_cast<double>(n);
    const double log_pmf = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
                           std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
                           (nd - kd) * std::log1p(-p);
    return std::exp(log_pmf);
}

/// Exact tail probability under Binomial(trials, null_p). The two-sided
/// p-value sums every outcome whose pmf does not exceed the observed one.
inline TestResult binomial_exact_test(std::uint64_t successes, std::uint64_t trials, double null_p,
                                      Alternative alternative) {
    if (trials < 1 || successes > trials)
        throw validation_error(errc::bad_counts,
                               "need 0 <= successes <= trials with trials >= 1");
    if (!(null_p >= 0.0 && null_p <= 1.0))
        throw validation_error(errc::rate_out_of_range, "null probability must lie in [0,1]");

    double p = 0.0;
    switch (alternative) {
        case Alternative::less:
            for (std::uint64_t k = 0; k <= successes; ++k) p += binomial_pmf(k, trials, null_p);
            break;
        case Alternative::greater:
            for (std::uint64_t k = successes; k <= trials; ++k) p += binomial_pmf(k, trials, null_p);
            break;
        case Alternative::two_sided: {
            const double observed = binomial_pmf(successes, trials, null_p);
            const double cutoff = observed * (1.0 + 1e-7);  // guard against round-off ties
            for (std::uint64_t k = 0; k <= trials; ++k) {
                const double pk = binomial_pmf(k, trials, null_p);
                if (pk <= cutoff) p += pk;
            }
            break;
        }
    }
    return {std::clamp(p, 0.0, 1.0), static_cast<double>(successes),
            StatMethod::binomial_exact, alternative};
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// One-proportion z test: z = (p_hat - null_p) / sqrt(null_p (1-null_p) / n).
inline TestResult proportion_z_test(std::uint64_t successes, std::uint64_t trials, double null_p,
                                    Alternative alternative) {
    if (trials < 1 || successes > trials)
        throw validation_error(errc::bad_counts,
                               "need 0 <= successes <= trials with trials >= 1");
    if (!(null_p > 0.0 && null_p < 1.0))
        throw validation_error(errc::degenerate_null,
                               "null probability must lie strictly in (0,1)");

    const double p_hat = static_cast<double>(successes) / static_cast<double>(trials);
    const double se = std::sqrt(null_p * (1.0 - null_p) / static_cast<double>(trials));
    const double z = (p_hat - null_p) / se;

    double p = 1.0;
    switch (alternative) {
        case Alternative::less: p = normal_cdf(z); break;
        case Alternative::greater: p = 1.0 - normal_cdf(z); break;
        case Alternative::two_sided: p = std::erfc(std::abs(z) / std::sqrt(2.0)); break;
    }
    return {std::clamp(p, 0.0, 1.0), z, StatMethod::z_proportion, alternative};
}

}  // namespace sysmem::stats
