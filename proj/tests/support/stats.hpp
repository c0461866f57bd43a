#pragma once

// Test-side statistics helpers: chi-square goodness of fit against known
// cell probabilities, with the p-value from the regularized incomplete
// gamma function (series + continued fraction).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace teststats {

inline double gamma_series_p(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_cf_q(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Q(a, x) = upper regularized incomplete gamma.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
    return gamma_cf_q(a, x);
}

// Survival function of the chi-square distribution.
inline double chi_square_pvalue(double stat, double dof) {
    return gamma_q(0.5 * dof, 0.5 * stat);
}

inline double chi_square_stat(const std::vector<std::uint64_t>& counts,
                              const std::vector<double>& probs,
                              std::uint64_t total) {
    if (counts.size() != probs.size()) throw std::invalid_argument("size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = probs[i] * static_cast<double>(total);
        const double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

// Uniform cells convenience.
inline double uniform_chi_square_pvalue(const std::vector<std::uint64_t>& counts,
                                        std::uint64_t total) {
    const std::vector<double> probs(counts.size(), 1.0 / counts.size());
    return chi_square_pvalue(chi_square_stat(counts, probs, total),
                             static_cast<double>(counts.size() - 1));
}

}  // namespace teststats
