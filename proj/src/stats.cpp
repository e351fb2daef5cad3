#include "difnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace difnet::stats {

namespace {

// P(a, x) by power series.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by modified Lentz continued fraction.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double regularized_gamma_upper(double a, double x) {
    if (a <= 0.0) throw std::invalid_argument("regularized_gamma_upper: a must be positive");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_upper: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_upper_tail(double value, int df) {
    if (df < 1) throw std::invalid_argument("chi_square_upper_tail: df must be >= 1");
    if (value <= 0.0) return 1.0;
    return regularized_gamma_upper(0.5 * df, 0.5 * value);
}

double lrt_pvalue(double ll_restricted, double ll_full, int df) {
    if (df < 1) throw std::invalid_argument("lrt_pvalue: df must be >= 1");
    double deviance = 2.0 * (ll_full - ll_restricted);
    if (deviance < -1e-9)
        throw std::invalid_argument("lrt_pvalue: full-model log-likelihood below restricted model");
    deviance = std::max(deviance, 0.0);
    return chi_square_upper_tail(deviance, df);
}

std::vector<double> bh_adjust(const std::vector<double>& pvalues) {
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    std::vector<double> adjusted(n);
    double running_min = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const double scaled = pvalues[order[k]] * static_cast<double>(n) / static_cast<double>(k + 1);
        running_min = std::min(running_min, std::min(scaled, 1.0));
        adjusted[order[k]] = running_min;
    }
    return adjusted;
}

} // namespace difnet::stats
