#include "difnet/skew_normal.hpp"

#include "difnet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace difnet::simgen {

double sample_skew_normal(double mean, double sd, double xi, Rng& rng) {
    if (sd <= 0.0) throw ConfigError("skew normal: sd must be positive");
    if (xi <= 0.0) throw ConfigError("skew normal: xi must be positive");

    // Two-piece composition: the positive half-normal scaled by xi with
    // probability xi^2/(xi^2+1), the negative one scaled by 1/xi otherwise.
    const double p_positive = xi * xi / (xi * xi + 1.0);
    const double u = rng.uniform();
    const double half_normal = std::fabs(rng.normal());
    const double raw = (u < p_positive) ? half_normal * xi : -half_normal / xi;

    // Standardize the two-piece variable to zero mean, unit variance.
    const double m1 = 2.0 / std::sqrt(2.0 * 3.14159265358979323846);
    const double mu = m1 * (xi - 1.0 / xi);
    const double sigma =
        std::sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0);

    return mean + sd * (raw - mu) / sigma;
}

double sample_truncated_skew_normal(double mean, double sd, double xi,
                                    double lower, double upper, Rng& rng) {
    if (!(lower < upper)) throw ConfigError("skew normal: lower bound must be below upper bound");
    const double x = sample_skew_normal(mean, sd, xi, rng);
    return std::clamp(x, lower, upper);
}

} // namespace difnet::simgen
