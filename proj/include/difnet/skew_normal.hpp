#pragma once

#include "difnet/rng.hpp"

namespace difnet::simgen {

/// One draw from the Fernandez-Steel two-piece skew normal with
/// skewness parameter xi, re-standardized so the returned variable has
/// the requested mean and standard deviation (the `rsnorm` convention).
/// xi = 1 is the symmetric normal case.
double sample_skew_normal(double mean, double sd, double xi, Rng& rng);

/// Skew-normal draw clamped to [lower, upper]. Clamping, not rejection:
/// out-of-range draws are overwritten with the violated bound.
double sample_truncated_skew_normal(double mean, double sd, double xi,
                                    double lower, double upper, Rng& rng);

} // namespace difnet::simgen
