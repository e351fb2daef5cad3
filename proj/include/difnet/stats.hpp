#pragma once

#include <vector>

namespace difnet::stats {

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
/// Series for x < a + 1, continued fraction otherwise; relative error
/// below 1e-10 over the parameter range used here.
double regularized_gamma_upper(double a, double x);

/// Upper-tail probability of a chi-square(df) variable at `value`.
double chi_square_upper_tail(double value, int df);

/// Likelihood-ratio test p-value for nested models. Deviance
/// 2*(ll_full - ll_restricted) is clamped at zero to absorb solver
/// jitter; a deviance below -1e-9 is rejected as a caller bug.
double lrt_pvalue(double ll_restricted, double ll_full, int df);

/// Benjamini-Hochberg step-up adjusted p-values, returned in the
/// input order.
std::vector<double> bh_adjust(const std::vector<double>& pvalues);

} // namespace difnet::stats
