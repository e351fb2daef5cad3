#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace difnet::logitdif {

struct LogisticFit {
    Eigen::VectorXd coefficients;
    double log_likelihood = 0.0;
    bool converged = false;
    bool separation = false;
    int iterations = 0;
};

/// Maximum-likelihood logistic regression by iteratively reweighted
/// least squares. `features` is the full design matrix including the
/// intercept column. Converged when the largest coefficient change
/// drops below 1e-8 within 50 iterations. A coefficient passing |30|
/// while the deviance is still falling marks separation (converged
/// stays false). Rank-deficient designs throw std::invalid_argument.
LogisticFit fit_logistic(const Eigen::MatrixXd& features,
                         const std::vector<std::uint8_t>& labels);

} // namespace difnet::logitdif
