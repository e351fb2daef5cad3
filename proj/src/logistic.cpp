#include "difnet/logistic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace difnet::logitdif {

namespace {

inline double sigmoid_clipped(double t) {
    double p;
    if (t >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-t));
    } else {
        const double e = std::exp(t);
        p = e / (1.0 + e);
    }
    return std::min(std::max(p, 1e-12), 1.0 - 1e-12);
}

double log_likelihood(const Eigen::VectorXd& eta, const std::vector<std::uint8_t>& labels) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = sigmoid_clipped(eta(i));
        ll += labels[i] ? std::log(mu) : std::log(1.0 - mu);
    }
    return ll;
}

} // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& features,
                         const std::vector<std::uint8_t>& labels) {
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    if (n != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("fit_logistic: feature rows (" + std::to_string(n) +
                                    ") and label count (" + std::to_string(labels.size()) +
                                    ") differ");
    if (n < p) throw std::invalid_argument("fit_logistic: fewer rows than coefficients");

    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(features);
        if (qr.rank() < p)
            throw std::invalid_argument("fit_logistic: rank-deficient design matrix");
    }

    LogisticFit fit;
    fit.coefficients = Eigen::VectorXd::Zero(p);

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double previous_ll = log_likelihood(eta, labels);

    constexpr int max_iterations = 50;
    constexpr double tolerance = 1e-8;
    constexpr double ridge = 1e-10;
    constexpr double separation_bound = 30.0;

    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::VectorXd mu(n), w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu(i) = sigmoid_clipped(eta(i));
            w(i) = mu(i) * (1.0 - mu(i));
            z(i) = eta(i) + (static_cast<double>(labels[i]) - mu(i)) / w(i);
        }

        const Eigen::MatrixXd xw = features.array().colwise() * w.array();
        Eigen::MatrixXd normal = features.transpose() * xw;
        normal.diagonal().array() += ridge;
        const Eigen::VectorXd rhs = features.transpose() * (w.asDiagonal() * z);
        const Eigen::VectorXd next = normal.ldlt().solve(rhs);

        const double change = (next - fit.coefficients).cwiseAbs().maxCoeff();
        fit.coefficients = next;
        eta.noalias() = features * fit.coefficients;
        fit.iterations = iter;

        const double ll = log_likelihood(eta, labels);
        if (fit.coefficients.cwiseAbs().maxCoeff() > separation_bound && ll > previous_ll) {
            fit.separation = true;
            fit.log_likelihood = ll;
            return fit;
        }
        previous_ll = ll;

        if (change < tolerance) {
            fit.converged = true;
            break;
        }
    }

    fit.log_likelihood = log_likelihood(eta, labels);
    return fit;
}

} // namespace difnet::logitdif
