// Test-only reference implementations, independent of the library code
// they check.
#pragma once

#include "difnet/design.hpp"
#include "difnet/net.hpp"
#include "difnet/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracles {

// -----------------------------------------------------------------------
// Normal quantile (Acklam's rational approximation, refined with one
// Halley step against std::erfc), good to ~1e-15.
// -----------------------------------------------------------------------
inline double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("normal_quantile: p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley refinement.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

// -----------------------------------------------------------------------
// Skew-normal reference sampler via quantile inversion of the
// two-piece distribution (independent of the composition sampler in
// the library).
// -----------------------------------------------------------------------
inline double skew_normal_inverse_cdf(double u, double mean, double sd, double xi) {
    const double p_neg = 1.0 / (xi * xi + 1.0); // mass of the negative piece
    const double g = 2.0 / (xi + 1.0 / xi);
    double z;
    if (u < p_neg) {
        // F(z) = g/xi * Phi(z*xi) for z < 0
        z = normal_quantile(u * xi / g) / xi;
    } else {
        // F(z) = p_neg + g*xi*(Phi(z/xi) - 1/2) for z >= 0
        z = xi * normal_quantile(0.5 + (u - p_neg) / (g * xi));
    }
    const double m1 = std::sqrt(2.0 / M_PI);
    const double mu = m1 * (xi - 1.0 / xi);
    const double sigma =
        std::sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0);
    return mean + sd * (z - mu) / sigma;
}

// -----------------------------------------------------------------------
// Chi-square upper tail by Simpson integration of the transformed
// density (t = u^2 removes the df=1 singularity at the origin).
// -----------------------------------------------------------------------
inline double chi_square_upper_tail_quadrature(double x, int df) {
    if (x <= 0.0) return 1.0;
    const double k = 0.5 * df;
    auto integrand = [&](double u) {
        // density of chi2 at t = u^2, times dt = 2u du
        const double t = u * u;
        return 2.0 * u * std::exp((k - 1.0) * std::log(t) - 0.5 * t - k * std::log(2.0) -
                                  std::lgamma(k));
    };
    const double lo = std::sqrt(x);
    const double hi = std::max(lo + 20.0, 50.0);
    const int n = 200000; // even
    const double h = (hi - lo) / n;
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i) sum += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// -----------------------------------------------------------------------
// Nelder-Mead maximization of the logistic log-likelihood.
// -----------------------------------------------------------------------
inline double logistic_loglik(const Eigen::MatrixXd& x, const std::vector<std::uint8_t>& y,
                              const Eigen::VectorXd& beta) {
    double ll = 0.0;
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(sigma(eta)) and log(1 - sigma(eta)), stable forms
        const double t = eta(i);
        const double log_sig = t >= 0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
        const double log_one_minus = t >= 0 ? -t - std::log1p(std::exp(-t)) : -std::log1p(std::exp(t));
        ll += y[i] ? log_sig : log_one_minus;
    }
    return ll;
}

inline Eigen::VectorXd nelder_mead_logistic(const Eigen::MatrixXd& x,
                                            const std::vector<std::uint8_t>& y,
                                            int restarts = 3) {
    const int dim = static_cast<int>(x.cols());
    auto f = [&](const Eigen::VectorXd& b) { return -logistic_loglik(x, y, b); };

    Eigen::VectorXd best = Eigen::VectorXd::Zero(dim);
    double best_value = f(best);

    for (int restart = 0; restart < restarts; ++restart) {
        std::vector<Eigen::VectorXd> simplex(dim + 1, best);
        for (int i = 0; i < dim; ++i) simplex[i + 1](i) += 0.5;
        std::vector<double> values(dim + 1);
        for (int i = 0; i <= dim; ++i) values[i] = f(simplex[i]);

        for (int iter = 0; iter < 4000; ++iter) {
            std::vector<int> order(dim + 1);
            for (int i = 0; i <= dim; ++i) order[i] = i;
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return values[a] < values[b]; });
            if (values[order[dim]] - values[order[0]] < 1e-13) break;

            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
            for (int i = 0; i < dim; ++i) centroid += simplex[order[i]];
            centroid /= dim;
            const int worst = order[dim];

            Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
            double fr = f(reflected);
            if (fr < values[order[0]]) {
                Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
                const double fe = f(expanded);
                if (fe < fr) { simplex[worst] = expanded; values[worst] = fe; }
                else { simplex[worst] = reflected; values[worst] = fr; }
            } else if (fr < values[order[dim - 1]]) {
                simplex[worst] = reflected; values[worst] = fr;
            } else {
                Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
                const double fc = f(contracted);
                if (fc < values[worst]) { simplex[worst] = contracted; values[worst] = fc; }
                else {
                    for (int i = 1; i <= dim; ++i) {
                        simplex[order[i]] = simplex[order[0]] + 0.5 * (simplex[order[i]] - simplex[order[0]]);
                        values[order[i]] = f(simplex[order[i]]);
                    }
                }
            }
        }
        int arg = 0;
        for (int i = 1; i <= dim; ++i) if (values[i] < values[arg]) arg = i;
        if (values[arg] < best_value) { best_value = values[arg]; best = simplex[arg]; }
    }
    return best;
}

// -----------------------------------------------------------------------
// Gauss-Hermite nodes/weights by Golub-Welsch; computes
// E[f(mean + sd*Z)] for Z ~ N(0,1) via integral against exp(-x^2).
// -----------------------------------------------------------------------
struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    explicit GaussHermite(int n) {
        Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) {
            const double off = std::sqrt(i / 2.0);
            jacobi(i, i - 1) = off;
            jacobi(i - 1, i) = off;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
        nodes = solver.eigenvalues();
        weights.resize(n);
        for (int i = 0; i < n; ++i) {
            const double v0 = solver.eigenvectors()(0, i);
            weights(i) = std::sqrt(M_PI) * v0 * v0;
        }
    }

    double normal_expectation(const std::function<double(double)>& f, double mean,
                              double sd) const {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i)
            sum += weights(i) * f(mean + sd * std::sqrt(2.0) * nodes(i));
        return sum / std::sqrt(M_PI);
    }
};

// -----------------------------------------------------------------------
// Mann-Whitney statistic by direct pair counting (ties get half credit).
// -----------------------------------------------------------------------
inline double mann_whitney(const std::vector<double>& scores,
                           const std::vector<std::uint8_t>& labels) {
    double credit = 0.0;
    long long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) credit += 1.0;
            else if (scores[i] == scores[j]) credit += 0.5;
        }
    }
    return credit / static_cast<double>(pairs);
}

// Exhaustive Liu cutpoint sweep over all distinct thresholds.
struct LiuSweep {
    double threshold;
    double product;
};
inline LiuSweep liu_exhaustive(const std::vector<double>& scores,
                               const std::vector<std::uint8_t>& labels) {
    std::vector<double> candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    LiuSweep best{0.0, -1.0};
    for (double c : candidates) {
        long long tp = 0, fn = 0, fp = 0, tn = 0;
        for (std::size_t k = 0; k < scores.size(); ++k) {
            const bool predicted = scores[k] >= c;
            if (labels[k]) predicted ? ++tp : ++fn;
            else predicted ? ++fp : ++tn;
        }
        const double sens = static_cast<double>(tp) / (tp + fn);
        const double spec = static_cast<double>(tn) / (tn + fp);
        const double product = sens * spec;
        if (product > best.product || (product == best.product && c < best.threshold))
            best = {c, product};
    }
    return best;
}

// -----------------------------------------------------------------------
// Central finite differences of the mean BCE through a train-mode
// forward with fixed dropout masks (batch statistics recomputed at
// every perturbation).
// -----------------------------------------------------------------------
inline double network_loss(difnet::dnn::Network net, const Eigen::MatrixXd& batch,
                           const difnet::dnn::DropoutMasks& masks, const Eigen::MatrixXd& targets) {
    difnet::dnn::ForwardCache cache;
    const Eigen::MatrixXd out = difnet::dnn::forward_train(net, batch, masks, cache, false);
    return difnet::dnn::bce_loss(out, targets);
}

inline double fd_gradient(difnet::dnn::Network& net, double& param, const Eigen::MatrixXd& batch,
                          const difnet::dnn::DropoutMasks& masks, const Eigen::MatrixXd& targets,
                          double step) {
    const double saved = param;
    param = saved + step;
    const double up = network_loss(net, batch, masks, targets);
    param = saved - step;
    const double down = network_loss(net, batch, masks, targets);
    param = saved;
    return (up - down) / (2.0 * step);
}

// -----------------------------------------------------------------------
// Misc helpers
// -----------------------------------------------------------------------
inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace oracles
