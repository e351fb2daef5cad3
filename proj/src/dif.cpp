#include "difnet/dif.hpp"

#include "difnet/errors.hpp"
#include "difnet/logistic.hpp"
#include "difnet/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <string>
#include <thread>

namespace difnet::logitdif {

PairwiseResult pairwise_dif(const simgen::ResponseDataset& dataset, int group_a, int group_b) {
    if (group_a == group_b) throw std::invalid_argument("pairwise_dif: groups must differ");
    for (int g : {group_a, group_b})
        if (g < 0 || g >= dataset.n_groups)
            throw std::invalid_argument("pairwise_dif: group " + std::to_string(g) +
                                        " out of range");

    // Canonical order makes the result symmetric in the arguments.
    const int lo = std::min(group_a, group_b);
    const int hi = std::max(group_a, group_b);

    std::vector<int> rows;
    rows.reserve(2 * static_cast<std::size_t>(dataset.n_per_group));
    for (int r = 0; r < dataset.n_rows(); ++r)
        if (dataset.group_of_row[r] == lo || dataset.group_of_row[r] == hi) rows.push_back(r);

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd score(n), group(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        int s = 0;
        for (int i = 0; i < dataset.n_items; ++i) s += dataset.at(rows[k], i);
        score(k) = static_cast<double>(s); // raw test score, studied item included
        group(k) = dataset.group_of_row[rows[k]] == hi ? 1.0 : 0.0;
    }

    Eigen::MatrixXd design(n, 4);
    design.col(0).setOnes();
    design.col(1) = score;
    design.col(2) = group;
    design.col(3) = score.cwiseProduct(group);

    PairwiseResult result;
    result.group_a = group_a;
    result.group_b = group_b;
    result.p_uniform.resize(dataset.n_items, 1.0);
    result.p_nonuniform.resize(dataset.n_items, 1.0);

    std::vector<std::uint8_t> y(rows.size());
    for (int item = 0; item < dataset.n_items; ++item) {
        for (std::size_t k = 0; k < rows.size(); ++k) y[k] = dataset.at(rows[k], item);

        // Never flag on a failed fit: conservative p = 1.
        try {
            const LogisticFit base = fit_logistic(design.leftCols(2), y);
            const LogisticFit uniform = fit_logistic(design.leftCols(3), y);
            const LogisticFit nonuniform = fit_logistic(design, y);
            if (!base.converged || !uniform.converged || !nonuniform.converged) {
                result.warned_items.push_back(item);
                continue;
            }
            result.p_uniform[item] =
                stats::lrt_pvalue(std::min(base.log_likelihood, uniform.log_likelihood),
                                  uniform.log_likelihood, 1);
            result.p_nonuniform[item] =
                stats::lrt_pvalue(std::min(uniform.log_likelihood, nonuniform.log_likelihood),
                                  nonuniform.log_likelihood, 1);
        } catch (const std::invalid_argument&) {
            result.warned_items.push_back(item);
        }
    }
    return result;
}

bool majority_rule(const std::vector<double>& pvalues, double alpha) {
    const std::vector<double> adjusted = stats::bh_adjust(pvalues);
    int significant = 0;
    for (double p : adjusted)
        if (p < alpha) ++significant;
    return 2 * significant > static_cast<int>(pvalues.size());
}

FlagMatrix majority_flags(const simgen::ResponseDataset& dataset, double alpha, int n_threads) {
    if (dataset.n_groups < 2) throw ConfigError("majority_flags: need at least 2 groups");
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("majority_flags: alpha must be in (0, 1)");

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < dataset.n_groups; ++a)
        for (int b = a + 1; b < dataset.n_groups; ++b) pairs.emplace_back(a, b);

    std::vector<PairwiseResult> results(pairs.size());
    const int threads = std::max(1, n_threads);
    if (threads == 1) {
        for (std::size_t k = 0; k < pairs.size(); ++k)
            results[k] = pairwise_dif(dataset, pairs[k].first, pairs[k].second);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= pairs.size()) break;
                results[k] = pairwise_dif(dataset, pairs[k].first, pairs[k].second);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    FlagMatrix flags;
    flags.n_groups = dataset.n_groups;
    flags.n_items = dataset.n_items;
    flags.threshold_flags.assign(static_cast<std::size_t>(dataset.n_groups) * dataset.n_items, 0);
    flags.loading_flags.assign(static_cast<std::size_t>(dataset.n_groups) * dataset.n_items, 0);

    for (int g = 0; g < dataset.n_groups; ++g) {
        for (int item = 0; item < dataset.n_items; ++item) {
            std::vector<double> uniform, nonuniform;
            uniform.reserve(dataset.n_groups - 1);
            nonuniform.reserve(dataset.n_groups - 1);
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                if (pairs[k].first != g && pairs[k].second != g) continue;
                uniform.push_back(results[k].p_uniform[item]);
                nonuniform.push_back(results[k].p_nonuniform[item]);
            }
            const std::size_t idx = static_cast<std::size_t>(g) * dataset.n_items + item;
            if (majority_rule(uniform, alpha)) flags.threshold_flags[idx] = 1;
            if (majority_rule(nonuniform, alpha)) flags.loading_flags[idx] = 1;
        }
    }
    return flags;
}

} // namespace difnet::logitdif
