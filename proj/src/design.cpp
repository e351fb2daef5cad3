#include "difnet/design.hpp"

#include "difnet/errors.hpp"
#include "difnet/skew_normal.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace difnet::simgen {

void SimulationConfig::validate() const {
    if (n_groups < 1) throw ConfigError("config: n_groups must be >= 1");
    if (n_items < 2) throw ConfigError("config: n_items must be >= 2");
    if (n_per_group < 1) throw ConfigError("config: n_per_group must be positive");
    if (max_biased_items < 1 || max_biased_items > n_items - 1)
        throw ConfigError("config: max_biased_items must be in [1, n_items - 1], got " +
                          std::to_string(max_biased_items));
    auto check_skew = [](const SkewDist& d, const char* name) {
        if (d.sd <= 0.0) throw ConfigError(std::string("config: ") + name + ".sd must be positive");
        if (d.xi <= 0.0) throw ConfigError(std::string("config: ") + name + ".xi must be positive");
        if (!(d.lower < d.upper))
            throw ConfigError(std::string("config: ") + name + " bounds must satisfy lower < upper");
    };
    check_skew(loading_dist, "loading_dist");
    check_skew(threshold_dist, "threshold_dist");
    if (loading_dist.lower <= 0.0)
        throw ConfigError("config: loading_dist.lower must be positive (loadings are positive)");
    if (group_mean_dist.sd < 0.0) throw ConfigError("config: group_mean_dist.sd must be >= 0");
    auto check_range = [](const Range& r, const char* name, bool positive) {
        if (!(r.lower <= r.upper))
            throw ConfigError(std::string("config: ") + name + " must satisfy lower <= upper");
        if (positive && r.lower <= 0.0)
            throw ConfigError(std::string("config: ") + name + " must be positive");
    };
    check_range(group_sd_range, "group_sd_range", true);
    check_range(bias_threshold_range, "bias_threshold_range", false);
    check_range(bias_loading_range, "bias_loading_range", false);
}

double irf(double theta, const ItemParams& params) {
    const double t = params.loading * theta - params.threshold;
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

DesignMatrix sample_design(const SimulationConfig& config, Rng& rng) {
    config.validate();

    DesignMatrix design;
    design.n_items = config.n_items;
    design.n_groups = config.n_groups;
    design.cells.resize(static_cast<std::size_t>(config.n_groups) * config.n_items);
    design.groups.resize(config.n_groups);

    // True item parameters, shared across groups. Loadings first, then
    // thresholds, each clamped to the configured bounds.
    std::vector<ItemParams> true_params(config.n_items);
    for (auto& p : true_params)
        p.loading = sample_truncated_skew_normal(config.loading_dist.mean, config.loading_dist.sd,
                                                 config.loading_dist.xi, config.loading_dist.lower,
                                                 config.loading_dist.upper, rng);
    for (auto& p : true_params)
        p.threshold = sample_truncated_skew_normal(
            config.threshold_dist.mean, config.threshold_dist.sd, config.threshold_dist.xi,
            config.threshold_dist.lower, config.threshold_dist.upper, rng);

    for (auto& g : design.groups)
        g.mean = rng.normal(config.group_mean_dist.mean, config.group_mean_dist.sd);
    for (auto& g : design.groups)
        g.sd = rng.uniform(config.group_sd_range.lower, config.group_sd_range.upper);

    for (int g = 0; g < config.n_groups; ++g) {
        for (int i = 0; i < config.n_items; ++i) {
            DesignCell& c = design.cell(g, i);
            c.group_index = g;
            c.item_index = i;
            c.true_params = true_params[i];
            c.operative_params = true_params[i];
        }
    }

    // The last n_affected groups carry the non-invariance.
    const int n_affected = static_cast<int>(rng.uniform_int(1, config.n_groups));
    for (int g = config.n_groups - n_affected; g < config.n_groups; ++g) {
        const int n_biased = static_cast<int>(rng.uniform_int(1, config.max_biased_items));

        // Partial Fisher-Yates draw of n_biased distinct items.
        std::vector<int> pool(config.n_items);
        std::iota(pool.begin(), pool.end(), 0);
        for (int k = 0; k < n_biased; ++k) {
            const int j = static_cast<int>(rng.uniform_int(k, config.n_items - 1));
            std::swap(pool[k], pool[j]);
        }

        for (int k = 0; k < n_biased; ++k) {
            DesignCell& c = design.cell(g, pool[k]);
            // 1 = threshold only, 2 = loading only, 3 = both.
            const int bias_type = static_cast<int>(rng.uniform_int(1, 3));
            const double sign = rng.coin() ? 1.0 : -1.0;
            const double mag_threshold =
                rng.uniform(config.bias_threshold_range.lower, config.bias_threshold_range.upper);
            const double mag_loading =
                rng.uniform(config.bias_loading_range.lower, config.bias_loading_range.upper);

            if (bias_type == 1 || bias_type == 3) {
                c.flag_threshold = true;
                c.bias_threshold = sign * mag_threshold;
                c.operative_params.threshold = c.true_params.threshold + c.bias_threshold;
            }
            if (bias_type == 2 || bias_type == 3) {
                c.flag_loading = true;
                c.bias_loading = sign * mag_loading;
                c.operative_params.loading = c.true_params.loading + c.bias_loading;
                if (c.operative_params.loading <= 0.0) {
                    // Sign reflection keeps the operative loading positive.
                    c.bias_loading = std::fabs(c.bias_loading);
                    c.operative_params.loading = c.true_params.loading + c.bias_loading;
                }
            }
        }
    }

    return design;
}

} // namespace difnet::simgen
