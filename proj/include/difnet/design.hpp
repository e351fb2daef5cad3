#pragma once

#include "difnet/rng.hpp"

#include <cstdint>
#include <vector>

namespace difnet::simgen {

struct ItemParams {
    double loading = 1.0;   // discrimination, > 0
    double threshold = 0.0; // difficulty / intercept
};

struct GroupSpec {
    double mean = 0.0; // latent mean
    double sd = 1.0;   // latent standard deviation
};

/// One (group, item) cell of a non-invariance design. `operative`
/// parameters are the ones responses are generated from; they differ
/// from the true parameters exactly where a flag is set.
struct DesignCell {
    int group_index = 0;
    int item_index = 0;
    ItemParams true_params;
    ItemParams operative_params;
    bool flag_threshold = false;
    bool flag_loading = false;
    double bias_threshold = 0.0;
    double bias_loading = 0.0;
};

/// Cells ordered item-fast within group: (g0,i0), (g0,i1), ...,
/// (g0,iI-1), (g1,i0), ...
struct DesignMatrix {
    std::vector<DesignCell> cells;
    std::vector<GroupSpec> groups;
    int n_items = 0;
    int n_groups = 0;

    const DesignCell& cell(int group, int item) const {
        return cells[static_cast<std::size_t>(group) * n_items + item];
    }
    DesignCell& cell(int group, int item) {
        return cells[static_cast<std::size_t>(group) * n_items + item];
    }
};

/// Truncated skew-normal parameter distribution.
struct SkewDist {
    double mean = 0.0;
    double sd = 1.0;
    double xi = 1.0;
    double lower = -1e30;
    double upper = 1e30;
};

struct NormalDist {
    double mean = 0.0;
    double sd = 1.0;
};

struct Range {
    double lower = 0.0;
    double upper = 1.0;
};

struct SimulationConfig {
    int n_groups = 4;
    int n_items = 5;
    int n_per_group = 400;
    SkewDist loading_dist{2.946, 1.223, 10.0, 1.0, 7.0};
    SkewDist threshold_dist{-0.2095, 0.6391, 0.7176, -2.0, 1.0};
    NormalDist group_mean_dist{0.0, 0.2};
    Range group_sd_range{0.75, 1.25};
    Range bias_threshold_range{0.3, 1.0};
    Range bias_loading_range{0.3, 2.0};
    int max_biased_items = 3;
    std::uint64_t seed = 0;

    /// Throws ConfigError on invalid settings.
    void validate() const;
};

/// Two-parameter logistic item response function,
/// P(U=1 | theta) = 1 / (1 + exp(threshold - loading * theta)).
double irf(double theta, const ItemParams& params);

/// Samples a full non-invariance design: shared true item parameters,
/// group latent distributions, affected groups, biased items and bias
/// magnitudes. Always produces at least one flagged cell.
DesignMatrix sample_design(const SimulationConfig& config, Rng& rng);

} // namespace difnet::simgen
