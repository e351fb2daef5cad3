#pragma once

#include "difnet/response.hpp"

#include <cstdint>
#include <vector>

namespace difnet::logitdif {

/// Per-item DIF p-values from one pair of groups. Uniform DIF compares
/// the score-only model against the model with a group main effect;
/// non-uniform DIF adds the score-by-group interaction. Symmetric in
/// the group arguments.
struct PairwiseResult {
    int group_a = 0;
    int group_b = 0;
    std::vector<double> p_uniform;
    std::vector<double> p_nonuniform;
    /// Items whose fits failed to converge (p forced to 1).
    std::vector<int> warned_items;
};

PairwiseResult pairwise_dif(const simgen::ResponseDataset& dataset, int group_a, int group_b);

struct FlagMatrix {
    int n_groups = 0;
    int n_items = 0;
    std::vector<std::uint8_t> threshold_flags; // n_groups x n_items, item-fast
    std::vector<std::uint8_t> loading_flags;

    std::uint8_t threshold_at(int group, int item) const {
        return threshold_flags[static_cast<std::size_t>(group) * n_items + item];
    }
    std::uint8_t loading_at(int group, int item) const {
        return loading_flags[static_cast<std::size_t>(group) * n_items + item];
    }
};

/// Majority rule on one group's pairwise p-values for one item:
/// Benjamini-Hochberg adjust the n_groups-1 values, count those below
/// alpha, flag on a strict majority of the comparisons.
bool majority_rule(const std::vector<double>& pvalues, double alpha);

/// Full pairwise logistic DIF procedure over all group pairs. Pairwise
/// comparisons run in parallel over n_threads with results identical
/// to sequential execution.
FlagMatrix majority_flags(const simgen::ResponseDataset& dataset, double alpha = 0.01,
                          int n_threads = 1);

} // namespace difnet::logitdif
