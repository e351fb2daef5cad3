#pragma once

#include "difnet/design.hpp"
#include "difnet/rng.hpp"

#include <cstdint>
#include <vector>

namespace difnet::simgen {

/// Binary response matrix, rows blocked by group in group-index order
/// (n_groups * n_per_group rows, n_items columns, row-major storage).
struct ResponseDataset {
    int n_groups = 0;
    int n_items = 0;
    int n_per_group = 0;
    std::vector<std::uint8_t> responses;
    std::vector<int> group_of_row;

    int n_rows() const { return n_groups * n_per_group; }

    std::uint8_t at(int row, int item) const {
        return responses[static_cast<std::size_t>(row) * n_items + item];
    }
    std::uint8_t& at(int row, int item) {
        return responses[static_cast<std::size_t>(row) * n_items + item];
    }

    /// Flattened vector in file/network input order: item slowest, then
    /// group, then respondent (column-major over the row-blocked matrix).
    std::vector<std::uint8_t> flatten() const;
};

/// Binary non-invariance indicators, length 2 * n_items * n_groups.
/// First half threshold flags, second half loading flags, each half in
/// DesignMatrix cell order (item-fast within group).
struct LabelVector {
    int n_groups = 0;
    int n_items = 0;
    std::vector<std::uint8_t> flags;

    int half_size() const { return n_groups * n_items; }
};

LabelVector labels_from_design(const DesignMatrix& design);

struct GeneratedReplication {
    ResponseDataset responses;
    LabelVector labels;
};

/// Draws n_per_group latent values per group from Normal(mean, sd^2)
/// and Bernoulli responses from the operative item response functions.
/// Latent draws are transient and never stored.
GeneratedReplication generate_responses(const DesignMatrix& design, int n_per_group, Rng& rng);

/// Rebuilds the row-blocked matrix from a flattened vector (inverse of
/// ResponseDataset::flatten). Throws FormatError on length mismatch.
ResponseDataset unflatten_responses(const std::vector<std::uint8_t>& flat, int n_groups,
                                    int n_items, int n_per_group);

} // namespace difnet::simgen
