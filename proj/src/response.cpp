#include "difnet/response.hpp"

#include "difnet/errors.hpp"

#include <string>

namespace difnet::simgen {

std::vector<std::uint8_t> ResponseDataset::flatten() const {
    std::vector<std::uint8_t> flat;
    flat.reserve(responses.size());
    for (int item = 0; item < n_items; ++item)
        for (int row = 0; row < n_rows(); ++row)
            flat.push_back(at(row, item));
    return flat;
}

ResponseDataset unflatten_responses(const std::vector<std::uint8_t>& flat, int n_groups,
                                    int n_items, int n_per_group) {
    const std::size_t expected =
        static_cast<std::size_t>(n_groups) * n_items * n_per_group;
    if (flat.size() != expected)
        throw FormatError("response vector length mismatch: expected " + std::to_string(expected) +
                          " values for " + std::to_string(n_groups) + " groups x " +
                          std::to_string(n_items) + " items x " + std::to_string(n_per_group) +
                          " per group, got " + std::to_string(flat.size()));

    ResponseDataset data;
    data.n_groups = n_groups;
    data.n_items = n_items;
    data.n_per_group = n_per_group;
    data.responses.resize(expected);
    data.group_of_row.resize(static_cast<std::size_t>(n_groups) * n_per_group);
    for (int row = 0; row < data.n_rows(); ++row) data.group_of_row[row] = row / n_per_group;

    std::size_t k = 0;
    for (int item = 0; item < n_items; ++item)
        for (int row = 0; row < data.n_rows(); ++row) data.at(row, item) = flat[k++];
    return data;
}

LabelVector labels_from_design(const DesignMatrix& design) {
    LabelVector labels;
    labels.n_groups = design.n_groups;
    labels.n_items = design.n_items;
    labels.flags.reserve(2 * design.cells.size());
    for (const DesignCell& c : design.cells) labels.flags.push_back(c.flag_threshold ? 1 : 0);
    for (const DesignCell& c : design.cells) labels.flags.push_back(c.flag_loading ? 1 : 0);
    return labels;
}

GeneratedReplication generate_responses(const DesignMatrix& design, int n_per_group, Rng& rng) {
    if (n_per_group < 1) throw ConfigError("generate_responses: n_per_group must be positive");

    ResponseDataset data;
    data.n_groups = design.n_groups;
    data.n_items = design.n_items;
    data.n_per_group = n_per_group;
    data.responses.resize(static_cast<std::size_t>(data.n_rows()) * data.n_items);
    data.group_of_row.resize(data.n_rows());

    for (int g = 0; g < design.n_groups; ++g) {
        const GroupSpec& spec = design.groups[g];
        std::vector<double> theta(n_per_group);
        for (double& t : theta) t = rng.normal(spec.mean, spec.sd);

        for (int p = 0; p < n_per_group; ++p) {
            const int row = g * n_per_group + p;
            data.group_of_row[row] = g;
            for (int i = 0; i < design.n_items; ++i) {
                const double prob = irf(theta[p], design.cell(g, i).operative_params);
                data.at(row, i) = rng.uniform() < prob ? 1 : 0;
            }
        }
    }

    return {std::move(data), labels_from_design(design)};
}

} // namespace difnet::simgen
