#include "difnet/corpus.hpp"
#include "difnet/design.hpp"
#include "difnet/errors.hpp"
#include "difnet/response.hpp"
#include "difnet/skew_normal.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

using namespace difnet;
using namespace difnet::simgen;

namespace {

struct Moments {
    double mean = 0.0, sd = 0.0, skewness = 0.0;
    std::size_t n = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = xs.size();
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(m.n);
    m3 /= static_cast<double>(m.n);
    m.sd = std::sqrt(m2);
    m.skewness = m3 / std::pow(m2, 1.5);
    return m;
}

} // namespace

TEST_CASE("truncated skew-normal draws stay inside the bounds") {
    Rng rng(42);
    for (int i = 0; i < 100000; ++i) {
        const double x = sample_truncated_skew_normal(2.946, 1.223, 10.0, 1.0, 7.0, rng);
        REQUIRE(x >= 1.0);
        REQUIRE(x <= 7.0);
    }
}

TEST_CASE("xi = 1 recovers the symmetric normal") {
    Rng rng(7);
    std::vector<double> xs(100000);
    for (double& x : xs) x = sample_skew_normal(0.0, 1.0, 1.0, rng);
    const Moments m = moments(xs);
    // Skewness of 1e5 normal draws has standard error ~ sqrt(6/n) ~ 0.0077.
    CHECK(std::fabs(m.skewness) < 3.0 * std::sqrt(6.0 / xs.size()));
    CHECK(std::fabs(m.mean) < 3.0 / std::sqrt(static_cast<double>(xs.size())));
}

TEST_CASE("skew-normal moments match the inverse-CDF reference sampler") {
    const double mean = -0.2095, sd = 0.6391, xi = 0.7176;
    const std::size_t n = 1000000;

    Rng rng(11);
    std::vector<double> impl(n);
    for (double& x : impl) x = sample_skew_normal(mean, sd, xi, rng);

    Rng ref_rng(12);
    std::vector<double> ref(n);
    for (double& x : ref) {
        double u;
        do { u = ref_rng.uniform(); } while (u <= 0.0);
        x = oracles::skew_normal_inverse_cdf(u, mean, sd, xi);
    }

    const Moments mi = moments(impl);
    const Moments mr = moments(ref);
    const double se_mean = sd / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(mi.mean - mr.mean) < 3.0 * std::sqrt(2.0) * se_mean);
    // SE of the SD estimate is about sd/sqrt(2n) for near-normal data.
    CHECK(std::fabs(mi.sd - mr.sd) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(mi.skewness - mr.skewness) < 3.0 * 2.0 * std::sqrt(6.0 / n));
    // Re-standardization makes the requested moments exact.
    CHECK(std::fabs(mi.mean - mean) < 3.0 * se_mean);
    CHECK(std::fabs(mi.sd - sd) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("skew-normal parameter validation") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_skew_normal(0.0, -1.0, 2.0, rng), ConfigError);
    CHECK_THROWS_AS(sample_skew_normal(0.0, 1.0, 0.0, rng), ConfigError);
    CHECK_THROWS_AS(sample_truncated_skew_normal(0.0, 1.0, 1.0, 2.0, 1.0, rng), ConfigError);
}

TEST_CASE("item response function closed-form values") {
    CHECK(irf(0.0, {1.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(irf(1.0, {2.0, 1.0}) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-9));
    CHECK(irf(0.0, {0.0001, 3.0}) == doctest::Approx(1.0 / (1.0 + std::exp(3.0))).epsilon(1e-6));
}

TEST_CASE("irf complement symmetry and monotonicity") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double theta = rng.uniform(-4.0, 4.0);
        const double tau = rng.uniform(-3.0, 3.0);
        const double lambda = rng.uniform(0.05, 7.0);
        const double direct = 1.0 - irf(theta, {lambda, tau});
        const double mirrored = irf(-theta, {lambda, -tau});
        CHECK(std::fabs(direct - mirrored) < 1e-12);

        const double step = rng.uniform(1e-4, 0.5);
        CHECK(irf(theta + step, {lambda, tau}) > irf(theta, {lambda, tau}));
    }
    // Constant in theta when the loading vanishes.
    CHECK(irf(-5.0, {0.0, 1.3}) == irf(5.0, {0.0, 1.3}));
}

TEST_CASE("sampled designs satisfy the structural contract") {
    SimulationConfig config;
    Rng rng(1234);
    const DesignMatrix design = sample_design(config, rng);

    CHECK(design.cells.size() == 20);
    CHECK(design.n_groups == 4);
    CHECK(design.n_items == 5);

    int flagged = 0;
    for (const DesignCell& c : design.cells) {
        CHECK(c.true_params.loading >= 1.0);
        CHECK(c.true_params.loading <= 7.0);
        CHECK(c.true_params.threshold >= -2.0);
        CHECK(c.true_params.threshold <= 1.0);
        CHECK(c.operative_params.loading > 0.0);
        if (c.flag_threshold || c.flag_loading) ++flagged;
        if (!c.flag_threshold) {
            CHECK(c.operative_params.threshold == c.true_params.threshold);
            CHECK(c.bias_threshold == 0.0);
        }
        if (!c.flag_loading) {
            CHECK(c.operative_params.loading == c.true_params.loading);
            CHECK(c.bias_loading == 0.0);
        }
    }
    CHECK(flagged >= 1);

    // True parameters identical across groups for each item.
    for (int i = 0; i < design.n_items; ++i)
        for (int g = 1; g < design.n_groups; ++g) {
            CHECK(design.cell(g, i).true_params.loading == design.cell(0, i).true_params.loading);
            CHECK(design.cell(g, i).true_params.threshold ==
                  design.cell(0, i).true_params.threshold);
        }
}

TEST_CASE("same seed gives an identical design") {
    SimulationConfig config;
    Rng rng_a(99), rng_b(99);
    const DesignMatrix a = sample_design(config, rng_a);
    const DesignMatrix b = sample_design(config, rng_b);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].true_params.loading == b.cells[k].true_params.loading);
        CHECK(a.cells[k].operative_params.threshold == b.cells[k].operative_params.threshold);
        CHECK(a.cells[k].flag_threshold == b.cells[k].flag_threshold);
        CHECK(a.cells[k].flag_loading == b.cells[k].flag_loading);
        CHECK(a.cells[k].bias_loading == b.cells[k].bias_loading);
    }
    for (int g = 0; g < a.n_groups; ++g) {
        CHECK(a.groups[g].mean == b.groups[g].mean);
        CHECK(a.groups[g].sd == b.groups[g].sd);
    }
}

TEST_CASE("biased-item counts per affected group are uniform") {
    SimulationConfig config; // 5 items, max_biased_items 3
    Rng rng(2024);
    long counts[3] = {0, 0, 0};
    for (int rep = 0; rep < 10000; ++rep) {
        const DesignMatrix design = sample_design(config, rng);
        for (int g = 0; g < design.n_groups; ++g) {
            int biased = 0;
            for (int i = 0; i < design.n_items; ++i)
                if (design.cell(g, i).flag_threshold || design.cell(g, i).flag_loading) ++biased;
            if (biased > 0) {
                REQUIRE(biased <= 3);
                ++counts[biased - 1];
            }
        }
    }
    const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
    const double expected = total / 3.0;
    double chi2 = 0.0;
    for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // df = 2 critical value at p = 0.01.
    CHECK(chi2 < 9.21034);
}

TEST_CASE("operative loadings stay positive under the sign-reflection repair") {
    SimulationConfig config;
    config.bias_loading_range = {0.3, 6.0}; // force repairs against loadings >= 1
    Rng rng(5);
    int repairs = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        const DesignMatrix design = sample_design(config, rng);
        for (const DesignCell& c : design.cells) {
            CHECK(c.operative_params.loading > 0.0);
            if (c.flag_loading) {
                CHECK(c.operative_params.loading ==
                      doctest::Approx(c.true_params.loading + c.bias_loading).epsilon(1e-12));
                if (c.bias_loading > 0.0 && c.bias_loading > c.true_params.loading) ++repairs;
            }
        }
    }
    CHECK(repairs > 0); // the repair path was actually exercised
}

TEST_CASE("label ordering contract: one flag flips one label entry") {
    SimulationConfig config;
    Rng rng(17);
    DesignMatrix design = sample_design(config, rng);
    const LabelVector before = labels_from_design(design);
    REQUIRE(static_cast<int>(before.flags.size()) == 2 * design.n_items * design.n_groups);

    const int g = 2, i = 3;
    design.cell(g, i).flag_threshold = !design.cell(g, i).flag_threshold;
    const LabelVector after_threshold = labels_from_design(design);
    int diffs = 0;
    std::size_t diff_at = 0;
    for (std::size_t k = 0; k < before.flags.size(); ++k)
        if (before.flags[k] != after_threshold.flags[k]) {
            ++diffs;
            diff_at = k;
        }
    CHECK(diffs == 1);
    CHECK(diff_at == static_cast<std::size_t>(g * design.n_items + i));

    design.cell(g, i).flag_threshold = !design.cell(g, i).flag_threshold; // restore
    design.cell(g, i).flag_loading = !design.cell(g, i).flag_loading;
    const LabelVector after_loading = labels_from_design(design);
    diffs = 0;
    for (std::size_t k = 0; k < before.flags.size(); ++k)
        if (before.flags[k] != after_loading.flags[k]) {
            ++diffs;
            diff_at = k;
        }
    CHECK(diffs == 1);
    CHECK(diff_at ==
          static_cast<std::size_t>(design.n_items * design.n_groups + g * design.n_items + i));
}

TEST_CASE("null design gives a pooled response rate of one half") {
    DesignMatrix design;
    design.n_groups = 2;
    design.n_items = 2;
    design.groups = {{0.0, 1.0}, {0.0, 1.0}};
    design.cells.resize(4);
    for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 2; ++i) {
            DesignCell& c = design.cell(g, i);
            c.group_index = g;
            c.item_index = i;
            c.true_params = {1.0, 0.0};
            c.operative_params = {1.0, 0.0};
        }

    Rng rng(8);
    const auto rep = generate_responses(design, 50000, rng);
    double total = 0.0;
    for (std::uint8_t v : rep.responses.responses) total += v;
    const double rate = total / static_cast<double>(rep.responses.responses.size());
    // Null-case rate is 1/2; responses within a row are correlated via
    // theta, so bound with a conservative SE on the respondent count.
    const double se = 0.5 / std::sqrt(100000.0 / 2.0);
    CHECK(std::fabs(rate - 0.5) < 3.0 * se);
}

TEST_CASE("generate_responses is deterministic at fixed seed") {
    SimulationConfig config;
    Rng d_rng(55);
    const DesignMatrix design = sample_design(config, d_rng);
    Rng rng_a(66), rng_b(66);
    const auto a = generate_responses(design, 100, rng_a);
    const auto b = generate_responses(design, 100, rng_b);
    CHECK(a.responses.responses == b.responses.responses);
    CHECK(a.labels.flags == b.labels.flags);
}

TEST_CASE("cell response rates match Gauss-Hermite integration") {
    // One group's item threshold biased by +1.0 lowers that cell's
    // positive rate by the amount quadrature predicts.
    DesignMatrix design;
    design.n_groups = 2;
    design.n_items = 2;
    design.groups = {{0.1, 0.9}, {0.1, 0.9}}; // matched latent means
    design.cells.resize(4);
    for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 2; ++i) {
            DesignCell& c = design.cell(g, i);
            c.group_index = g;
            c.item_index = i;
            c.true_params = {1.4, -0.3};
            c.operative_params = c.true_params;
        }
    DesignCell& biased = design.cell(1, 0);
    biased.flag_threshold = true;
    biased.bias_threshold = 1.0;
    biased.operative_params.threshold = biased.true_params.threshold + 1.0;

    const int n = 100000;
    Rng rng(123);
    const auto rep = generate_responses(design, n, rng);

    const oracles::GaussHermite gh(60);
    for (int g = 0; g < 2; ++g)
        for (int i = 0; i < 2; ++i) {
            double hits = 0.0;
            for (int p = 0; p < n; ++p) hits += rep.responses.at(g * n + p, i);
            const double rate = hits / n;
            const ItemParams params = design.cell(g, i).operative_params;
            const double expected = gh.normal_expectation(
                [&](double theta) { return irf(theta, params); }, design.groups[g].mean,
                design.groups[g].sd);
            const double se = std::sqrt(expected * (1.0 - expected) / n);
            CHECK(std::fabs(rate - expected) < 3.0 * se);
        }

    // The biased cell's rate sits below the unbiased group's same item.
    double rate_biased = 0.0, rate_clean = 0.0;
    for (int p = 0; p < n; ++p) {
        rate_biased += rep.responses.at(n + p, 0);
        rate_clean += rep.responses.at(p, 0);
    }
    CHECK(rate_biased / n < rate_clean / n);
}

TEST_CASE("corpus generation: file counts, determinism, per-replication streams") {
    const auto dir = std::filesystem::temp_directory_path() / "difnet_test_corpus";
    std::filesystem::remove_all(dir);

    SimulationConfig config;
    config.n_per_group = 400;
    const io::CorpusManifest manifest = generate_corpus(config, 3, dir, 777, 1);

    CHECK(manifest.n_replications == 3);
    for (int r = 0; r < 3; ++r) {
        const auto values = io::read_binary_column_file(manifest.response_path(r));
        CHECK(values.size() == 8000);
        const auto labels = io::read_label_file(manifest.label_path(r), 4, 5);
        CHECK(labels.flags.size() == 40);
    }

    // Byte-identical regeneration from the same master seed.
    const auto dir2 = std::filesystem::temp_directory_path() / "difnet_test_corpus2";
    std::filesystem::remove_all(dir2);
    generate_corpus(config, 3, dir2, 777, 1);
    for (int r = 0; r < 3; ++r) {
        CHECK(oracles::slurp((dir / manifest.response_files[r]).string()) ==
              oracles::slurp((dir2 / manifest.response_files[r]).string()));
        CHECK(oracles::slurp((dir / manifest.label_files[r]).string()) ==
              oracles::slurp((dir2 / manifest.label_files[r]).string()));
    }

    // Standalone regeneration of replication i equals the batch file.
    for (int r = 0; r < 3; ++r) {
        const GeneratedReplication rep = generate_replication(config, 777, r);
        const auto file_values = io::read_binary_column_file(manifest.response_path(r));
        CHECK(rep.responses.flatten() == file_values);
        const auto file_labels = io::read_label_file(manifest.label_path(r), 4, 5);
        CHECK(rep.labels.flags == file_labels.flags);
    }

    // Parallel generation is bit-identical to sequential.
    const auto dir3 = std::filesystem::temp_directory_path() / "difnet_test_corpus3";
    std::filesystem::remove_all(dir3);
    generate_corpus(config, 3, dir3, 777, 2);
    for (int r = 0; r < 3; ++r)
        CHECK(oracles::slurp((dir / manifest.response_files[r]).string()) ==
              oracles::slurp((dir3 / manifest.response_files[r]).string()));

    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
    std::filesystem::remove_all(dir3);
}

TEST_CASE("invariance holds in truth wherever flags are zero") {
    SimulationConfig config;
    config.n_groups = 6;
    config.n_items = 4;
    config.max_biased_items = 2;
    Rng rng(31337);
    for (int rep = 0; rep < 200; ++rep) {
        const DesignMatrix design = sample_design(config, rng);
        for (int i = 0; i < design.n_items; ++i) {
            const ItemParams& truth = design.cell(0, i).true_params;
            for (int g = 0; g < design.n_groups; ++g) {
                const DesignCell& c = design.cell(g, i);
                if (!c.flag_threshold) CHECK(c.operative_params.threshold == truth.threshold);
                if (!c.flag_loading) CHECK(c.operative_params.loading == truth.loading);
            }
        }
    }
}

TEST_CASE("simulation config validation") {
    SimulationConfig config;
    config.max_biased_items = 5; // == n_items, invalid
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = SimulationConfig{};
    config.n_per_group = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = SimulationConfig{};
    config.loading_dist.sd = -1.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}
