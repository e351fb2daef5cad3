#include "difnet/corpus.hpp"

#include "difnet/errors.hpp"
#include "difnet/rng.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace difnet::simgen {

GeneratedReplication generate_replication(const SimulationConfig& config,
                                          std::uint64_t master_seed, int rep) {
    Rng rng = derive_stream(master_seed, static_cast<std::uint64_t>(rep));
    const DesignMatrix design = sample_design(config, rng);
    return generate_responses(design, config.n_per_group, rng);
}

io::CorpusManifest generate_corpus(const SimulationConfig& config, int n_replications,
                                   const std::filesystem::path& output_dir,
                                   std::uint64_t master_seed, int n_threads) {
    config.validate();
    if (n_replications < 1) throw ConfigError("generate_corpus: n_replications must be positive");
    std::filesystem::create_directories(output_dir);

    io::CorpusManifest manifest;
    manifest.directory = output_dir;
    manifest.config = config;
    manifest.master_seed = master_seed;
    manifest.n_replications = n_replications;
    manifest.config_hash = io::config_hash(config);
    manifest.response_files.resize(n_replications);
    manifest.label_files.resize(n_replications);
    for (int r = 0; r < n_replications; ++r) {
        char name[32];
        std::snprintf(name, sizeof(name), "rep%06d.csv", r + 1);
        manifest.response_files[r] = name;
        std::snprintf(name, sizeof(name), "out%06d.csv", r + 1);
        manifest.label_files[r] = name;
    }

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= n_replications) break;
            try {
                const GeneratedReplication rep = generate_replication(config, master_seed, r);
                io::write_response_file(rep.responses, manifest.response_path(r));
                io::write_label_file(rep.labels, manifest.label_path(r));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(std::runtime_error(
                        "replication " + std::to_string(r + 1) + ": generation failed"));
                next.store(n_replications);
                break;
            }
        }
    };

    const int threads = std::max(1, n_threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    io::write_manifest(manifest, output_dir / "manifest.json");
    return manifest;
}

dnn::TrainingData load_training_data(const io::CorpusManifest& manifest, dnn::Target target) {
    const auto& cfg = manifest.config;
    const std::size_t input_dim =
        static_cast<std::size_t>(cfg.n_items) * cfg.n_groups * cfg.n_per_group;
    const std::size_t half = static_cast<std::size_t>(cfg.n_items) * cfg.n_groups;

    dnn::TrainingData data;
    data.input_dim = static_cast<int>(input_dim);
    data.output_dim = static_cast<int>(half);
    data.inputs.reserve(manifest.n_replications);
    data.label_halves.reserve(manifest.n_replications);

    for (int r = 0; r < manifest.n_replications; ++r) {
        auto values = io::read_binary_column_file(manifest.response_path(r));
        if (values.size() != input_dim)
            throw ConfigError(manifest.response_path(r).string() + ": expected " +
                              std::to_string(input_dim) + " responses, got " +
                              std::to_string(values.size()));
        const simgen::LabelVector labels =
            io::read_label_file(manifest.label_path(r), cfg.n_groups, cfg.n_items);
        const std::size_t offset = target == dnn::Target::thresholds ? 0 : half;
        data.inputs.push_back(std::move(values));
        data.label_halves.emplace_back(labels.flags.begin() + offset,
                                       labels.flags.begin() + offset + half);
    }
    return data;
}

dnn::TrainResult train_from_manifest(const io::CorpusManifest& manifest, dnn::Target target,
                                     const dnn::Architecture& arch, const dnn::TrainConfig& cfg) {
    const dnn::TrainingData data = load_training_data(manifest, target);
    return dnn::train(data, target, arch, cfg);
}

} // namespace difnet::simgen
