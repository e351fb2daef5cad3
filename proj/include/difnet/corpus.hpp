#pragma once

#include "difnet/design.hpp"
#include "difnet/io.hpp"
#include "difnet/net.hpp"
#include "difnet/response.hpp"

#include <cstdint>
#include <filesystem>

namespace difnet::simgen {

/// Replication `rep` of a corpus, regenerated standalone from its
/// derived stream. Batch generation produces bit-identical output.
GeneratedReplication generate_replication(const SimulationConfig& config,
                                          std::uint64_t master_seed, int rep);

/// Writes n_replications (response, label) file pairs plus a manifest.
/// Replications use independent streams derived from (master_seed,
/// index), so generation parallelizes deterministically across
/// n_threads workers. I/O failures are reported with the replication
/// index.
io::CorpusManifest generate_corpus(const SimulationConfig& config, int n_replications,
                                   const std::filesystem::path& output_dir,
                                   std::uint64_t master_seed, int n_threads = 1);

/// Loads the flattened response vectors and the selected label half of
/// every replication into memory. Throws ConfigError when file
/// contents disagree with the manifest dimensions.
dnn::TrainingData load_training_data(const io::CorpusManifest& manifest, dnn::Target target);

/// Convenience: load + dimension check + train.
dnn::TrainResult train_from_manifest(const io::CorpusManifest& manifest, dnn::Target target,
                                     const dnn::Architecture& arch, const dnn::TrainConfig& cfg);

} // namespace difnet::simgen
