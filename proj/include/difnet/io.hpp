#pragma once

#include "difnet/design.hpp"
#include "difnet/net.hpp"
#include "difnet/response.hpp"
#include "difnet/roc.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace difnet::io {

/// Locale-independent decimal formatting with enough digits for an
/// exact double round trip.
std::string format_double(double x);

// ---------------------------------------------------------------------
// Response / label files: single-column CSV, header `x`, one 0/1 value
// per line, LF newlines. Response values are ordered item slowest, then
// group, then respondent. Label files hold threshold flags then loading
// flags, each half item-fast within group. The quoted header `"x"`
// written by R's write.csv is accepted on read.
// ---------------------------------------------------------------------

void write_response_file(const simgen::ResponseDataset& dataset,
                         const std::filesystem::path& path);

simgen::ResponseDataset read_response_file(const std::filesystem::path& path, int n_groups,
                                           int n_items, int n_per_group);

/// Raw flat vector as stored in the file (network input order).
std::vector<std::uint8_t> read_binary_column_file(const std::filesystem::path& path);
void write_binary_column_file(const std::vector<std::uint8_t>& values,
                              const std::filesystem::path& path);

void write_label_file(const simgen::LabelVector& labels, const std::filesystem::path& path);
simgen::LabelVector read_label_file(const std::filesystem::path& path, int n_groups, int n_items);

// ---------------------------------------------------------------------
// Corpus manifest
// ---------------------------------------------------------------------

struct CorpusManifest {
    std::filesystem::path directory; // directory of the manifest file
    simgen::SimulationConfig config;
    std::uint64_t master_seed = 0;
    int n_replications = 0;
    std::vector<std::string> response_files; // relative to directory
    std::vector<std::string> label_files;
    std::string config_hash;

    std::filesystem::path response_path(int rep) const { return directory / response_files[rep]; }
    std::filesystem::path label_path(int rep) const { return directory / label_files[rep]; }
};

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest read_manifest(const std::filesystem::path& path);

/// FNV-1a hash of the canonical config serialization.
std::string config_hash(const simgen::SimulationConfig& config);

// ---------------------------------------------------------------------
// Model files: versioned JSON with row-major weight arrays, batch-norm
// state, training metadata and an optional stored cutpoint. Doubles are
// serialized with shortest-round-trip precision, so save -> load is
// exact.
// ---------------------------------------------------------------------

void write_model(const dnn::Network& net, const std::filesystem::path& path);
dnn::Network read_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------
// Config files (JSON). Unknown keys are rejected.
// ---------------------------------------------------------------------

struct ConfigFile {
    simgen::SimulationConfig simulation;
    dnn::TrainConfig training;
    int hidden_width = 512; // architecture profile width
};

ConfigFile read_config(const std::filesystem::path& path);
void write_config(const ConfigFile& config, const std::filesystem::path& path);

// ---------------------------------------------------------------------
// CSV / SVG exports
// ---------------------------------------------------------------------

void write_roc_csv(const eval::RocCurve& curve, const std::filesystem::path& path);

struct SummaryRow {
    std::string target;
    double auroc = 0.0;
    double cutpoint = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

/// Line plot of one or two ROC curves with optional single-point
/// markers for flag-only detectors.
struct SvgPoint {
    double fpr = 0.0, tpr = 0.0;
    std::string label;
};
void write_roc_svg(const std::vector<std::pair<std::string, const eval::RocCurve*>>& curves,
                   const std::vector<SvgPoint>& points, const std::filesystem::path& path);

/// Atomic text write (write temp file, then rename).
void write_text_atomic(const std::string& content, const std::filesystem::path& path);

} // namespace difnet::io
