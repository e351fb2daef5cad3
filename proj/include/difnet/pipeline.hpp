#pragma once

#include "difnet/corpus.hpp"
#include "difnet/dif.hpp"
#include "difnet/evaluate.hpp"
#include "difnet/net.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace difnet::pipeline {

/// The four study conditions, full (paper) scale: 300,000 training and
/// 5,000 evaluation replications, 400 observations per group.
struct StudyCondition {
    int condition_id = 1;
    int n_groups = 4;
    int n_items = 5;
    int n_per_group = 400;
    int n_training_reps = 300000;
    int n_eval_reps = 5000;
};

StudyCondition condition_preset(int condition_id);

/// Resolved study scale: replication counts and hidden width.
struct StudyScale {
    std::string label;  // "1", "0.05", "small", ...
    int train_reps = 0;
    int eval_reps = 0;
    int hidden_width = 0;
};

/// Numeric scale multiplies the condition's replication counts; any
/// scale below 1 switches to the desk width (512). The named scale
/// "small" is a fixed tiny profile (200/50 replications, width 128)
/// for smoke and determinism runs.
StudyScale resolve_scale(const StudyCondition& cond, const std::string& scale);

struct StudyRunOptions {
    std::optional<int> train_reps;
    std::optional<int> eval_reps;
    std::optional<int> hidden_width;
    int epochs_thresholds = 3;
    int epochs_loadings = 8;
    int batch_size = 256;
    double learning_rate = 0.1;
    double momentum = 0.8;
    int gen_threads = 1;      // generation is order-independent by construction
    int baseline_threads = 1; // baseline replications are pure
    bool svg = false;
    bool with_baseline = true;
    int log_every = 0;
};

struct TargetMetrics {
    double auroc = 0.0;
    double cutpoint = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double fpr_at_cutpoint = 0.0;
};

struct BaselinePoint {
    double tpr = 0.0;
    double fpr = 0.0;
};

struct StudyReport {
    StudyCondition condition;
    StudyScale scale;
    std::uint64_t master_seed = 0;

    // Paths relative to the study directory.
    std::string train_manifest;
    std::string eval_manifest;
    std::string model_thresholds;
    std::string model_loadings;

    TargetMetrics thresholds;
    TargetMetrics loadings;
    BaselinePoint baseline_thresholds;
    BaselinePoint baseline_loadings;
    int baseline_failures = 0;

    dnn::TrainHistory history_thresholds;
    dnn::TrainHistory history_loadings;
    std::map<std::string, double> timings_sec;
};

/// Runs the full four-step workflow for one condition: generate
/// training and evaluation corpora, train both networks, evaluate the
/// pooled ROC, run the logistic baseline, and write report.json plus
/// CSV (and optional SVG) exports into study_dir.
StudyReport run_condition(const StudyCondition& cond, const StudyScale& scale,
                          std::uint64_t master_seed, const std::filesystem::path& study_dir,
                          const StudyRunOptions& opts = {});

void write_study_report(const StudyReport& report, const std::filesystem::path& path);
StudyReport read_study_report(const std::filesystem::path& path);

/// Serialized metrics subtree only (identical across reruns at the
/// same seed; timings are excluded).
std::string report_metrics_json(const StudyReport& report);

struct BaselineRun {
    std::vector<logitdif::FlagMatrix> flags; // corpus replication order
    std::vector<int> failed_replications;    // recorded, run continues
};

BaselineRun run_baseline(const io::CorpusManifest& corpus, double alpha, int n_threads = 1);

/// Per (group, item) probabilities and cutpoint flags for one target
/// dataset.
struct FlagReport {
    int n_groups = 0;
    int n_items = 0;
    std::vector<double> threshold_probs; // item-fast within group
    std::vector<double> loading_probs;
    std::vector<std::uint8_t> threshold_flags;
    std::vector<std::uint8_t> loading_flags;
    double cut_thresholds = 0.0;
    double cut_loadings = 0.0;
    std::string model_thresholds_id;
    std::string model_loadings_id;
};

FlagReport flag_target(const dnn::Network& net_thresholds, const dnn::Network& net_loadings,
                       const simgen::ResponseDataset& target, double cut_thresholds,
                       double cut_loadings);

void write_flag_report_csv(const FlagReport& report, const std::filesystem::path& path);

/// Baseline flag matrices as CSV (replication, group, item, flags).
void write_baseline_csv(const BaselineRun& run, const std::filesystem::path& path);

} // namespace difnet::pipeline
