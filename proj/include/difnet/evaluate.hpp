#pragma once

#include "difnet/dif.hpp"
#include "difnet/io.hpp"
#include "difnet/net.hpp"
#include "difnet/roc.hpp"

#include <utility>
#include <vector>

namespace difnet::eval {

/// Predictions and true labels pooled across every replication of a
/// corpus, one score vector per target kind.
struct PooledScores {
    std::vector<double> threshold_scores;
    std::vector<double> loading_scores;
    std::vector<std::uint8_t> threshold_labels;
    std::vector<std::uint8_t> loading_labels;
};

PooledScores pool_predictions(const dnn::Network& net_thresholds,
                              const dnn::Network& net_loadings,
                              const io::CorpusManifest& corpus);

struct PooledEvaluation {
    RocCurve roc_thresholds;
    RocCurve roc_loadings;
    LiuCutpoint cut_thresholds;
    LiuCutpoint cut_loadings;
    ConfusionSummary confusion_thresholds; // at the Liu cutpoint
    ConfusionSummary confusion_loadings;
};

/// ROC curves, AUROC, Liu cutpoints and confusion summaries over the
/// pooled predictions of an evaluation corpus. Throws on degenerate
/// pooled labels (no positives or no negatives for a target).
PooledEvaluation pooled_evaluation(const dnn::Network& net_thresholds,
                                   const dnn::Network& net_loadings,
                                   const io::CorpusManifest& corpus);

/// Pools binary flags against true labels across replications: the
/// single (TPR, FPR) point of a flag-only detector, per target kind
/// (thresholds first, loadings second).
std::pair<ConfusionSummary, ConfusionSummary> baseline_confusion(
    const std::vector<logitdif::FlagMatrix>& flags,
    const std::vector<simgen::LabelVector>& labels);

} // namespace difnet::eval
