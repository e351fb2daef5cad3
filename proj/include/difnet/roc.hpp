#pragma once

#include <cstdint>
#include <vector>

namespace difnet::eval {

struct RocPoint {
    double threshold; // classify positive when score >= threshold
    double fpr;
    double tpr;
};

/// Points sorted by ascending FPR, one per distinct score (ties
/// grouped), with (0,0) and (1,1) endpoints. auroc is the trapezoidal
/// area, which equals the Mann-Whitney statistic with half-credit ties.
struct RocCurve {
    std::vector<RocPoint> points;
    double auroc = 0.0;
};

struct ConfusionSummary {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    double tpr = 0.0, fpr = 0.0;
    double sensitivity = 0.0, specificity = 0.0;
};

struct LiuCutpoint {
    double threshold = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

/// Throws std::invalid_argument unless labels contain at least one
/// positive and one negative.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

double auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

/// Cutpoint maximizing sensitivity * specificity over the distinct
/// score thresholds; ties broken toward the smaller threshold.
LiuCutpoint liu_cutpoint(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels);

/// Confusion counts for the rule score >= threshold.
ConfusionSummary confusion_at(const std::vector<double>& scores,
                              const std::vector<std::uint8_t>& labels, double threshold);

/// Pooled binary flags vs true labels: the single ROC point of a
/// flag-only detector.
ConfusionSummary pooled_confusion(const std::vector<std::uint8_t>& flags,
                                  const std::vector<std::uint8_t>& labels);

} // namespace difnet::eval
