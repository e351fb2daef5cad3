#include "difnet/roc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace difnet::eval {

namespace {

struct Tally {
    long long positives = 0;
    long long negatives = 0;
    // Per distinct score, descending: (score, #positives, #negatives).
    std::vector<std::tuple<double, long long, long long>> groups;
};

Tally tally_by_score(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc: scores and labels differ in length");
    if (scores.empty()) throw std::invalid_argument("roc: empty input");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    Tally t;
    for (std::size_t k = 0; k < order.size();) {
        const double s = scores[order[k]];
        long long pos = 0, neg = 0;
        while (k < order.size() && scores[order[k]] == s) {
            if (labels[order[k]]) ++pos;
            else ++neg;
            ++k;
        }
        t.groups.emplace_back(s, pos, neg);
        t.positives += pos;
        t.negatives += neg;
    }
    if (t.positives == 0 || t.negatives == 0)
        throw std::invalid_argument("roc: degenerate labels (need at least one positive and one negative)");
    return t;
}

} // namespace

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    const Tally t = tally_by_score(scores, labels);

    RocCurve curve;
    curve.points.reserve(t.groups.size() + 2);
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    long long tp = 0, fp = 0;
    for (const auto& [score, pos, neg] : t.groups) {
        tp += pos;
        fp += neg;
        curve.points.push_back({score, static_cast<double>(fp) / t.negatives,
                                static_cast<double>(tp) / t.positives});
    }
    // The last distinct-score point is (1,1) by construction.
    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    curve.auroc = area;
    return curve;
}

double auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    return roc_curve(scores, labels).auroc;
}

LiuCutpoint liu_cutpoint(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels) {
    const Tally t = tally_by_score(scores, labels);

    LiuCutpoint best;
    double best_product = -1.0;
    long long tp = 0, fp = 0;
    // Sweeping descending scores: threshold = group score classifies
    // everything at or above it positive.
    for (const auto& [score, pos, neg] : t.groups) {
        tp += pos;
        fp += neg;
        const double sens = static_cast<double>(tp) / t.positives;
        const double spec = static_cast<double>(t.negatives - fp) / t.negatives;
        const double product = sens * spec;
        if (product > best_product || (product == best_product && score < best.threshold)) {
            best_product = product;
            best = {score, sens, spec};
        }
    }
    return best;
}

ConfusionSummary confusion_at(const std::vector<double>& scores,
                              const std::vector<std::uint8_t>& labels, double threshold) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("confusion: scores and labels differ in length");
    ConfusionSummary c;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const bool predicted = scores[k] >= threshold;
        if (labels[k]) {
            predicted ? ++c.tp : ++c.fn;
        } else {
            predicted ? ++c.fp : ++c.tn;
        }
    }
    c.tpr = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    c.fpr = (c.fp + c.tn) > 0 ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
    c.sensitivity = c.tpr;
    c.specificity = 1.0 - c.fpr;
    return c;
}

ConfusionSummary pooled_confusion(const std::vector<std::uint8_t>& flags,
                                  const std::vector<std::uint8_t>& labels) {
    if (flags.size() != labels.size())
        throw std::invalid_argument("pooled_confusion: flags (" + std::to_string(flags.size()) +
                                    ") and labels (" + std::to_string(labels.size()) +
                                    ") differ in length");
    ConfusionSummary c;
    for (std::size_t k = 0; k < flags.size(); ++k) {
        if (labels[k]) {
            flags[k] ? ++c.tp : ++c.fn;
        } else {
            flags[k] ? ++c.fp : ++c.tn;
        }
    }
    c.tpr = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    c.fpr = (c.fp + c.tn) > 0 ? static_cast<double>(c.fp) / (c.fp + c.tn) : 0.0;
    c.sensitivity = c.tpr;
    c.specificity = 1.0 - c.fpr;
    return c;
}

} // namespace difnet::eval
