#include "difnet/evaluate.hpp"

#include "difnet/errors.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace difnet::eval {

PooledScores pool_predictions(const dnn::Network& net_thresholds,
                              const dnn::Network& net_loadings,
                              const io::CorpusManifest& corpus) {
    const auto& cfg = corpus.config;
    const int input_dim = cfg.n_items * cfg.n_groups * cfg.n_per_group;
    const int half = cfg.n_items * cfg.n_groups;
    for (const dnn::Network* net : {&net_thresholds, &net_loadings}) {
        if (net->arch.input_dim != input_dim || net->arch.output_dim != half)
            throw ConfigError("pooled_evaluation: corpus dimensions (" +
                              std::to_string(input_dim) + " -> " + std::to_string(half) +
                              ") do not match network (" + std::to_string(net->arch.input_dim) +
                              " -> " + std::to_string(net->arch.output_dim) + ")");
    }

    PooledScores pooled;
    const std::size_t total = static_cast<std::size_t>(corpus.n_replications) * half;
    pooled.threshold_scores.reserve(total);
    pooled.loading_scores.reserve(total);
    pooled.threshold_labels.reserve(total);
    pooled.loading_labels.reserve(total);

    constexpr int batch_reps = 256;
    for (int start = 0; start < corpus.n_replications; start += batch_reps) {
        const int end = std::min(start + batch_reps, corpus.n_replications);
        Eigen::MatrixXd x(end - start, input_dim);
        std::vector<simgen::LabelVector> labels;
        labels.reserve(end - start);
        for (int r = start; r < end; ++r) {
            const auto values = io::read_binary_column_file(corpus.response_path(r));
            if (static_cast<int>(values.size()) != input_dim)
                throw ConfigError(corpus.response_path(r).string() + ": expected " +
                                  std::to_string(input_dim) + " responses, got " +
                                  std::to_string(values.size()));
            for (int c = 0; c < input_dim; ++c)
                x(r - start, c) = static_cast<double>(values[c]);
            labels.push_back(io::read_label_file(corpus.label_path(r), cfg.n_groups, cfg.n_items));
        }
        const Eigen::MatrixXd out_t = dnn::forward_infer(net_thresholds, x);
        const Eigen::MatrixXd out_l = dnn::forward_infer(net_loadings, x);
        for (int r = start; r < end; ++r) {
            for (int c = 0; c < half; ++c) {
                pooled.threshold_scores.push_back(out_t(r - start, c));
                pooled.loading_scores.push_back(out_l(r - start, c));
                pooled.threshold_labels.push_back(labels[r - start].flags[c]);
                pooled.loading_labels.push_back(labels[r - start].flags[half + c]);
            }
        }
    }
    return pooled;
}

PooledEvaluation pooled_evaluation(const dnn::Network& net_thresholds,
                                   const dnn::Network& net_loadings,
                                   const io::CorpusManifest& corpus) {
    const PooledScores pooled = pool_predictions(net_thresholds, net_loadings, corpus);

    PooledEvaluation ev;
    ev.roc_thresholds = roc_curve(pooled.threshold_scores, pooled.threshold_labels);
    ev.roc_loadings = roc_curve(pooled.loading_scores, pooled.loading_labels);
    ev.cut_thresholds = liu_cutpoint(pooled.threshold_scores, pooled.threshold_labels);
    ev.cut_loadings = liu_cutpoint(pooled.loading_scores, pooled.loading_labels);
    ev.confusion_thresholds =
        confusion_at(pooled.threshold_scores, pooled.threshold_labels, ev.cut_thresholds.threshold);
    ev.confusion_loadings =
        confusion_at(pooled.loading_scores, pooled.loading_labels, ev.cut_loadings.threshold);
    return ev;
}

std::pair<ConfusionSummary, ConfusionSummary> baseline_confusion(
    const std::vector<logitdif::FlagMatrix>& flags,
    const std::vector<simgen::LabelVector>& labels) {
    if (flags.size() != labels.size())
        throw std::invalid_argument("baseline_confusion: replication counts differ (" +
                                    std::to_string(flags.size()) + " vs " +
                                    std::to_string(labels.size()) + ")");

    std::vector<std::uint8_t> flat_flags_t, flat_flags_l, flat_labels_t, flat_labels_l;
    for (std::size_t r = 0; r < flags.size(); ++r) {
        const auto& f = flags[r];
        const auto& l = labels[r];
        const int half = l.half_size();
        if (f.n_groups != l.n_groups || f.n_items != l.n_items)
            throw std::invalid_argument("baseline_confusion: replication " + std::to_string(r) +
                                        ": flag and label dimensions differ");
        for (int k = 0; k < half; ++k) {
            flat_flags_t.push_back(f.threshold_flags[k]);
            flat_flags_l.push_back(f.loading_flags[k]);
            flat_labels_t.push_back(l.flags[k]);
            flat_labels_l.push_back(l.flags[half + k]);
        }
    }
    return {pooled_confusion(flat_flags_t, flat_labels_t),
            pooled_confusion(flat_flags_l, flat_labels_l)};
}

} // namespace difnet::eval
