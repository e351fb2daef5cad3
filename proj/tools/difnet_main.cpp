// difnet — simulate multigroup binary response data with planted
// non-invariance, train detector networks, and evaluate them against a
// pairwise logistic DIF baseline.

#include "difnet/corpus.hpp"
#include "difnet/errors.hpp"
#include "difnet/evaluate.hpp"
#include "difnet/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace difnet;

int cmd_gen(const std::string& config_path, const std::string& out_dir, int reps,
            std::uint64_t seed, int threads) {
    io::ConfigFile cfg;
    if (!config_path.empty()) cfg = io::read_config(config_path);
    const io::CorpusManifest manifest =
        simgen::generate_corpus(cfg.simulation, reps, out_dir, seed, threads);
    std::printf("wrote %d replications to %s (config hash %s)\n", manifest.n_replications,
                out_dir.c_str(), manifest.config_hash.c_str());
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& target_name,
              const std::string& profile, std::optional<int> width, std::optional<int> epochs,
              int batch, double lr, double momentum, std::uint64_t seed,
              const std::string& out_path, int log_every) {
    const io::CorpusManifest manifest =
        io::read_manifest(std::filesystem::path(data_dir) / "manifest.json");
    const dnn::Target target = dnn::target_from_name(target_name);

    dnn::Architecture arch;
    arch.input_dim =
        manifest.config.n_items * manifest.config.n_groups * manifest.config.n_per_group;
    arch.output_dim = manifest.config.n_items * manifest.config.n_groups;
    int w = profile == "paper" ? 8000 : 512;
    if (width) w = *width;
    arch.hidden_widths = {w, w, w};

    dnn::TrainConfig tc;
    tc.learning_rate = lr;
    tc.momentum = momentum;
    tc.batch_size = batch;
    tc.epochs = epochs.value_or(target == dnn::Target::thresholds ? 3 : 8);
    tc.seed = seed;
    tc.log_every = log_every;

    const dnn::TrainResult result = simgen::train_from_manifest(manifest, target, arch, tc);
    io::write_model(result.network, out_path);
    std::printf("trained %s model (%d epochs, width %d) -> %s\n", target_name.c_str(), tc.epochs,
                w, out_path.c_str());
    for (std::size_t e = 0; e < result.history.train_loss.size(); ++e)
        std::printf("  epoch %zu: train loss %.5f, val loss %.5f, val auroc %.4f\n", e + 1,
                    result.history.train_loss[e], result.history.val_loss[e],
                    result.history.val_auroc[e]);
    return 0;
}

int cmd_eval(const std::string& model_t, const std::string& model_l, const std::string& data_dir,
             const std::string& out_dir, bool svg) {
    const dnn::Network net_t = io::read_model(model_t);
    const dnn::Network net_l = io::read_model(model_l);
    const io::CorpusManifest manifest =
        io::read_manifest(std::filesystem::path(data_dir) / "manifest.json");

    const eval::PooledEvaluation ev = eval::pooled_evaluation(net_t, net_l, manifest);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    io::write_roc_csv(ev.roc_thresholds, dir / "roc_thresholds.csv");
    io::write_roc_csv(ev.roc_loadings, dir / "roc_loadings.csv");
    io::write_summary_csv(
        {{"thresholds", ev.roc_thresholds.auroc, ev.cut_thresholds.threshold,
          ev.confusion_thresholds.sensitivity, ev.confusion_thresholds.specificity},
         {"loadings", ev.roc_loadings.auroc, ev.cut_loadings.threshold,
          ev.confusion_loadings.sensitivity, ev.confusion_loadings.specificity}},
        dir / "summary.csv");
    if (svg)
        io::write_roc_svg({{"thresholds", &ev.roc_thresholds}, {"loadings", &ev.roc_loadings}}, {},
                          dir / "roc.svg");

    std::printf("thresholds: AUROC %.4f, cutpoint %.4f (sens %.3f, spec %.3f)\n",
                ev.roc_thresholds.auroc, ev.cut_thresholds.threshold,
                ev.confusion_thresholds.sensitivity, ev.confusion_thresholds.specificity);
    std::printf("loadings:   AUROC %.4f, cutpoint %.4f (sens %.3f, spec %.3f)\n",
                ev.roc_loadings.auroc, ev.cut_loadings.threshold,
                ev.confusion_loadings.sensitivity, ev.confusion_loadings.specificity);
    return 0;
}

int cmd_baseline(const std::string& data_dir, double alpha, const std::string& out_csv,
                 int threads) {
    const io::CorpusManifest manifest =
        io::read_manifest(std::filesystem::path(data_dir) / "manifest.json");
    const pipeline::BaselineRun run = pipeline::run_baseline(manifest, alpha, threads);
    pipeline::write_baseline_csv(run, out_csv);

    std::vector<simgen::LabelVector> labels;
    labels.reserve(manifest.n_replications);
    for (int r = 0; r < manifest.n_replications; ++r)
        labels.push_back(io::read_label_file(manifest.label_path(r), manifest.config.n_groups,
                                             manifest.config.n_items));
    const auto [conf_t, conf_l] = eval::baseline_confusion(run.flags, labels);
    std::printf("thresholds: TPR %.4f, FPR %.4f\n", conf_t.tpr, conf_t.fpr);
    std::printf("loadings:   TPR %.4f, FPR %.4f\n", conf_l.tpr, conf_l.fpr);
    if (!run.failed_replications.empty())
        std::printf("%zu replication(s) failed and were skipped\n",
                    run.failed_replications.size());
    return 0;
}

int cmd_predict(const std::string& model_t, const std::string& model_l,
                const std::string& target_csv, int groups, int items, int per_group,
                std::optional<double> cut_t, std::optional<double> cut_l,
                const std::string& out_csv) {
    const dnn::Network net_t = io::read_model(model_t);
    const dnn::Network net_l = io::read_model(model_l);
    const simgen::ResponseDataset target =
        io::read_response_file(target_csv, groups, items, per_group);

    double ct = cut_t.value_or(net_t.stored_cutpoint);
    double cl = cut_l.value_or(net_l.stored_cutpoint);
    if (ct < 0.0)
        throw ConfigError("no threshold cutpoint: model stores none, pass --cut-thresholds");
    if (cl < 0.0)
        throw ConfigError("no loading cutpoint: model stores none, pass --cut-loadings");

    const pipeline::FlagReport report = pipeline::flag_target(net_t, net_l, target, ct, cl);
    pipeline::write_flag_report_csv(report, out_csv);

    int flagged = 0;
    for (int k = 0; k < groups * items; ++k)
        flagged += report.threshold_flags[k] + report.loading_flags[k];
    std::printf("wrote %s (%d of %d parameters flagged)\n", out_csv.c_str(), flagged,
                2 * groups * items);
    return 0;
}

int cmd_study(int condition, const std::string& scale, std::uint64_t seed,
              const std::string& out_dir, std::optional<int> train_reps,
              std::optional<int> eval_reps, std::optional<int> width, int threads, bool svg,
              int log_every) {
    const pipeline::StudyCondition cond = pipeline::condition_preset(condition);
    const pipeline::StudyScale s = pipeline::resolve_scale(cond, scale);

    pipeline::StudyRunOptions opts;
    opts.train_reps = train_reps;
    opts.eval_reps = eval_reps;
    opts.hidden_width = width;
    opts.gen_threads = threads;
    opts.baseline_threads = threads;
    opts.svg = svg;
    opts.log_every = log_every;

    const pipeline::StudyReport report = pipeline::run_condition(cond, s, seed, out_dir, opts);
    std::printf("condition %d (scale %s): thresholds AUROC %.4f, loadings AUROC %.4f\n",
                condition, scale.c_str(), report.thresholds.auroc, report.loadings.auroc);
    std::printf("baseline point: thresholds TPR %.3f / FPR %.3f, loadings TPR %.3f / FPR %.3f\n",
                report.baseline_thresholds.tpr, report.baseline_thresholds.fpr,
                report.baseline_loadings.tpr, report.baseline_loadings.fpr);
    std::printf("report: %s\n", (std::filesystem::path(out_dir) / "report.json").c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"difnet: DNN-based measurement non-invariance detection workbench"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a simulated corpus");
    std::string gen_config, gen_out;
    int gen_reps = 100, gen_threads = 1;
    std::uint64_t gen_seed = 1;
    gen->add_option("--config", gen_config, "JSON config file (defaults used when omitted)");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--reps", gen_reps, "number of replications")->required();
    gen->add_option("--seed", gen_seed, "master seed")->required();
    gen->add_option("--threads", gen_threads, "generation worker threads");

    // train
    auto* train = app.add_subcommand("train", "train a detector network on a corpus");
    std::string train_data, train_target, train_profile = "desk", train_out;
    std::optional<int> train_width, train_epochs;
    int train_batch = 256, train_log = 0;
    double train_lr = 0.1, train_momentum = 0.8;
    std::uint64_t train_seed = 1;
    train->add_option("--data", train_data, "corpus directory")->required();
    train->add_option("--target", train_target, "thresholds|loadings")->required();
    train->add_option("--profile", train_profile, "paper (width 8000) or desk (width 512)")
        ->check(CLI::IsMember({"paper", "desk"}));
    train->add_option("--width", train_width, "hidden width override");
    train->add_option("--epochs", train_epochs, "epochs (default 3 thresholds / 8 loadings)");
    train->add_option("--batch", train_batch, "mini-batch size");
    train->add_option("--lr", train_lr, "learning rate");
    train->add_option("--momentum", train_momentum, "momentum");
    train->add_option("--seed", train_seed, "training seed")->required();
    train->add_option("--out", train_out, "output model file")->required();
    train->add_option("--log-every", train_log, "log every N batches (0 = quiet)");

    // eval
    auto* evalc = app.add_subcommand("eval", "pooled ROC evaluation of two models on a corpus");
    std::string eval_mt, eval_ml, eval_data, eval_out;
    bool eval_svg = false;
    evalc->add_option("--model-thresholds", eval_mt, "thresholds model file")->required();
    evalc->add_option("--model-loadings", eval_ml, "loadings model file")->required();
    evalc->add_option("--data", eval_data, "evaluation corpus directory")->required();
    evalc->add_option("--out", eval_out, "output directory")->required();
    evalc->add_flag("--svg", eval_svg, "also write an SVG ROC plot");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "pairwise logistic DIF baseline on a corpus");
    std::string base_data, base_out;
    double base_alpha = 0.01;
    int base_threads = 1;
    baseline->add_option("--data", base_data, "corpus directory")->required();
    baseline->add_option("--alpha", base_alpha, "significance level");
    baseline->add_option("--out", base_out, "output CSV")->required();
    baseline->add_option("--threads", base_threads, "worker threads");

    // predict
    auto* predict = app.add_subcommand("predict", "flag non-invariance in a target dataset");
    std::string pred_mt, pred_ml, pred_target, pred_out;
    int pred_groups = 0, pred_items = 0, pred_per_group = 0;
    std::optional<double> pred_cut_t, pred_cut_l;
    predict->add_option("--model-thresholds", pred_mt, "thresholds model file")->required();
    predict->add_option("--model-loadings", pred_ml, "loadings model file")->required();
    predict->add_option("--target", pred_target, "target response CSV")->required();
    predict->add_option("--groups", pred_groups, "number of groups")->required();
    predict->add_option("--items", pred_items, "number of items")->required();
    predict->add_option("--per-group", pred_per_group, "respondents per group")->required();
    predict->add_option("--cut-thresholds", pred_cut_t, "threshold cutpoint override");
    predict->add_option("--cut-loadings", pred_cut_l, "loading cutpoint override");
    predict->add_option("--out", pred_out, "output report CSV")->required();

    // study
    auto* study = app.add_subcommand("study", "run one simulation-study condition end to end");
    int study_condition = 1, study_threads = 1, study_log = 0;
    std::string study_scale = "small", study_out;
    std::uint64_t study_seed = 1;
    std::optional<int> study_train_reps, study_eval_reps, study_width;
    bool study_svg = false;
    study->add_option("--condition", study_condition, "1|2|3|4")->required();
    study->add_option("--scale", study_scale, "fraction of paper replication counts, or 'small'");
    study->add_option("--seed", study_seed, "master seed")->required();
    study->add_option("--out", study_out, "study directory")->required();
    study->add_option("--train-reps", study_train_reps, "training replications override");
    study->add_option("--eval-reps", study_eval_reps, "evaluation replications override");
    study->add_option("--width", study_width, "hidden width override");
    study->add_option("--threads", study_threads, "generation/baseline worker threads");
    study->add_flag("--svg", study_svg, "write an SVG ROC plot");
    study->add_option("--log-every", study_log, "log every N training batches");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_config, gen_out, gen_reps, gen_seed, gen_threads);
        if (train->parsed())
            return cmd_train(train_data, train_target, train_profile, train_width, train_epochs,
                             train_batch, train_lr, train_momentum, train_seed, train_out,
                             train_log);
        if (evalc->parsed()) return cmd_eval(eval_mt, eval_ml, eval_data, eval_out, eval_svg);
        if (baseline->parsed()) return cmd_baseline(base_data, base_alpha, base_out, base_threads);
        if (predict->parsed())
            return cmd_predict(pred_mt, pred_ml, pred_target, pred_groups, pred_items,
                               pred_per_group, pred_cut_t, pred_cut_l, pred_out);
        if (study->parsed())
            return cmd_study(study_condition, study_scale, study_seed, study_out, study_train_reps,
                             study_eval_reps, study_width, study_threads, study_svg, study_log);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
