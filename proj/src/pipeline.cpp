#include "difnet/pipeline.hpp"

#include "difnet/errors.hpp"
#include "difnet/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace difnet::pipeline {

using nlohmann::json;

StudyCondition condition_preset(int condition_id) {
    StudyCondition c;
    c.condition_id = condition_id;
    switch (condition_id) {
    case 1: c.n_groups = 4; c.n_items = 5; break;
    case 2: c.n_groups = 10; c.n_items = 5; break;
    case 3: c.n_groups = 4; c.n_items = 3; break;
    case 4: c.n_groups = 10; c.n_items = 3; break;
    default: throw ConfigError("condition must be 1, 2, 3 or 4");
    }
    return c;
}

StudyScale resolve_scale(const StudyCondition& cond, const std::string& scale) {
    StudyScale s;
    s.label = scale;
    if (scale == "small") {
        s.train_reps = 200;
        s.eval_reps = 50;
        s.hidden_width = 128;
        return s;
    }
    double factor = 0.0;
    try {
        std::size_t consumed = 0;
        factor = std::stod(scale, &consumed);
        if (consumed != scale.size()) throw std::invalid_argument(scale);
    } catch (const std::exception&) {
        throw ConfigError("scale must be a number in (0, 1] or 'small', got '" + scale + "'");
    }
    if (factor <= 0.0 || factor > 1.0)
        throw ConfigError("scale must be in (0, 1], got " + scale);
    s.train_reps = std::max(1, static_cast<int>(std::lround(cond.n_training_reps * factor)));
    s.eval_reps = std::max(1, static_cast<int>(std::lround(cond.n_eval_reps * factor)));
    s.hidden_width = factor < 1.0 ? 512 : 8000;
    return s;
}

namespace {

simgen::SimulationConfig condition_simulation_config(const StudyCondition& cond) {
    simgen::SimulationConfig cfg; // defaults carry the ESS-fitted distributions
    cfg.n_groups = cond.n_groups;
    cfg.n_items = cond.n_items;
    cfg.n_per_group = cond.n_per_group;
    cfg.max_biased_items = cond.n_items >= 5 ? 3 : 2;
    return cfg;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json history_to_json(const dnn::TrainHistory& h) {
    return json{{"train_loss", h.train_loss}, {"val_loss", h.val_loss}, {"val_auroc", h.val_auroc}};
}

dnn::TrainHistory history_from_json(const json& j) {
    dnn::TrainHistory h;
    h.train_loss = j.at("train_loss").get<std::vector<double>>();
    h.val_loss = j.at("val_loss").get<std::vector<double>>();
    h.val_auroc = j.at("val_auroc").get<std::vector<double>>();
    return h;
}

json metrics_to_json(const StudyReport& r) {
    auto target = [](const TargetMetrics& m) {
        return json{{"auroc", m.auroc},
                    {"cutpoint", m.cutpoint},
                    {"sensitivity", m.sensitivity},
                    {"specificity", m.specificity},
                    {"fpr_at_cutpoint", m.fpr_at_cutpoint}};
    };
    return json{{"thresholds", target(r.thresholds)},
                {"loadings", target(r.loadings)},
                {"baseline",
                 json{{"thresholds", json{{"tpr", r.baseline_thresholds.tpr},
                                          {"fpr", r.baseline_thresholds.fpr}}},
                      {"loadings", json{{"tpr", r.baseline_loadings.tpr},
                                        {"fpr", r.baseline_loadings.fpr}}},
                      {"failed_replications", r.baseline_failures}}}};
}

TargetMetrics target_from_json(const json& j) {
    TargetMetrics m;
    m.auroc = j.at("auroc").get<double>();
    m.cutpoint = j.at("cutpoint").get<double>();
    m.sensitivity = j.at("sensitivity").get<double>();
    m.specificity = j.at("specificity").get<double>();
    m.fpr_at_cutpoint = j.at("fpr_at_cutpoint").get<double>();
    return m;
}

} // namespace

BaselineRun run_baseline(const io::CorpusManifest& corpus, double alpha, int n_threads) {
    BaselineRun run;
    run.flags.resize(corpus.n_replications);
    std::vector<std::uint8_t> failed(corpus.n_replications, 0);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= corpus.n_replications) break;
            try {
                const simgen::ResponseDataset data = io::read_response_file(
                    corpus.response_path(r), corpus.config.n_groups, corpus.config.n_items,
                    corpus.config.n_per_group);
                run.flags[r] = logitdif::majority_flags(data, alpha, 1);
            } catch (const std::exception&) {
                failed[r] = 1;
                // Leave an all-zero matrix so downstream ordering holds.
                logitdif::FlagMatrix empty;
                empty.n_groups = corpus.config.n_groups;
                empty.n_items = corpus.config.n_items;
                empty.threshold_flags.assign(
                    static_cast<std::size_t>(empty.n_groups) * empty.n_items, 0);
                empty.loading_flags = empty.threshold_flags;
                run.flags[r] = std::move(empty);
            }
        }
    };

    const int threads = std::max(1, n_threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (int r = 0; r < corpus.n_replications; ++r)
        if (failed[r]) run.failed_replications.push_back(r);
    return run;
}

FlagReport flag_target(const dnn::Network& net_thresholds, const dnn::Network& net_loadings,
                       const simgen::ResponseDataset& target, double cut_thresholds,
                       double cut_loadings) {
    const int input_dim = target.n_groups * target.n_items * target.n_per_group;
    const int half = target.n_groups * target.n_items;
    for (const dnn::Network* net : {&net_thresholds, &net_loadings}) {
        if (net->arch.input_dim != input_dim || net->arch.output_dim != half)
            throw std::invalid_argument(
                "flag_target: target shape (" + std::to_string(target.n_groups) + " groups x " +
                std::to_string(target.n_items) + " items x " + std::to_string(target.n_per_group) +
                " per group = " + std::to_string(input_dim) + " -> " + std::to_string(half) +
                ") does not match network (" + std::to_string(net->arch.input_dim) + " -> " +
                std::to_string(net->arch.output_dim) + ")");
    }

    const std::vector<std::uint8_t> flat = target.flatten();
    FlagReport report;
    report.n_groups = target.n_groups;
    report.n_items = target.n_items;
    report.threshold_probs = dnn::predict(net_thresholds, flat);
    report.loading_probs = dnn::predict(net_loadings, flat);
    report.cut_thresholds = cut_thresholds;
    report.cut_loadings = cut_loadings;
    report.model_thresholds_id = net_thresholds.target + "-" + std::to_string(net_thresholds.seed);
    report.model_loadings_id = net_loadings.target + "-" + std::to_string(net_loadings.seed);
    report.threshold_flags.resize(half);
    report.loading_flags.resize(half);
    for (int k = 0; k < half; ++k) {
        report.threshold_flags[k] = report.threshold_probs[k] >= cut_thresholds ? 1 : 0;
        report.loading_flags[k] = report.loading_probs[k] >= cut_loadings ? 1 : 0;
    }
    return report;
}

StudyReport run_condition(const StudyCondition& cond, const StudyScale& scale,
                          std::uint64_t master_seed, const std::filesystem::path& study_dir,
                          const StudyRunOptions& opts) {
    const int train_reps = opts.train_reps.value_or(scale.train_reps);
    const int eval_reps = opts.eval_reps.value_or(scale.eval_reps);
    const int width = opts.hidden_width.value_or(scale.hidden_width);
    if (train_reps < 10) throw ConfigError("study: need at least 10 training replications");
    if (eval_reps < 1) throw ConfigError("study: need at least 1 evaluation replication");

    std::filesystem::create_directories(study_dir);

    StudyReport report;
    report.condition = cond;
    report.scale = scale;
    report.scale.train_reps = train_reps;
    report.scale.eval_reps = eval_reps;
    report.scale.hidden_width = width;
    report.master_seed = master_seed;
    report.train_manifest = "train/manifest.json";
    report.eval_manifest = "eval/manifest.json";
    report.model_thresholds = "model_thresholds.json";
    report.model_loadings = "model_loadings.json";

    const simgen::SimulationConfig sim = condition_simulation_config(cond);

    auto t0 = std::chrono::steady_clock::now();
    const io::CorpusManifest train_corpus = simgen::generate_corpus(
        sim, train_reps, study_dir / "train", derive_seed(master_seed, 1000001), opts.gen_threads);
    report.timings_sec["generate_train"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const io::CorpusManifest eval_corpus = simgen::generate_corpus(
        sim, eval_reps, study_dir / "eval", derive_seed(master_seed, 1000002), opts.gen_threads);
    report.timings_sec["generate_eval"] = seconds_since(t0);

    dnn::Architecture arch;
    arch.input_dim = cond.n_items * cond.n_groups * cond.n_per_group;
    arch.hidden_widths = {width, width, width};
    arch.output_dim = cond.n_items * cond.n_groups;

    dnn::TrainConfig tc;
    tc.learning_rate = opts.learning_rate;
    tc.momentum = opts.momentum;
    tc.batch_size = opts.batch_size;
    tc.log_every = opts.log_every;

    t0 = std::chrono::steady_clock::now();
    tc.epochs = opts.epochs_thresholds;
    tc.seed = derive_seed(master_seed, 1000003);
    dnn::TrainResult trained_t =
        simgen::train_from_manifest(train_corpus, dnn::Target::thresholds, arch, tc);
    report.timings_sec["train_thresholds"] = seconds_since(t0);
    report.history_thresholds = trained_t.history;

    t0 = std::chrono::steady_clock::now();
    tc.epochs = opts.epochs_loadings;
    tc.seed = derive_seed(master_seed, 1000004);
    dnn::TrainResult trained_l =
        simgen::train_from_manifest(train_corpus, dnn::Target::loadings, arch, tc);
    report.timings_sec["train_loadings"] = seconds_since(t0);
    report.history_loadings = trained_l.history;

    t0 = std::chrono::steady_clock::now();
    const eval::PooledEvaluation ev =
        eval::pooled_evaluation(trained_t.network, trained_l.network, eval_corpus);
    report.timings_sec["evaluate"] = seconds_since(t0);

    report.thresholds = {ev.roc_thresholds.auroc, ev.cut_thresholds.threshold,
                         ev.confusion_thresholds.sensitivity, ev.confusion_thresholds.specificity,
                         ev.confusion_thresholds.fpr};
    report.loadings = {ev.roc_loadings.auroc, ev.cut_loadings.threshold,
                       ev.confusion_loadings.sensitivity, ev.confusion_loadings.specificity,
                       ev.confusion_loadings.fpr};

    // Models carry their evaluation-pool cutpoint for later prediction.
    trained_t.network.stored_cutpoint = ev.cut_thresholds.threshold;
    trained_l.network.stored_cutpoint = ev.cut_loadings.threshold;
    io::write_model(trained_t.network, study_dir / report.model_thresholds);
    io::write_model(trained_l.network, study_dir / report.model_loadings);

    if (opts.with_baseline) {
        t0 = std::chrono::steady_clock::now();
        const BaselineRun baseline = run_baseline(eval_corpus, 0.01, opts.baseline_threads);
        std::vector<simgen::LabelVector> labels;
        labels.reserve(eval_reps);
        for (int r = 0; r < eval_reps; ++r)
            labels.push_back(
                io::read_label_file(eval_corpus.label_path(r), sim.n_groups, sim.n_items));
        const auto [conf_t, conf_l] = eval::baseline_confusion(baseline.flags, labels);
        report.baseline_thresholds = {conf_t.tpr, conf_t.fpr};
        report.baseline_loadings = {conf_l.tpr, conf_l.fpr};
        report.baseline_failures = static_cast<int>(baseline.failed_replications.size());
        write_baseline_csv(baseline, study_dir / "baseline_flags.csv");
        report.timings_sec["baseline"] = seconds_since(t0);
    }

    io::write_roc_csv(ev.roc_thresholds, study_dir / "roc_thresholds.csv");
    io::write_roc_csv(ev.roc_loadings, study_dir / "roc_loadings.csv");
    io::write_summary_csv(
        {{"thresholds", report.thresholds.auroc, report.thresholds.cutpoint,
          report.thresholds.sensitivity, report.thresholds.specificity},
         {"loadings", report.loadings.auroc, report.loadings.cutpoint,
          report.loadings.sensitivity, report.loadings.specificity}},
        study_dir / "summary.csv");
    if (opts.svg) {
        std::vector<io::SvgPoint> points;
        if (opts.with_baseline) {
            points.push_back({report.baseline_thresholds.fpr, report.baseline_thresholds.tpr,
                              "logistic thresholds"});
            points.push_back(
                {report.baseline_loadings.fpr, report.baseline_loadings.tpr, "logistic loadings"});
        }
        io::write_roc_svg({{"thresholds", &ev.roc_thresholds}, {"loadings", &ev.roc_loadings}},
                          points, study_dir / "roc.svg");
    }

    write_study_report(report, study_dir / "report.json");
    return report;
}

std::string report_metrics_json(const StudyReport& report) {
    return metrics_to_json(report).dump(2);
}

void write_study_report(const StudyReport& report, const std::filesystem::path& path) {
    json j{{"format", "difnet-study"},
           {"version", 1},
           {"condition",
            json{{"condition_id", report.condition.condition_id},
                 {"n_groups", report.condition.n_groups},
                 {"n_items", report.condition.n_items},
                 {"n_per_group", report.condition.n_per_group},
                 {"n_training_reps", report.condition.n_training_reps},
                 {"n_eval_reps", report.condition.n_eval_reps}}},
           {"scale",
            json{{"label", report.scale.label},
                 {"train_reps", report.scale.train_reps},
                 {"eval_reps", report.scale.eval_reps},
                 {"hidden_width", report.scale.hidden_width}}},
           {"master_seed", report.master_seed},
           {"files",
            json{{"train_manifest", report.train_manifest},
                 {"eval_manifest", report.eval_manifest},
                 {"model_thresholds", report.model_thresholds},
                 {"model_loadings", report.model_loadings}}},
           {"metrics", metrics_to_json(report)},
           {"history",
            json{{"thresholds", history_to_json(report.history_thresholds)},
                 {"loadings", history_to_json(report.history_loadings)}}},
           {"timings_sec", report.timings_sec}};
    io::write_text_atomic(j.dump(2) + "\n", path);
}

StudyReport read_study_report(const std::filesystem::path& path) {
    json j;
    try {
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open " + path.string());
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != "difnet-study")
        throw FormatError(path.string() + ": not a study report");

    StudyReport r;
    const json& c = j.at("condition");
    r.condition.condition_id = c.at("condition_id").get<int>();
    r.condition.n_groups = c.at("n_groups").get<int>();
    r.condition.n_items = c.at("n_items").get<int>();
    r.condition.n_per_group = c.at("n_per_group").get<int>();
    r.condition.n_training_reps = c.at("n_training_reps").get<int>();
    r.condition.n_eval_reps = c.at("n_eval_reps").get<int>();
    const json& s = j.at("scale");
    r.scale.label = s.at("label").get<std::string>();
    r.scale.train_reps = s.at("train_reps").get<int>();
    r.scale.eval_reps = s.at("eval_reps").get<int>();
    r.scale.hidden_width = s.at("hidden_width").get<int>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    const json& f = j.at("files");
    r.train_manifest = f.at("train_manifest").get<std::string>();
    r.eval_manifest = f.at("eval_manifest").get<std::string>();
    r.model_thresholds = f.at("model_thresholds").get<std::string>();
    r.model_loadings = f.at("model_loadings").get<std::string>();
    const json& m = j.at("metrics");
    r.thresholds = target_from_json(m.at("thresholds"));
    r.loadings = target_from_json(m.at("loadings"));
    r.baseline_thresholds = {m.at("baseline").at("thresholds").at("tpr").get<double>(),
                             m.at("baseline").at("thresholds").at("fpr").get<double>()};
    r.baseline_loadings = {m.at("baseline").at("loadings").at("tpr").get<double>(),
                           m.at("baseline").at("loadings").at("fpr").get<double>()};
    r.baseline_failures = m.at("baseline").at("failed_replications").get<int>();
    r.history_thresholds = history_from_json(j.at("history").at("thresholds"));
    r.history_loadings = history_from_json(j.at("history").at("loadings"));
    r.timings_sec = j.at("timings_sec").get<std::map<std::string, double>>();
    return r;
}

void write_flag_report_csv(const FlagReport& report, const std::filesystem::path& path) {
    std::string body = "group,item,threshold_prob,loading_prob,threshold_flag,loading_flag\n";
    for (int g = 0; g < report.n_groups; ++g)
        for (int i = 0; i < report.n_items; ++i) {
            const int k = g * report.n_items + i;
            body += std::to_string(g + 1) + "," + std::to_string(i + 1) + "," +
                    io::format_double(report.threshold_probs[k]) + "," +
                    io::format_double(report.loading_probs[k]) + "," +
                    std::to_string(static_cast<int>(report.threshold_flags[k])) + "," +
                    std::to_string(static_cast<int>(report.loading_flags[k])) + "\n";
        }
    io::write_text_atomic(body, path);
}

void write_baseline_csv(const BaselineRun& run, const std::filesystem::path& path) {
    std::string body = "replication,group,item,threshold_flag,loading_flag\n";
    for (std::size_t r = 0; r < run.flags.size(); ++r) {
        const auto& f = run.flags[r];
        for (int g = 0; g < f.n_groups; ++g)
            for (int i = 0; i < f.n_items; ++i)
                body += std::to_string(r + 1) + "," + std::to_string(g + 1) + "," +
                        std::to_string(i + 1) + "," + std::to_string(static_cast<int>(f.threshold_at(g, i))) +
                        "," + std::to_string(static_cast<int>(f.loading_at(g, i))) + "\n";
    }
    io::write_text_atomic(body, path);
}

} // namespace difnet::pipeline
