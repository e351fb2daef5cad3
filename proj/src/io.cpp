#include "difnet/io.hpp"

#include "difnet/errors.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace difnet::io {

using nlohmann::json;

std::string format_double(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void require_keys(const json& obj, const std::filesystem::path& path,
                  const std::vector<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw FormatError(path.string() + ": unknown key '" + key + "' in " + where);
    }
}

double get_num(const json& obj, const char* key, const std::filesystem::path& path) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw FormatError(path.string() + ": missing or non-numeric field '" + key + "'");
    return obj[key].get<double>();
}

} // namespace

void write_text_atomic(const std::string& content, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------
// Binary column files
// ---------------------------------------------------------------------

void write_binary_column_file(const std::vector<std::uint8_t>& values,
                              const std::filesystem::path& path) {
    std::string body;
    body.reserve(values.size() * 2 + 2);
    body += "x\n";
    for (std::uint8_t v : values) {
        body += v ? '1' : '0';
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::uint8_t> read_binary_column_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x" && line != "\"x\"")
        throw FormatError(path.string() + ": line 1: expected header 'x', got '" + line + "'");

    std::vector<std::uint8_t> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        if (line == "0")
            values.push_back(0);
        else if (line == "1")
            values.push_back(1);
        else
            throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                              ": expected 0 or 1, got '" + line + "'");
    }
    return values;
}

void write_response_file(const simgen::ResponseDataset& dataset,
                         const std::filesystem::path& path) {
    write_binary_column_file(dataset.flatten(), path);
}

simgen::ResponseDataset read_response_file(const std::filesystem::path& path, int n_groups,
                                           int n_items, int n_per_group) {
    const auto values = read_binary_column_file(path);
    try {
        return simgen::unflatten_responses(values, n_groups, n_items, n_per_group);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_label_file(const simgen::LabelVector& labels, const std::filesystem::path& path) {
    write_binary_column_file(labels.flags, path);
}

simgen::LabelVector read_label_file(const std::filesystem::path& path, int n_groups,
                                    int n_items) {
    const auto values = read_binary_column_file(path);
    const std::size_t expected = 2 * static_cast<std::size_t>(n_groups) * n_items;
    if (values.size() != expected)
        throw FormatError(path.string() + ": label vector length mismatch: expected " +
                          std::to_string(expected) + " values, got " +
                          std::to_string(values.size()));
    simgen::LabelVector labels;
    labels.n_groups = n_groups;
    labels.n_items = n_items;
    labels.flags = values;
    return labels;
}

// ---------------------------------------------------------------------
// Simulation config <-> JSON
// ---------------------------------------------------------------------

namespace {

json skew_to_json(const simgen::SkewDist& d) {
    return json{{"mean", d.mean}, {"sd", d.sd}, {"xi", d.xi}, {"lower", d.lower}, {"upper", d.upper}};
}

simgen::SkewDist skew_from_json(const json& j, const std::filesystem::path& path,
                                const std::string& where) {
    require_keys(j, path, {"mean", "sd", "xi", "lower", "upper"}, where);
    simgen::SkewDist d;
    d.mean = get_num(j, "mean", path);
    d.sd = get_num(j, "sd", path);
    d.xi = get_num(j, "xi", path);
    d.lower = get_num(j, "lower", path);
    d.upper = get_num(j, "upper", path);
    return d;
}

json simulation_to_json(const simgen::SimulationConfig& c) {
    return json{{"n_groups", c.n_groups},
                {"n_items", c.n_items},
                {"n_per_group", c.n_per_group},
                {"loading_dist", skew_to_json(c.loading_dist)},
                {"threshold_dist", skew_to_json(c.threshold_dist)},
                {"group_mean_dist", json{{"mean", c.group_mean_dist.mean}, {"sd", c.group_mean_dist.sd}}},
                {"group_sd_range", json{{"lower", c.group_sd_range.lower}, {"upper", c.group_sd_range.upper}}},
                {"bias_threshold_range",
                 json{{"lower", c.bias_threshold_range.lower}, {"upper", c.bias_threshold_range.upper}}},
                {"bias_loading_range",
                 json{{"lower", c.bias_loading_range.lower}, {"upper", c.bias_loading_range.upper}}},
                {"max_biased_items", c.max_biased_items},
                {"seed", c.seed}};
}

simgen::Range range_from_json(const json& j, const std::filesystem::path& path,
                              const std::string& where) {
    require_keys(j, path, {"lower", "upper"}, where);
    return {get_num(j, "lower", path), get_num(j, "upper", path)};
}

simgen::SimulationConfig simulation_from_json(const json& j, const std::filesystem::path& path) {
    require_keys(j, path,
                 {"n_groups", "n_items", "n_per_group", "loading_dist", "threshold_dist",
                  "group_mean_dist", "group_sd_range", "bias_threshold_range",
                  "bias_loading_range", "max_biased_items", "seed"},
                 "simulation config");
    simgen::SimulationConfig c;
    if (j.contains("n_groups")) c.n_groups = static_cast<int>(get_num(j, "n_groups", path));
    if (j.contains("n_items")) c.n_items = static_cast<int>(get_num(j, "n_items", path));
    if (j.contains("n_per_group"))
        c.n_per_group = static_cast<int>(get_num(j, "n_per_group", path));
    if (j.contains("loading_dist"))
        c.loading_dist = skew_from_json(j["loading_dist"], path, "loading_dist");
    if (j.contains("threshold_dist"))
        c.threshold_dist = skew_from_json(j["threshold_dist"], path, "threshold_dist");
    if (j.contains("group_mean_dist")) {
        require_keys(j["group_mean_dist"], path, {"mean", "sd"}, "group_mean_dist");
        c.group_mean_dist.mean = get_num(j["group_mean_dist"], "mean", path);
        c.group_mean_dist.sd = get_num(j["group_mean_dist"], "sd", path);
    }
    if (j.contains("group_sd_range"))
        c.group_sd_range = range_from_json(j["group_sd_range"], path, "group_sd_range");
    if (j.contains("bias_threshold_range"))
        c.bias_threshold_range =
            range_from_json(j["bias_threshold_range"], path, "bias_threshold_range");
    if (j.contains("bias_loading_range"))
        c.bias_loading_range =
            range_from_json(j["bias_loading_range"], path, "bias_loading_range");
    if (j.contains("max_biased_items"))
        c.max_biased_items = static_cast<int>(get_num(j, "max_biased_items", path));
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return c;
}

} // namespace

std::string config_hash(const simgen::SimulationConfig& config) {
    const std::string canonical = simulation_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

// ---------------------------------------------------------------------
// Corpus manifest
// ---------------------------------------------------------------------

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
    json j{{"format", "difnet-corpus"},
           {"version", 1},
           {"master_seed", manifest.master_seed},
           {"n_replications", manifest.n_replications},
           {"config_hash", manifest.config_hash},
           {"simulation", simulation_to_json(manifest.config)},
           {"response_files", manifest.response_files},
           {"label_files", manifest.label_files}};
    write_text_atomic(j.dump(2) + "\n", path);
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    if (!j.contains("format") || j["format"] != "difnet-corpus")
        throw FormatError(path.string() + ": not a corpus manifest");
    CorpusManifest m;
    m.directory = path.parent_path();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.n_replications = j.at("n_replications").get<int>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = simulation_from_json(j.at("simulation"), path);
    m.response_files = j.at("response_files").get<std::vector<std::string>>();
    m.label_files = j.at("label_files").get<std::vector<std::string>>();
    if (static_cast<int>(m.response_files.size()) != m.n_replications ||
        static_cast<int>(m.label_files.size()) != m.n_replications)
        throw FormatError(path.string() + ": file lists do not match n_replications");
    return m;
}

// ---------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------

void write_model(const dnn::Network& net, const std::filesystem::path& path) {
    json layers = json::array();
    for (const auto& w : net.weights) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) flat.push_back(w(i, j));
        layers.push_back(json{{"rows", w.rows()}, {"cols", w.cols()}, {"weights", std::move(flat)}});
    }

    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };

    json j{{"format", "difnet-model"},
           {"version", net.version},
           {"architecture",
            json{{"input_dim", net.arch.input_dim},
                 {"hidden_widths", net.arch.hidden_widths},
                 {"output_dim", net.arch.output_dim},
                 {"hidden_activation", "relu"},
                 {"output_activation", "sigmoid"},
                 {"use_bias", false}}},
           {"layers", std::move(layers)},
           {"batch_norm",
            json{{"gamma", vec(net.bn.gamma)},
                 {"beta", vec(net.bn.beta)},
                 {"running_mean", vec(net.bn.running_mean)},
                 {"running_var", vec(net.bn.running_var)},
                 {"epsilon", net.bn.epsilon},
                 {"momentum", net.bn.momentum}}},
           {"dropout_rate", net.dropout_rate},
           {"training", json{{"target", net.target}, {"seed", net.seed}, {"epochs", net.epochs}}}};
    if (net.has_cutpoint()) j["cutpoint"] = net.stored_cutpoint;

    write_text_atomic(j.dump() + "\n", path);
}

dnn::Network read_model(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    if (!j.contains("format") || j["format"] != "difnet-model")
        throw FormatError(path.string() + ": not a model file");

    dnn::Network net;
    net.version = j.at("version").get<int>();

    const json& arch = j.at("architecture");
    net.arch.input_dim = arch.at("input_dim").get<int>();
    net.arch.output_dim = arch.at("output_dim").get<int>();
    const auto widths = arch.at("hidden_widths").get<std::vector<int>>();
    if (widths.size() != 3)
        throw FormatError(path.string() + ": expected 3 hidden widths");
    std::copy(widths.begin(), widths.end(), net.arch.hidden_widths.begin());
    if (arch.contains("use_bias") && arch["use_bias"].get<bool>())
        throw FormatError(path.string() + ": bias terms are not supported");

    for (const json& layer : j.at("layers")) {
        const auto rows = layer.at("rows").get<Eigen::Index>();
        const auto cols = layer.at("cols").get<Eigen::Index>();
        const auto flat = layer.at("weights").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
            throw FormatError(path.string() + ": layer weight count does not match rows*cols");
        Eigen::MatrixXd w(rows, cols);
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index jcol = 0; jcol < cols; ++jcol) w(i, jcol) = flat[k++];
        net.weights.push_back(std::move(w));
    }
    if (net.weights.size() != 4)
        throw FormatError(path.string() + ": expected 4 weight matrices");

    auto vec = [&](const json& arr) {
        const auto v = arr.get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))
            .eval();
    };
    const json& bn = j.at("batch_norm");
    net.bn.gamma = vec(bn.at("gamma"));
    net.bn.beta = vec(bn.at("beta"));
    net.bn.running_mean = vec(bn.at("running_mean"));
    net.bn.running_var = vec(bn.at("running_var"));
    net.bn.epsilon = bn.at("epsilon").get<double>();
    net.bn.momentum = bn.at("momentum").get<double>();

    net.dropout_rate = j.at("dropout_rate").get<double>();
    const json& training = j.at("training");
    net.target = training.at("target").get<std::string>();
    net.seed = training.at("seed").get<std::uint64_t>();
    net.epochs = training.at("epochs").get<int>();
    if (j.contains("cutpoint")) net.stored_cutpoint = j["cutpoint"].get<double>();

    // Shape consistency.
    const std::array<Eigen::Index, 5> dims{net.arch.input_dim, net.arch.hidden_widths[0],
                                           net.arch.hidden_widths[1], net.arch.hidden_widths[2],
                                           net.arch.output_dim};
    for (int l = 0; l < 4; ++l)
        if (net.weights[l].rows() != dims[l] || net.weights[l].cols() != dims[l + 1])
            throw FormatError(path.string() + ": layer " + std::to_string(l) +
                              " shape does not match the declared architecture");
    if (net.bn.gamma.size() != dims[1] || net.bn.beta.size() != dims[1] ||
        net.bn.running_mean.size() != dims[1] || net.bn.running_var.size() != dims[1])
        throw FormatError(path.string() + ": batch-norm vectors do not match layer width");
    return net;
}

// ---------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------

ConfigFile read_config(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    require_keys(j, path, {"simulation", "training", "hidden_width"}, "config");

    ConfigFile cfg;
    if (j.contains("simulation")) cfg.simulation = simulation_from_json(j["simulation"], path);
    if (j.contains("training")) {
        const json& t = j["training"];
        require_keys(t, path,
                     {"learning_rate", "momentum", "nesterov", "batch_size", "epochs",
                      "train_fraction", "val_fraction", "test_fraction", "seed",
                      "early_stopping"},
                     "training config");
        if (t.contains("learning_rate")) cfg.training.learning_rate = get_num(t, "learning_rate", path);
        if (t.contains("momentum")) cfg.training.momentum = get_num(t, "momentum", path);
        if (t.contains("nesterov")) cfg.training.nesterov = t["nesterov"].get<bool>();
        if (t.contains("batch_size")) cfg.training.batch_size = static_cast<int>(get_num(t, "batch_size", path));
        if (t.contains("epochs")) cfg.training.epochs = static_cast<int>(get_num(t, "epochs", path));
        if (t.contains("train_fraction")) cfg.training.train_fraction = get_num(t, "train_fraction", path);
        if (t.contains("val_fraction")) cfg.training.val_fraction = get_num(t, "val_fraction", path);
        if (t.contains("test_fraction")) cfg.training.test_fraction = get_num(t, "test_fraction", path);
        if (t.contains("seed")) cfg.training.seed = t["seed"].get<std::uint64_t>();
        if (t.contains("early_stopping")) cfg.training.early_stopping = t["early_stopping"].get<bool>();
        try {
            cfg.training.validate();
        } catch (const ConfigError& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }
    if (j.contains("hidden_width")) {
        cfg.hidden_width = static_cast<int>(get_num(j, "hidden_width", path));
        if (cfg.hidden_width < 1)
            throw FormatError(path.string() + ": hidden_width must be >= 1");
    }
    return cfg;
}

void write_config(const ConfigFile& config, const std::filesystem::path& path) {
    json j{{"simulation", simulation_to_json(config.simulation)},
           {"training",
            json{{"learning_rate", config.training.learning_rate},
                 {"momentum", config.training.momentum},
                 {"nesterov", config.training.nesterov},
                 {"batch_size", config.training.batch_size},
                 {"epochs", config.training.epochs},
                 {"train_fraction", config.training.train_fraction},
                 {"val_fraction", config.training.val_fraction},
                 {"test_fraction", config.training.test_fraction},
                 {"seed", config.training.seed},
                 {"early_stopping", config.training.early_stopping}}},
           {"hidden_width", config.hidden_width}};
    write_text_atomic(j.dump(2) + "\n", path);
}

// ---------------------------------------------------------------------
// CSV / SVG exports
// ---------------------------------------------------------------------

void write_roc_csv(const eval::RocCurve& curve, const std::filesystem::path& path) {
    std::string body = "threshold,fpr,tpr\n";
    for (const auto& p : curve.points)
        body += format_double(p.threshold) + "," + format_double(p.fpr) + "," +
                format_double(p.tpr) + "\n";
    write_text_atomic(body, path);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
    std::string body = "target,auroc,cutpoint,sensitivity,specificity\n";
    for (const auto& r : rows)
        body += r.target + "," + format_double(r.auroc) + "," + format_double(r.cutpoint) + "," +
                format_double(r.sensitivity) + "," + format_double(r.specificity) + "\n";
    write_text_atomic(body, path);
}

void write_roc_svg(const std::vector<std::pair<std::string, const eval::RocCurve*>>& curves,
                   const std::vector<SvgPoint>& points, const std::filesystem::path& path) {
    const double size = 440.0, margin = 40.0, plot = size - 2 * margin;
    auto px = [&](double fpr) { return margin + fpr * plot; };
    auto py = [&](double tpr) { return size - margin - tpr * plot; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
    s << "<rect width=\"" << size << "\" height=\"" << size << "\" fill=\"white\"/>\n";
    s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
      << py(1) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
    s << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\""
      << plot << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << size / 2 << "\" y=\"" << size - 8
      << "\" text-anchor=\"middle\" font-size=\"13\">false positive rate</text>\n";
    s << "<text x=\"12\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 12 " << size / 2 << ")\">true positive rate</text>\n";

    int color = 0;
    double legend_y = margin + 14;
    for (const auto& [name, curve] : curves) {
        s << "<polyline fill=\"none\" stroke=\"" << palette[color % 4] << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : curve->points) s << px(p.fpr) << "," << py(p.tpr) << " ";
        s << "\"/>\n";
        s << "<text x=\"" << px(0.45) << "\" y=\"" << legend_y << "\" font-size=\"12\" fill=\""
          << palette[color % 4] << "\">" << name << " (AUROC " << format_double(curve->auroc).substr(0, 6)
          << ")</text>\n";
        ++color;
        legend_y += 16;
    }
    for (const auto& p : points) {
        s << "<circle cx=\"" << px(p.fpr) << "\" cy=\"" << py(p.tpr)
          << "\" r=\"4\" fill=\"black\"/>\n";
        s << "<text x=\"" << px(p.fpr) + 6 << "\" y=\"" << py(p.tpr) - 6 << "\" font-size=\"11\">"
          << p.label << "</text>\n";
    }
    s << "</svg>\n";
    write_text_atomic(s.str(), path);
}

} // namespace difnet::io
