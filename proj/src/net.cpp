#include "difnet/net.hpp"

#include "difnet/errors.hpp"
#include "difnet/roc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace difnet::dnn {

void Architecture::validate() const {
    if (input_dim < 1) throw ConfigError("architecture: input_dim must be >= 1");
    if (output_dim < 1) throw ConfigError("architecture: output_dim must be >= 1");
    for (int w : hidden_widths)
        if (w < 1) throw ConfigError("architecture: hidden widths must be >= 1");
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("train config: learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0)
        throw ConfigError("train config: momentum must be in [0, 1)");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    const double total = train_fraction + val_fraction + test_fraction;
    if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction < 0.0 ||
        std::fabs(total - 1.0) > 1e-9)
        throw ConfigError("train config: split fractions must be nonnegative and sum to 1");
}

std::string target_name(Target t) {
    return t == Target::thresholds ? "thresholds" : "loadings";
}

Target target_from_name(const std::string& name) {
    if (name == "thresholds") return Target::thresholds;
    if (name == "loadings") return Target::loadings;
    throw ConfigError("unknown target '" + name + "' (expected thresholds or loadings)");
}

Network init_network(const Architecture& arch, Rng& rng) {
    arch.validate();
    Network net;
    net.arch = arch;

    const std::array<int, 5> dims{arch.input_dim, arch.hidden_widths[0], arch.hidden_widths[1],
                                  arch.hidden_widths[2], arch.output_dim};
    net.weights.reserve(4);
    for (int l = 0; l < 4; ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_in, fan_out);
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-limit, limit);
        net.weights.push_back(std::move(w));
    }

    const int h1 = arch.hidden_widths[0];
    net.bn.gamma = Eigen::VectorXd::Ones(h1);
    net.bn.beta = Eigen::VectorXd::Zero(h1);
    net.bn.running_mean = Eigen::VectorXd::Zero(h1);
    net.bn.running_var = Eigen::VectorXd::Ones(h1);
    return net;
}

DropoutMasks sample_dropout_masks(int batch_rows, const Architecture& arch, double rate,
                                  Rng& rng) {
    const double keep = 1.0 - rate;
    const double scale = 1.0 / keep;
    auto sample = [&](int cols) {
        Eigen::MatrixXd m(batch_rows, cols);
        for (int i = 0; i < batch_rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform() < keep ? scale : 0.0;
        return m;
    };
    return {sample(arch.hidden_widths[1]), sample(arch.hidden_widths[2])};
}

namespace {

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd out(z.rows(), z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const double t = z(i, j);
            if (t >= 0.0)
                out(i, j) = 1.0 / (1.0 + std::exp(-t));
            else {
                const double e = std::exp(t);
                out(i, j) = e / (1.0 + e);
            }
        }
    return out;
}

void check_batch(const Network& net, const Eigen::MatrixXd& batch) {
    if (batch.cols() != net.arch.input_dim)
        throw std::invalid_argument("forward: batch has " + std::to_string(batch.cols()) +
                                    " columns, network expects " +
                                    std::to_string(net.arch.input_dim));
}

} // namespace

Eigen::MatrixXd forward_train(Network& net, const Eigen::MatrixXd& batch,
                              const DropoutMasks& masks, ForwardCache& cache,
                              bool update_running_stats) {
    check_batch(net, batch);
    const Eigen::Index rows = batch.rows();
    if (masks.hidden2.rows() != rows || masks.hidden3.rows() != rows ||
        masks.hidden2.cols() != net.arch.hidden_widths[1] ||
        masks.hidden3.cols() != net.arch.hidden_widths[2])
        throw std::invalid_argument("forward: dropout mask shape does not match batch");

    cache.input = batch;
    cache.masks = masks;

    cache.z1.noalias() = batch * net.weights[0];
    cache.a1 = relu(cache.z1);

    const double n = static_cast<double>(rows);
    cache.batch_mean = cache.a1.colwise().mean().transpose();
    Eigen::MatrixXd centered = cache.a1.rowwise() - cache.batch_mean.transpose();
    cache.batch_var = (centered.array().square().colwise().sum() / n).matrix().transpose();

    const Eigen::ArrayXd inv_std = (cache.batch_var.array() + net.bn.epsilon).sqrt().inverse();
    cache.xhat = (centered.array().rowwise() * inv_std.transpose()).matrix();
    cache.y1 = ((cache.xhat.array().rowwise() * net.bn.gamma.transpose().array()).rowwise() +
                net.bn.beta.transpose().array())
                   .matrix();

    if (update_running_stats) {
        const double m = net.bn.momentum;
        net.bn.running_mean = m * net.bn.running_mean + (1.0 - m) * cache.batch_mean;
        net.bn.running_var = m * net.bn.running_var + (1.0 - m) * cache.batch_var;
    }

    cache.z2.noalias() = cache.y1 * net.weights[1];
    cache.d2 = relu(cache.z2).cwiseProduct(masks.hidden2);

    cache.z3.noalias() = cache.d2 * net.weights[2];
    cache.d3 = relu(cache.z3).cwiseProduct(masks.hidden3);

    cache.output = sigmoid(cache.d3 * net.weights[3]);
    return cache.output;
}

Eigen::MatrixXd forward_infer(const Network& net, const Eigen::MatrixXd& batch) {
    check_batch(net, batch);

    Eigen::MatrixXd a1 = relu(batch * net.weights[0]);
    const Eigen::ArrayXd inv_std = (net.bn.running_var.array() + net.bn.epsilon).sqrt().inverse();
    const Eigen::ArrayXd scale = net.bn.gamma.array() * inv_std;
    Eigen::MatrixXd centered = a1.rowwise() - net.bn.running_mean.transpose();
    Eigen::MatrixXd y1 = ((centered.array().rowwise() * scale.transpose()).rowwise() +
                          net.bn.beta.transpose().array())
                             .matrix();

    Eigen::MatrixXd h2 = relu(y1 * net.weights[1]);
    Eigen::MatrixXd h3 = relu(h2 * net.weights[2]);
    return sigmoid(h3 * net.weights[3]);
}

double bce_loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target) {
    if (predicted.size() == 0) throw std::invalid_argument("bce_loss: empty input");
    if (predicted.rows() != target.rows() || predicted.cols() != target.cols())
        throw std::invalid_argument("bce_loss: prediction and target shapes differ");

    const Eigen::ArrayXXd p = predicted.array().max(1e-7).min(1.0 - 1e-7);
    const Eigen::ArrayXXd y = target.array();
    const double total = -(y * p.log() + (1.0 - y) * (1.0 - p).log()).sum();
    return total / static_cast<double>(predicted.size());
}

Gradients backward(const Network& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& targets) {
    if (cache.output.rows() != targets.rows() || cache.output.cols() != targets.cols())
        throw std::invalid_argument("backward: target shape does not match cached batch");

    Gradients g;
    g.weights.resize(4);

    const double count = static_cast<double>(cache.output.size());
    Eigen::MatrixXd dz4 = (cache.output - targets) / count;

    g.weights[3].noalias() = cache.d3.transpose() * dz4;
    Eigen::MatrixXd dd3 = dz4 * net.weights[3].transpose();
    Eigen::MatrixXd dz3 = dd3.cwiseProduct(cache.masks.hidden3)
                              .cwiseProduct((cache.z3.array() > 0.0).cast<double>().matrix());

    g.weights[2].noalias() = cache.d2.transpose() * dz3;
    Eigen::MatrixXd dd2 = dz3 * net.weights[2].transpose();
    Eigen::MatrixXd dz2 = dd2.cwiseProduct(cache.masks.hidden2)
                              .cwiseProduct((cache.z2.array() > 0.0).cast<double>().matrix());

    g.weights[1].noalias() = cache.y1.transpose() * dz2;
    Eigen::MatrixXd dy1 = dz2 * net.weights[1].transpose();

    // Batch-norm backward, differentiating through the batch statistics.
    const double n = static_cast<double>(cache.a1.rows());
    const Eigen::ArrayXd inv_std = (cache.batch_var.array() + net.bn.epsilon).sqrt().inverse();
    Eigen::MatrixXd centered = cache.a1.rowwise() - cache.batch_mean.transpose();

    g.gamma = dy1.cwiseProduct(cache.xhat).colwise().sum().transpose();
    g.beta = dy1.colwise().sum().transpose();

    Eigen::MatrixXd dxhat = (dy1.array().rowwise() * net.bn.gamma.transpose().array()).matrix();
    const Eigen::ArrayXd dvar =
        dxhat.cwiseProduct(centered).colwise().sum().transpose().array() * (-0.5) *
        inv_std.pow(3);
    const Eigen::ArrayXd dmean =
        -(dxhat.colwise().sum().transpose().array()) * inv_std +
        dvar * (-2.0 / n) * centered.colwise().sum().transpose().array();

    Eigen::MatrixXd da1 = ((dxhat.array().rowwise() * inv_std.transpose() +
                            centered.array().rowwise() * (dvar * 2.0 / n).transpose())
                               .rowwise() +
                           (dmean / n).transpose())
                              .matrix();

    Eigen::MatrixXd dz1 = da1.cwiseProduct((cache.z1.array() > 0.0).cast<double>().matrix());
    g.weights[0].noalias() = cache.input.transpose() * dz1;

    return g;
}

Velocity zero_velocity(const Network& net) {
    Velocity v;
    for (const auto& w : net.weights)
        v.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    v.gamma = Eigen::VectorXd::Zero(net.bn.gamma.size());
    v.beta = Eigen::VectorXd::Zero(net.bn.beta.size());
    return v;
}

void sgd_nesterov_step(Network& net, const Gradients& grads, Velocity& velocity, double lr,
                       double momentum) {
    auto update = [&](auto& param, const auto& grad, auto& vel) {
        vel = momentum * vel - lr * grad;
        param += momentum * vel - lr * grad;
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        update(net.weights[l], grads.weights[l], velocity.weights[l]);
    update(net.bn.gamma, grads.gamma, velocity.gamma);
    update(net.bn.beta, grads.beta, velocity.beta);
}

namespace {

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<std::uint8_t>>& data,
                               const std::vector<int>& indices, int begin, int end, int cols) {
    Eigen::MatrixXd m(end - begin, cols);
    for (int r = begin; r < end; ++r)
        for (int c = 0; c < cols; ++c)
            m(r - begin, c) = static_cast<double>(data[indices[r]][c]);
    return m;
}

/// Pooled validation metrics in inference mode, batched.
void validation_metrics(const Network& net, const TrainingData& data,
                        const std::vector<int>& val_indices, int batch_size, double& loss,
                        double& auroc_value) {
    if (val_indices.empty()) {
        loss = std::numeric_limits<double>::quiet_NaN();
        auroc_value = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    scores.reserve(val_indices.size() * data.output_dim);
    labels.reserve(val_indices.size() * data.output_dim);

    double total_loss = 0.0;
    std::size_t total_entries = 0;
    for (std::size_t start = 0; start < val_indices.size();
         start += static_cast<std::size_t>(batch_size)) {
        const int begin = static_cast<int>(start);
        const int end = static_cast<int>(
            std::min(start + static_cast<std::size_t>(batch_size), val_indices.size()));
        Eigen::MatrixXd x = rows_to_matrix(data.inputs, val_indices, begin, end, data.input_dim);
        Eigen::MatrixXd y =
            rows_to_matrix(data.label_halves, val_indices, begin, end, data.output_dim);
        Eigen::MatrixXd out = forward_infer(net, x);
        total_loss += bce_loss(out, y) * static_cast<double>(out.size());
        total_entries += static_cast<std::size_t>(out.size());
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c) {
                scores.push_back(out(r, c));
                labels.push_back(static_cast<std::uint8_t>(y(r, c)));
            }
    }
    loss = total_loss / static_cast<double>(total_entries);

    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
    auroc_value = (has_pos && has_neg) ? eval::auroc(scores, labels)
                                       : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

TrainResult train(const TrainingData& data, Target target, const Architecture& arch,
                  const TrainConfig& cfg) {
    arch.validate();
    cfg.validate();
    if (data.inputs.empty()) throw ConfigError("train: empty corpus");
    if (data.input_dim != arch.input_dim)
        throw ConfigError("train: corpus input dimension " + std::to_string(data.input_dim) +
                          " does not match architecture input_dim " +
                          std::to_string(arch.input_dim));
    if (data.output_dim != arch.output_dim)
        throw ConfigError("train: corpus label dimension " + std::to_string(data.output_dim) +
                          " does not match architecture output_dim " +
                          std::to_string(arch.output_dim));

    Rng rng(cfg.seed);
    Network net = init_network(arch, rng);
    net.target = target_name(target);
    net.seed = cfg.seed;
    net.epochs = cfg.epochs;

    const int n = static_cast<int>(data.inputs.size());
    const int n_train = std::max(1, static_cast<int>(std::floor(n * cfg.train_fraction)));
    const int n_val = static_cast<int>(std::floor(n * cfg.val_fraction));

    std::vector<int> train_idx(n_train);
    std::iota(train_idx.begin(), train_idx.end(), 0);
    std::vector<int> val_idx(n_val);
    std::iota(val_idx.begin(), val_idx.end(), n_train);

    Velocity velocity = zero_velocity(net);
    TrainHistory history;
    double best_val_loss = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        std::size_t epoch_entries = 0;
        int batch_no = 0;
        for (int begin = 0; begin < n_train; begin += cfg.batch_size, ++batch_no) {
            const int end = std::min(begin + cfg.batch_size, n_train);
            Eigen::MatrixXd x = rows_to_matrix(data.inputs, train_idx, begin, end, data.input_dim);
            Eigen::MatrixXd y =
                rows_to_matrix(data.label_halves, train_idx, begin, end, data.output_dim);

            DropoutMasks masks =
                sample_dropout_masks(static_cast<int>(x.rows()), arch, net.dropout_rate, rng);
            ForwardCache cache;
            Eigen::MatrixXd out = forward_train(net, x, masks, cache, true);
            epoch_loss += bce_loss(out, y) * static_cast<double>(out.size());
            epoch_entries += static_cast<std::size_t>(out.size());

            Gradients grads = backward(net, cache, y);
            sgd_nesterov_step(net, grads, velocity, cfg.learning_rate, cfg.momentum);

            if (cfg.log_every > 0 && batch_no % cfg.log_every == 0)
                std::fprintf(stderr, "  epoch %d batch %d loss %.5f\n", epoch + 1, batch_no,
                             bce_loss(out, y));
        }
        history.train_loss.push_back(epoch_loss / static_cast<double>(epoch_entries));

        double val_loss = 0.0, val_auc = 0.0;
        validation_metrics(net, data, val_idx, cfg.batch_size, val_loss, val_auc);
        history.val_loss.push_back(val_loss);
        history.val_auroc.push_back(val_auc);

        if (cfg.log_every > 0)
            std::fprintf(stderr, "epoch %d/%d train loss %.5f val loss %.5f val auroc %.4f\n",
                         epoch + 1, cfg.epochs, history.train_loss.back(), val_loss, val_auc);

        if (cfg.early_stopping && !std::isnan(val_loss)) {
            if (val_loss > best_val_loss) break;
            best_val_loss = val_loss;
        }
    }

    return {std::move(net), std::move(history)};
}

std::vector<double> predict(const Network& net, const std::vector<std::uint8_t>& response_vector) {
    if (static_cast<int>(response_vector.size()) != net.arch.input_dim)
        throw std::invalid_argument(
            "predict: input length " + std::to_string(response_vector.size()) +
            " does not match network input_dim " + std::to_string(net.arch.input_dim));
    Eigen::MatrixXd x(1, net.arch.input_dim);
    for (int c = 0; c < net.arch.input_dim; ++c) x(0, c) = static_cast<double>(response_vector[c]);
    Eigen::MatrixXd out = forward_infer(net, x);
    std::vector<double> probs(out.cols());
    for (Eigen::Index c = 0; c < out.cols(); ++c) probs[c] = out(0, c);
    return probs;
}

} // namespace difnet::dnn
