#pragma once

#include "difnet/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace difnet::dnn {

/// Dense feed-forward architecture: input -> 3 rectified-linear hidden
/// layers -> sigmoid output. No bias terms anywhere. Batch
/// normalization after the first hidden layer, 50% inverted dropout on
/// hidden layers 2 and 3 during training.
struct Architecture {
    int input_dim = 0;
    std::array<int, 3> hidden_widths{8000, 8000, 8000};
    int output_dim = 0;

    void validate() const;
};

/// Per-feature batch normalization state for the first hidden layer.
struct BatchNorm {
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
    Eigen::VectorXd running_mean;
    Eigen::VectorXd running_var;
    double epsilon = 1e-3;
    double momentum = 0.99;
};

struct Network {
    Architecture arch;
    std::vector<Eigen::MatrixXd> weights; // 4 matrices, in_dim x out_dim each
    BatchNorm bn;
    double dropout_rate = 0.5;
    int version = 1;

    // Training provenance, carried into the model file.
    std::string target;
    std::uint64_t seed = 0;
    int epochs = 0;
    double stored_cutpoint = -1.0; // < 0 means unset

    bool has_cutpoint() const { return stored_cutpoint >= 0.0; }
};

/// Glorot-uniform weights, identity batch normalization.
Network init_network(const Architecture& arch, Rng& rng);

/// Dropout masks for hidden layers 2 and 3; entries are 0 or
/// 1/keep_probability so surviving activations are pre-scaled
/// (inverted dropout).
struct DropoutMasks {
    Eigen::MatrixXd hidden2;
    Eigen::MatrixXd hidden3;
};

DropoutMasks sample_dropout_masks(int batch_rows, const Architecture& arch, double rate, Rng& rng);

/// Everything the backward pass needs from a train-mode forward.
struct ForwardCache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd z1, a1;           // pre/post rectifier, layer 1
    Eigen::VectorXd batch_mean, batch_var;
    Eigen::MatrixXd xhat, y1;         // normalized and scaled-shifted layer-1 output
    Eigen::MatrixXd z2, d2;           // layer 2 pre-activation, post-dropout
    Eigen::MatrixXd z3, d3;
    Eigen::MatrixXd output;
    DropoutMasks masks;
};

/// Train-mode forward using batch statistics and the given dropout
/// masks. Updates running statistics when update_running_stats is set.
Eigen::MatrixXd forward_train(Network& net, const Eigen::MatrixXd& batch,
                              const DropoutMasks& masks, ForwardCache& cache,
                              bool update_running_stats);

/// Inference-mode forward: running statistics, no dropout. Pure.
Eigen::MatrixXd forward_infer(const Network& net, const Eigen::MatrixXd& batch);

/// Mean binary cross-entropy over all prediction entries; predictions
/// clipped to [1e-7, 1 - 1e-7] before the logarithms.
double bce_loss(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
};

/// Gradients of the mean binary cross-entropy from a train-mode
/// forward cache, differentiating through the batch statistics.
Gradients backward(const Network& net, const ForwardCache& cache, const Eigen::MatrixXd& targets);

struct Velocity {
    std::vector<Eigen::MatrixXd> weights;
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
};

Velocity zero_velocity(const Network& net);

/// Nesterov momentum update, applied in place:
///   v' = m v - lr g;  w' = w + m v' - lr g.
void sgd_nesterov_step(Network& net, const Gradients& grads, Velocity& velocity, double lr,
                       double momentum);

enum class Target { thresholds, loadings };

std::string target_name(Target t);
Target target_from_name(const std::string& name);

struct TrainConfig {
    double learning_rate = 0.1;
    double momentum = 0.8;
    bool nesterov = true; // the only implemented mode; kept for the config surface
    int batch_size = 256;
    int epochs = 3; // 3 for thresholds, 8 for loadings by convention
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
    bool early_stopping = false;
    int log_every = 0; // batches between progress lines, 0 silences

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_auroc;
};

/// In-memory training corpus: one flattened response vector and one
/// label vector per replication.
struct TrainingData {
    int input_dim = 0;
    int output_dim = 0; // per target half: n_items * n_groups
    std::vector<std::vector<std::uint8_t>> inputs;
    std::vector<std::vector<std::uint8_t>> label_halves; // selected target half
};

struct TrainResult {
    Network network;
    TrainHistory history;
};

/// Mini-batch SGD training on the selected label half. Single-threaded
/// and deterministic given cfg.seed.
TrainResult train(const TrainingData& data, Target target, const Architecture& arch,
                  const TrainConfig& cfg);

/// Inference on one flattened response vector; returns output_dim
/// probabilities ordered item-fast within group.
std::vector<double> predict(const Network& net, const std::vector<std::uint8_t>& response_vector);

} // namespace difnet::dnn
