#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hharnet/matrix.hpp"
#include "hharnet/rng.hpp"

namespace hharnet::nn {

enum class OutputActivation { Softmax, Sigmoid };
enum class Optimizer { Adam, Sgd };

/// Feedforward network configuration. Hidden layers use ReLU; the output head
/// is softmax for multi-class models and a single sigmoid unit for the binary
/// root of the hierarchy.
struct MlpConfig {
    std::size_t input_dim = 225;
    std::vector<std::size_t> hidden_dims = {256, 512, 128};
    std::size_t output_dim = 6;
    OutputActivation output_activation = OutputActivation::Softmax;
    double dropout_rate = 0.3;  // inverted dropout after every hidden layer
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t batch_size = 256;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;
    std::uint64_t seed = 0;

    void validate() const;

    bool operator==(const MlpConfig&) const = default;

    /// input_dim, hidden..., output_dim
    std::vector<std::size_t> layer_dims() const;

    /// Number of classes the model distinguishes: output_dim for softmax,
    /// 2 for the single-sigmoid binary head.
    std::size_t class_count() const {
        return output_activation == OutputActivation::Sigmoid ? 2 : output_dim;
    }
};

struct MlpModel {
    MlpConfig config;
    std::vector<Matrix> weights;              // weights[l]: dims[l] x dims[l+1]
    std::vector<std::vector<double>> biases;  // biases[l]: dims[l+1]
    std::vector<double> class_weights;        // class_count() entries

    bool operator==(const MlpModel&) const = default;
};

/// Per-epoch training history. best_epoch indexes the epoch with the lowest
/// validation loss; its parameters are the ones the returned model carries.
struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_accuracy;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
};

/// Activations cached by a training-mode forward pass, consumed by backward().
struct ForwardCache {
    Matrix input;                          // B x input_dim
    std::vector<Matrix> hidden;            // post-ReLU, pre-dropout
    std::vector<Matrix> dropout_scale;     // 0 or 1/(1-rate); empty when rate == 0
    std::vector<Matrix> hidden_after_drop; // what the next layer consumed
    Matrix probs;                          // B x output_dim
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

/// Inverse-frequency class weights: w_k = N / (K * count_k), mean weight 1.
/// Throws TrainingError naming the class if a count is zero.
std::vector<double> class_weights(std::span<const std::size_t> counts);

/// Seeded He-uniform initialization (biases zero).
MlpModel init_model(const MlpConfig& config, std::vector<double> class_weights);

/// Batched forward pass. In training mode, dropout masks are drawn from `rng`
/// (required when dropout_rate > 0) and recorded in the cache.
void forward_batch(const MlpModel& model, const Matrix& x, bool training, Rng* rng,
                   ForwardCache& cache);

/// Forward pass with caller-supplied dropout scale matrices (one per hidden
/// layer, entries 0 or 1/(1-rate)). Deterministic; used to replay a recorded
/// pass, e.g. when checking gradients under dropout.
void forward_batch_with_masks(const MlpModel& model, const Matrix& x,
                              const std::vector<Matrix>& dropout_scale,
                              ForwardCache& cache);

/// Single-sample forward pass; returns the head output (softmax probabilities
/// or the sigmoid activation).
std::vector<double> forward(const MlpModel& model, std::span<const double> x,
                            bool training, Rng* rng, ForwardCache* cache = nullptr);

/// Weighted loss for one sample. Softmax head: -w_true * ln(p_true).
/// Sigmoid binary head: -w_true * ln(p) for class 1, -w_true * ln(1-p) for
/// class 0. Probabilities are clamped to [1e-12, 1-1e-12] before the log.
double weighted_cross_entropy(std::span<const double> probs, int true_class,
                              std::span<const double> class_weights,
                              OutputActivation head);

/// Mean weighted loss over the cached batch.
double batch_loss(const MlpModel& model, const ForwardCache& cache,
                  std::span<const int> true_classes);

/// Analytic gradients of the mean weighted loss over the cached batch, with
/// respect to every weight and bias. Respects the dropout masks recorded in
/// the cache.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const int> true_classes);

/// Mini-batch training with early stopping on validation loss. Restores the
/// best-epoch parameters. Deterministic given config.seed.
std::pair<MlpModel, TrainReport> train(const MlpConfig& config, const Matrix& x_train,
                                       std::span<const int> y_train, const Matrix& x_val,
                                       std::span<const int> y_val,
                                       std::vector<double> class_weights);

/// Head outputs in inference mode (no dropout, deterministic).
std::vector<double> predict_proba(const MlpModel& model, std::span<const double> x);

/// Class id: argmax for softmax (ties toward the lowest index), threshold
/// p >= 0.5 -> 1 for the sigmoid binary head.
int predict(const MlpModel& model, std::span<const double> x);

/// predict() over every row.
std::vector<int> predict_batch(const MlpModel& model, const Matrix& x);

}  // namespace hharnet::nn
