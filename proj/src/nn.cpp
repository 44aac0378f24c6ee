#include "hharnet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hharnet/error.hpp"

namespace hharnet::nn {

namespace {

// C (m x n) = A (m x k) * B (k x n). Zero entries of A are skipped; post-ReLU
// activations are sparse enough for this to pay off.
void mm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    c = Matrix(m, n);
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* cd = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ad + i * k;
        double* crow = cd + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = bd + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C (m x n) = A (k x m)^T * B (k x n)
void mm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    c = Matrix(m, n);
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* cd = c.data().data();
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = ad + p * m;
        const double* brow = bd + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = cd + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C (m x n) = A (m x k) * B (n x k)^T
void mm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    c = Matrix(m, n);
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* cd = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = ad + i * k;
        double* crow = cd + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = bd + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

void add_bias_rows(Matrix& m, const std::vector<double>& bias) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* row = m.data().data() + i * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) row[j] += bias[j];
    }
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void apply_head(Matrix& z, OutputActivation head) {
    if (head == OutputActivation::Sigmoid) {
        for (double& v : z.data()) v = sigmoid(v);
        return;
    }
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.data().data() + i * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += row[j];
    }
    return out;
}

enum class MaskMode { kNone, kDraw, kGiven };

void forward_impl(const MlpModel& model, const Matrix& x, MaskMode mode, Rng* rng,
                  const std::vector<Matrix>* given_masks, ForwardCache& cache) {
    const MlpConfig& cfg = model.config;
    if (x.cols() != cfg.input_dim)
        throw DimensionError("forward: input has " + std::to_string(x.cols()) +
                             " features, model expects " + std::to_string(cfg.input_dim));
    const std::size_t n_hidden = cfg.hidden_dims.size();
    if (model.weights.size() != n_hidden + 1)
        throw DimensionError("forward: model has wrong layer count");

    const bool use_dropout =
        (mode == MaskMode::kDraw && cfg.dropout_rate > 0.0) || mode == MaskMode::kGiven;
    if (mode == MaskMode::kDraw && cfg.dropout_rate > 0.0 && rng == nullptr)
        throw Error("forward: rng required for dropout in training mode");
    if (mode == MaskMode::kGiven && given_masks->size() != n_hidden)
        throw DimensionError("forward: expected one dropout mask per hidden layer");

    cache.input = x;
    cache.hidden.assign(n_hidden, Matrix{});
    cache.dropout_scale.clear();
    cache.hidden_after_drop.clear();
    if (use_dropout) {
        cache.dropout_scale.assign(n_hidden, Matrix{});
        cache.hidden_after_drop.assign(n_hidden, Matrix{});
    }

    const Matrix* current = &cache.input;
    Matrix z;
    for (std::size_t l = 0; l < n_hidden; ++l) {
        mm_nn(*current, model.weights[l], z);
        add_bias_rows(z, model.biases[l]);
        for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
        cache.hidden[l] = std::move(z);
        z = Matrix{};
        if (use_dropout) {
            Matrix scale;
            if (mode == MaskMode::kGiven) {
                scale = (*given_masks)[l];
                if (scale.rows() != cache.hidden[l].rows() ||
                    scale.cols() != cache.hidden[l].cols())
                    throw DimensionError("forward: dropout mask shape mismatch at layer " +
                                         std::to_string(l));
            } else {
                scale = Matrix(cache.hidden[l].rows(), cache.hidden[l].cols());
                const double keep_scale = 1.0 / (1.0 - cfg.dropout_rate);
                for (double& v : scale.data())
                    v = rng->next_double() < cfg.dropout_rate ? 0.0 : keep_scale;
            }
            Matrix dropped = cache.hidden[l];
            for (std::size_t t = 0; t < dropped.data().size(); ++t)
                dropped.data()[t] *= scale.data()[t];
            cache.dropout_scale[l] = std::move(scale);
            cache.hidden_after_drop[l] = std::move(dropped);
            current = &cache.hidden_after_drop[l];
        } else {
            current = &cache.hidden[l];
        }
    }
    mm_nn(*current, model.weights[n_hidden], z);
    add_bias_rows(z, model.biases[n_hidden]);
    apply_head(z, cfg.output_activation);
    cache.probs = std::move(z);
}

// Activations the layer above actually consumed.
const Matrix& consumed(const ForwardCache& cache, std::size_t l) {
    return cache.hidden_after_drop.empty() ? cache.hidden[l]
                                           : cache.hidden_after_drop[l];
}

int decide(std::span<const double> probs, OutputActivation head) {
    if (head == OutputActivation::Sigmoid) return probs[0] >= 0.5 ? 1 : 0;
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j) {
        if (probs[j] > probs[best]) best = j;
    }
    return static_cast<int>(best);
}

void check_labels(std::span<const int> y, std::size_t class_count, const char* what) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= class_count)
            throw TrainingError(std::string(what) + " label " + std::to_string(y[i]) +
                                " out of range at index " + std::to_string(i));
    }
}

struct OptimizerState {
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;
    std::size_t t = 0;

    explicit OptimizerState(const MlpModel& model) {
        for (const auto& w : model.weights) {
            mw.emplace_back(w.rows(), w.cols());
            vw.emplace_back(w.rows(), w.cols());
        }
        for (const auto& b : model.biases) {
            mb.emplace_back(b.size(), 0.0);
            vb.emplace_back(b.size(), 0.0);
        }
    }
};

void adam_update(std::vector<double>& p, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v, const MlpConfig& cfg,
                 double bias1, double bias2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
    }
}

void apply_gradients(MlpModel& model, const Gradients& grads, OptimizerState& state) {
    const MlpConfig& cfg = model.config;
    if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            auto& w = model.weights[l].data();
            const auto& g = grads.weights[l].data();
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * g[i];
            auto& b = model.biases[l];
            const auto& gb = grads.biases[l];
            for (std::size_t i = 0; i < b.size(); ++i) b[i] -= cfg.learning_rate * gb[i];
        }
        return;
    }
    ++state.t;
    const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        adam_update(model.weights[l].data(), grads.weights[l].data(),
                    state.mw[l].data(), state.vw[l].data(), cfg, bias1, bias2);
        adam_update(model.biases[l], grads.biases[l], state.mb[l], state.vb[l], cfg,
                    bias1, bias2);
    }
}

MlpModel init_model_impl(const MlpConfig& config, std::vector<double> class_weights,
                         Rng& rng) {
    config.validate();
    if (class_weights.size() != config.class_count())
        throw DimensionError("init_model: expected " +
                             std::to_string(config.class_count()) + " class weights, got " +
                             std::to_string(class_weights.size()));
    MlpModel model;
    model.config = config;
    model.class_weights = std::move(class_weights);
    const auto dims = config.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(dims[l]));
        Matrix w(dims[l], dims[l + 1]);
        for (double& v : w.data()) v = rng.next_uniform(-limit, limit);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(dims[l + 1], 0.0);
    }
    return model;
}

}  // namespace

void MlpConfig::validate() const {
    if (input_dim == 0) throw ConfigError("input_dim must be positive");
    if (output_dim == 0) throw ConfigError("output_dim must be positive");
    for (std::size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("hidden layer width must be positive");
    }
    if (output_activation == OutputActivation::Sigmoid && output_dim != 1)
        throw ConfigError("sigmoid head requires output_dim = 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw ConfigError("dropout_rate must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
}

std::vector<std::size_t> MlpConfig::layer_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(hidden_dims.size() + 2);
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(output_dim);
    return dims;
}

std::vector<double> class_weights(std::span<const std::size_t> counts) {
    const std::size_t k = counts.size();
    if (k == 0) throw TrainingError("class_weights: no classes");
    std::size_t total = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (counts[i] == 0)
            throw TrainingError("class_weights: class " + std::to_string(i) +
                                " has zero samples");
        total += counts[i];
    }
    std::vector<double> weights(k);
    for (std::size_t i = 0; i < k; ++i)
        weights[i] = static_cast<double>(total) /
                     (static_cast<double>(k) * static_cast<double>(counts[i]));
    return weights;
}

MlpModel init_model(const MlpConfig& config, std::vector<double> class_weights) {
    Rng rng(config.seed);
    return init_model_impl(config, std::move(class_weights), rng);
}

void forward_batch(const MlpModel& model, const Matrix& x, bool training, Rng* rng,
                   ForwardCache& cache) {
    forward_impl(model, x, training ? MaskMode::kDraw : MaskMode::kNone, rng, nullptr,
                 cache);
}

void forward_batch_with_masks(const MlpModel& model, const Matrix& x,
                              const std::vector<Matrix>& dropout_scale,
                              ForwardCache& cache) {
    forward_impl(model, x, MaskMode::kGiven, nullptr, &dropout_scale, cache);
}

std::vector<double> forward(const MlpModel& model, std::span<const double> x,
                            bool training, Rng* rng, ForwardCache* cache) {
    Matrix xm(1, x.size());
    std::copy(x.begin(), x.end(), xm.row(0).begin());
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    forward_batch(model, xm, training, rng, c);
    auto row = c.probs.row(0);
    return {row.begin(), row.end()};
}

double weighted_cross_entropy(std::span<const double> probs, int true_class,
                              std::span<const double> class_weights,
                              OutputActivation head) {
    auto clamp = [](double p) { return std::min(std::max(p, 1e-12), 1.0 - 1e-12); };
    if (head == OutputActivation::Sigmoid) {
        if (probs.size() != 1)
            throw DimensionError("weighted_cross_entropy: sigmoid head expects 1 output");
        if (true_class != 0 && true_class != 1)
            throw Error("weighted_cross_entropy: binary true class must be 0 or 1");
        if (class_weights.size() != 2)
            throw DimensionError("weighted_cross_entropy: binary head expects 2 weights");
        const double p = clamp(probs[0]);
        return true_class == 1 ? -class_weights[1] * std::log(p)
                               : -class_weights[0] * std::log(1.0 - p);
    }
    if (true_class < 0 || static_cast<std::size_t>(true_class) >= probs.size())
        throw Error("weighted_cross_entropy: true class " + std::to_string(true_class) +
                    " out of range");
    if (class_weights.size() != probs.size())
        throw DimensionError("weighted_cross_entropy: class weight count mismatch");
    return -class_weights[true_class] * std::log(clamp(probs[true_class]));
}

double batch_loss(const MlpModel& model, const ForwardCache& cache,
                  std::span<const int> true_classes) {
    if (cache.probs.rows() != true_classes.size())
        throw DimensionError("batch_loss: label count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < true_classes.size(); ++i)
        sum += weighted_cross_entropy(cache.probs.row(i), true_classes[i],
                                      model.class_weights,
                                      model.config.output_activation);
    return sum / static_cast<double>(true_classes.size());
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const int> true_classes) {
    const MlpConfig& cfg = model.config;
    const std::size_t batch = cache.probs.rows();
    if (batch == 0 || batch != true_classes.size())
        throw DimensionError("backward: label count mismatch");
    check_labels(true_classes, cfg.class_count(), "backward:");

    const std::size_t n_hidden = cfg.hidden_dims.size();
    const double inv_batch = 1.0 / static_cast<double>(batch);

    // dL/dz at the output, for the mean weighted loss over the batch
    Matrix g(batch, cfg.output_dim);
    for (std::size_t i = 0; i < batch; ++i) {
        const int y = true_classes[i];
        const double w = model.class_weights[y] * inv_batch;
        if (cfg.output_activation == OutputActivation::Sigmoid) {
            g(i, 0) = w * (cache.probs(i, 0) - static_cast<double>(y));
        } else {
            for (std::size_t j = 0; j < cfg.output_dim; ++j)
                g(i, j) = w * (cache.probs(i, j) -
                               (static_cast<std::size_t>(y) == j ? 1.0 : 0.0));
        }
    }

    Gradients grads;
    grads.weights.resize(n_hidden + 1);
    grads.biases.resize(n_hidden + 1);

    const Matrix& last_input = n_hidden ? consumed(cache, n_hidden - 1) : cache.input;
    mm_tn(last_input, g, grads.weights[n_hidden]);
    grads.biases[n_hidden] = column_sums(g);

    Matrix d_act;  // dL/d(activation consumed by the layer above)
    if (n_hidden) mm_nt(g, model.weights[n_hidden], d_act);

    for (std::size_t li = n_hidden; li-- > 0;) {
        Matrix dz = std::move(d_act);
        if (!cache.dropout_scale.empty()) {
            const auto& scale = cache.dropout_scale[li].data();
            for (std::size_t t = 0; t < dz.data().size(); ++t) dz.data()[t] *= scale[t];
        }
        const auto& h = cache.hidden[li].data();
        for (std::size_t t = 0; t < dz.data().size(); ++t) {
            if (h[t] <= 0.0) dz.data()[t] = 0.0;
        }
        const Matrix& below = li ? consumed(cache, li - 1) : cache.input;
        mm_tn(below, dz, grads.weights[li]);
        grads.biases[li] = column_sums(dz);
        if (li) mm_nt(dz, model.weights[li], d_act);
    }
    return grads;
}

std::pair<MlpModel, TrainReport> train(const MlpConfig& config, const Matrix& x_train,
                                       std::span<const int> y_train, const Matrix& x_val,
                                       std::span<const int> y_val,
                                       std::vector<double> class_weights) {
    config.validate();
    if (x_train.rows() == 0) throw TrainingError("train: empty training set");
    if (x_val.rows() == 0) throw TrainingError("train: empty validation set");
    if (x_train.rows() != y_train.size() || x_val.rows() != y_val.size())
        throw DimensionError("train: feature/label count mismatch");
    check_labels(y_train, config.class_count(), "train:");
    check_labels(y_val, config.class_count(), "train: validation");

    Rng rng(config.seed);
    MlpModel model = init_model_impl(config, std::move(class_weights), rng);
    OptimizerState opt(model);
    TrainReport report;

    const std::size_t n = x_train.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::vector<Matrix> best_weights = model.weights;
    std::vector<std::vector<double>> best_biases = model.biases;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_improvement = 0;

    ForwardCache cache;
    std::vector<std::size_t> batch_rows;
    std::vector<int> batch_labels;

    auto evaluate_split = [&](const Matrix& x, std::span<const int> y, double& loss,
                              double& acc) {
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < x.rows(); start += config.batch_size) {
            const std::size_t stop = std::min(x.rows(), start + config.batch_size);
            std::vector<std::size_t> rows(stop - start);
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = start + i;
            Matrix xb = x.select_rows(rows);
            forward_batch(model, xb, /*training=*/false, nullptr, cache);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const int y_i = y[start + i];
                loss_sum += weighted_cross_entropy(cache.probs.row(i), y_i,
                                                   model.class_weights,
                                                   config.output_activation);
                if (decide(cache.probs.row(i), config.output_activation) == y_i)
                    ++correct;
            }
        }
        loss = loss_sum / static_cast<double>(x.rows());
        acc = static_cast<double>(correct) / static_cast<double>(x.rows());
    };

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            batch_rows.assign(order.begin() + start, order.begin() + stop);
            batch_labels.resize(batch_rows.size());
            for (std::size_t i = 0; i < batch_rows.size(); ++i)
                batch_labels[i] = y_train[batch_rows[i]];
            Matrix xb = x_train.select_rows(batch_rows);

            forward_batch(model, xb, /*training=*/true, &rng, cache);
            const double loss = batch_loss(model, cache, batch_labels);
            if (!std::isfinite(loss))
                throw TrainingError("train: non-finite loss at epoch " +
                                    std::to_string(epoch + 1));
            loss_sum += loss * static_cast<double>(batch_rows.size());
            Gradients grads = backward(model, cache, batch_labels);
            apply_gradients(model, grads, opt);
        }
        report.train_loss.push_back(loss_sum / static_cast<double>(n));

        double val_loss = 0.0, val_acc = 0.0;
        evaluate_split(x_val, y_val, val_loss, val_acc);
        report.val_loss.push_back(val_loss);
        report.val_accuracy.push_back(val_acc);

        if (val_loss < best_val_loss) {
            best_val_loss = val_loss;
            best_weights = model.weights;
            best_biases = model.biases;
            report.best_epoch = epoch;
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
        }
        if (epochs_since_improvement >= config.patience) {
            if (epoch + 1 < config.max_epochs) report.stopped_early = true;
            break;
        }
    }

    model.weights = std::move(best_weights);
    model.biases = std::move(best_biases);
    return {std::move(model), std::move(report)};
}

std::vector<double> predict_proba(const MlpModel& model, std::span<const double> x) {
    return forward(model, x, /*training=*/false, nullptr);
}

int predict(const MlpModel& model, std::span<const double> x) {
    const auto probs = predict_proba(model, x);
    return decide(probs, model.config.output_activation);
}

std::vector<int> predict_batch(const MlpModel& model, const Matrix& x) {
    std::vector<int> out(x.rows());
    ForwardCache cache;
    constexpr std::size_t kChunk = 1024;
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < x.rows(); start += kChunk) {
        const std::size_t stop = std::min(x.rows(), start + kChunk);
        rows.resize(stop - start);
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = start + i;
        Matrix xb = x.select_rows(rows);
        forward_batch(model, xb, /*training=*/false, nullptr, cache);
        for (std::size_t i = 0; i < rows.size(); ++i)
            out[start + i] = decide(cache.probs.row(i), model.config.output_activation);
    }
    return out;
}

}  // namespace hharnet::nn
