#include <doctest.h>

#include <cmath>

#include "hharnet/nn.hpp"
#include "oracles.hpp"

using namespace hharnet;
using namespace hharnet::nn;

namespace {

MlpConfig small_config(std::vector<std::size_t> hidden, std::size_t in, std::size_t out,
                       OutputActivation head = OutputActivation::Softmax) {
    MlpConfig c;
    c.input_dim = in;
    c.hidden_dims = std::move(hidden);
    c.output_dim = out;
    c.output_activation = head;
    c.dropout_rate = 0.0;
    return c;
}

MlpModel zeroed_model(const MlpConfig& config, std::vector<double> weights) {
    MlpModel model = init_model(config, std::move(weights));
    for (auto& w : model.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    for (auto& b : model.biases) std::fill(b.begin(), b.end(), 0.0);
    return model;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.next_uniform(lo, hi);
    return m;
}

}  // namespace

TEST_CASE("inverse-frequency class weights") {
    const std::size_t counts1[] = {100, 300, 600};
    const auto w1 = class_weights(counts1);
    CHECK(w1[0] == doctest::Approx(3.333).epsilon(1e-3));
    CHECK(w1[1] == doctest::Approx(1.111).epsilon(1e-3));
    CHECK(w1[2] == doctest::Approx(0.556).epsilon(2e-3));

    const std::size_t counts2[] = {50, 50};
    CHECK(class_weights(counts2) == std::vector<double>{1.0, 1.0});

    const std::size_t counts3[] = {1, 999};
    const auto w3 = class_weights(counts3);
    CHECK(w3[0] == doctest::Approx(500.0).epsilon(1e-3));
    CHECK(w3[1] == doctest::Approx(0.5005).epsilon(1e-3));

    // root-node weights for a 9000/1000 parent imbalance
    const std::size_t root_counts[] = {9000, 1000};
    const auto wr = class_weights(root_counts);
    CHECK(wr[0] == doctest::Approx(0.556).epsilon(1e-3));
    CHECK(wr[1] == doctest::Approx(5.0).epsilon(1e-3));

    const std::size_t zero[] = {10, 0};
    CHECK_THROWS_WITH_AS((void)class_weights(zero), doctest::Contains("class 1"),
                         TrainingError);
}

TEST_CASE("forward pass heads") {
    // all-zero parameters, softmax over 6: uniform outputs
    const auto softmax6 = zeroed_model(small_config({4}, 3, 6),
                                       std::vector<double>(6, 1.0));
    const std::vector<double> x = {0.3, -0.7, 2.0};
    const auto probs = predict_proba(softmax6, x);
    REQUIRE(probs.size() == 6);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    // all-zero parameters, sigmoid head: 0.5
    const auto sigmoid1 = zeroed_model(
        small_config({4}, 3, 1, OutputActivation::Sigmoid), {1.0, 1.0});
    CHECK(predict_proba(sigmoid1, x)[0] == 0.5);

    // uniform probabilities: argmax tie-break toward class 0
    CHECK(predict(softmax6, x) == 0);
    // sigmoid exactly 0.5: threshold is >= 0.5, so class 1
    CHECK(predict(sigmoid1, x) == 1);

    CHECK_THROWS_AS((void)predict(softmax6, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("softmax outputs sum to one for random models") {
    Rng rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        const auto config = small_config({5, 4}, 6, 3);
        auto model = init_model(config, std::vector<double>(3, 1.0));
        const Matrix x = random_matrix(4, 6, rng, -3.0, 3.0);
        ForwardCache cache;
        forward_batch(model, x, false, nullptr, cache);
        for (std::size_t i = 0; i < cache.probs.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                sum += cache.probs(i, j);
                CHECK(cache.probs(i, j) > 0.0);
                CHECK(cache.probs(i, j) < 1.0);
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("argmax prediction") {
    auto model = zeroed_model(small_config({}, 1, 3), std::vector<double>(3, 1.0));
    // bias picks the winner directly on a zero-weight single-layer model
    model.biases[0] = {std::log(0.1), std::log(0.7), std::log(0.2)};
    const std::vector<double> x = {0.0};
    const auto probs = predict_proba(model, x);
    CHECK(probs[1] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(predict(model, x) == 1);
}

TEST_CASE("dropout") {
    SUBCASE("rate 0: training forward equals inference forward") {
        auto config = small_config({8, 8}, 5, 4);
        const auto model = init_model(config, std::vector<double>(4, 1.0));
        Rng rng(5);
        const Matrix x = random_matrix(3, 5, rng);
        ForwardCache train_cache, eval_cache;
        Rng fwd_rng(1);
        forward_batch(model, x, true, &fwd_rng, train_cache);
        forward_batch(model, x, false, nullptr, eval_cache);
        CHECK(train_cache.probs == eval_cache.probs);
    }

    SUBCASE("masks are inverted-dropout scales and are applied") {
        auto config = small_config({16}, 5, 3);
        config.dropout_rate = 0.4;
        const auto model = init_model(config, std::vector<double>(3, 1.0));
        Rng rng(5);
        const Matrix x = random_matrix(2, 5, rng);
        ForwardCache cache;
        Rng fwd_rng(1);
        forward_batch(model, x, true, &fwd_rng, cache);
        REQUIRE(cache.dropout_scale.size() == 1);
        const double keep = 1.0 / (1.0 - 0.4);
        bool saw_dropped = false, saw_kept = false;
        for (std::size_t t = 0; t < cache.dropout_scale[0].data().size(); ++t) {
            const double scale = cache.dropout_scale[0].data()[t];
            const bool dropped = scale == 0.0;
            CHECK((dropped || scale == keep));
            (dropped ? saw_dropped : saw_kept) = true;
            CHECK(cache.hidden_after_drop[0].data()[t] ==
                  cache.hidden[0].data()[t] * scale);
        }
        CHECK(saw_dropped);
        CHECK(saw_kept);
        CHECK_THROWS_AS(forward_batch(model, x, true, nullptr, cache), Error);
    }
}

TEST_CASE("weighted cross entropy") {
    const std::vector<double> w1 = {1.0, 1.0};
    // perfect prediction: loss vanishes (up to the 1e-12 clamp)
    CHECK(weighted_cross_entropy(std::vector<double>{1.0, 0.0}, 0, w1,
                                 OutputActivation::Softmax) <= 1e-9);

    const double inv_e = std::exp(-1.0);
    CHECK(weighted_cross_entropy(std::vector<double>{inv_e, 1.0 - inv_e}, 0, w1,
                                 OutputActivation::Softmax) ==
          doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> w2 = {2.0, 1.0};
    CHECK(weighted_cross_entropy(std::vector<double>{inv_e, 1.0 - inv_e}, 0, w2,
                                 OutputActivation::Softmax) ==
          doctest::Approx(2.0).epsilon(1e-12));

    // binary sigmoid head
    CHECK(weighted_cross_entropy(std::vector<double>{inv_e}, 1, w1,
                                 OutputActivation::Sigmoid) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(weighted_cross_entropy(std::vector<double>{1.0 - inv_e}, 0, w1,
                                 OutputActivation::Sigmoid) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // with unit weights the loss is plain cross entropy, exactly
    const std::vector<double> probs = {0.25, 0.35, 0.40};
    const std::vector<double> unit = {1.0, 1.0, 1.0};
    CHECK(weighted_cross_entropy(probs, 2, unit, OutputActivation::Softmax) ==
          -std::log(0.40));

    CHECK_THROWS_AS(weighted_cross_entropy(probs, 7, unit, OutputActivation::Softmax),
                    Error);
}

TEST_CASE("logistic-regression gradient has the closed form") {
    // no hidden layers, x = [1], two classes, zero weights
    auto model = zeroed_model(small_config({}, 1, 2), {2.0, 1.0});
    Matrix x(1, 1);
    x(0, 0) = 1.0;
    ForwardCache cache;
    forward_batch(model, x, true, nullptr, cache);
    CHECK(cache.probs(0, 0) == 0.5);
    const std::vector<int> y = {0};
    const auto grads = backward(model, cache, y);
    // dW = w_0 * x * (p - onehot) = 2 * [0.5 - 1, 0.5] = [-1, 1]
    CHECK(grads.weights[0](0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(grads.weights[0](0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grads.biases[0][0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(grads.biases[0][1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(17);
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const bool sigmoid = trial % 3 == 2;
        std::vector<std::size_t> hidden;
        const std::size_t n_hidden = rng.next_below(3);  // 0..2 hidden layers
        const std::size_t dims_pool[] = {5, 7, 4, 3};
        for (std::size_t l = 0; l < n_hidden; ++l)
            hidden.push_back(dims_pool[rng.next_below(4)]);
        const std::size_t in = 2 + rng.next_below(4);
        const std::size_t out = sigmoid ? 1 : 2 + rng.next_below(4);

        auto config = small_config(hidden, in, out,
                                   sigmoid ? OutputActivation::Sigmoid
                                           : OutputActivation::Softmax);
        config.seed = rng.next_u64();
        const std::size_t classes = config.class_count();
        std::vector<double> weights(classes);
        for (double& w : weights) w = rng.next_uniform(0.25, 4.0);
        auto model = init_model(config, weights);
        // jitter the zero-initialized biases so no ReLU pre-activation sits
        // exactly on the kink, where central differences straddle the corner
        for (auto& bias : model.biases) {
            for (double& b : bias) b = rng.next_uniform(-0.3, 0.3);
        }

        const std::size_t batch = 1 + rng.next_below(3);
        const Matrix x = random_matrix(batch, in, rng, -2.0, 2.0);
        std::vector<int> y(batch);
        for (auto& label : y) label = static_cast<int>(rng.next_below(classes));

        // half the trials exercise the dropout path through fixed masks
        std::vector<Matrix> masks;
        if (trial % 2 == 1 && !hidden.empty()) {
            const double rate = 0.3;
            for (std::size_t l = 0; l < hidden.size(); ++l) {
                Matrix mask(batch, hidden[l]);
                for (double& v : mask.data())
                    v = rng.next_double() < rate ? 0.0 : 1.0 / (1.0 - rate);
                masks.push_back(std::move(mask));
            }
        }

        const auto result = oracle::finite_difference_check(model, x, masks, y);
        CHECK(result.max_rel_error < 1e-4);
        ++checked;
    }
    CHECK(checked == 12);
}

TEST_CASE("dropout mask zeroing a unit kills every gradient through it") {
    auto config = small_config({6}, 4, 3);
    config.dropout_rate = 0.5;
    auto model = init_model(config, std::vector<double>(3, 1.0));
    Rng rng(3);
    const Matrix x = random_matrix(1, 4, rng);

    std::vector<Matrix> masks;
    Matrix mask(1, 6, 2.0);  // keep scale 1/(1-0.5)
    mask(0, 2) = 0.0;        // drop hidden unit 2
    masks.push_back(mask);

    ForwardCache cache;
    forward_batch_with_masks(model, x, masks, cache);
    const std::vector<int> y = {1};
    const auto grads = backward(model, cache, y);
    for (std::size_t i = 0; i < 4; ++i) CHECK(grads.weights[0](i, 2) == 0.0);
    CHECK(grads.biases[0][2] == 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(grads.weights[1](2, j) == 0.0);
}

namespace {

struct Blobs {
    Matrix x_train, x_val;
    std::vector<int> y_train, y_val;
};

// two Gaussian blobs, 200 points, split 150/50
Blobs two_blobs() {
    Rng rng(123);
    auto normal = [&]() {
        const double u1 = 1.0 - rng.next_double();
        const double u2 = rng.next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    };
    Blobs blobs;
    blobs.x_train = Matrix(150, 2);
    blobs.x_val = Matrix(50, 2);
    std::size_t train_row = 0, val_row = 0;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2;
        const double cx = label == 0 ? -2.0 : 2.0;
        const double cy = label == 0 ? -1.0 : 1.5;
        const double px = cx + 0.5 * normal();
        const double py = cy + 0.5 * normal();
        if (i < 150) {
            blobs.x_train(train_row, 0) = px;
            blobs.x_train(train_row, 1) = py;
            blobs.y_train.push_back(label);
            ++train_row;
        } else {
            blobs.x_val(val_row, 0) = px;
            blobs.x_val(val_row, 1) = py;
            blobs.y_val.push_back(label);
            ++val_row;
        }
    }
    return blobs;
}

}  // namespace

TEST_CASE("training separates two Gaussian blobs") {
    const Blobs blobs = two_blobs();
    // the blobs really are separable: nearest-centroid must already clear 98%
    const double centroid_acc = oracle::nearest_centroid_accuracy(
        blobs.x_train, blobs.y_train, blobs.x_val, blobs.y_val, 2);
    REQUIRE(centroid_acc >= 0.98);

    MlpConfig config = small_config({8}, 2, 2);
    config.dropout_rate = 0.1;
    config.batch_size = 32;
    config.max_epochs = 30;
    config.patience = 5;
    config.seed = 7;
    const auto [model, report] = train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                                       blobs.y_val, {1.0, 1.0});
    CHECK(report.val_accuracy[report.best_epoch] >= 0.98);
    CHECK(report.val_loss[report.best_epoch] ==
          *std::min_element(report.val_loss.begin(), report.val_loss.end()));
}

TEST_CASE("training is bit-deterministic given the seed") {
    const Blobs blobs = two_blobs();
    MlpConfig config = small_config({6}, 2, 2);
    config.dropout_rate = 0.2;
    config.batch_size = 16;
    config.max_epochs = 4;
    config.seed = 99;
    const auto [a, ra] = train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                               blobs.y_val, {1.0, 1.0});
    const auto [b, rb] = train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                               blobs.y_val, {1.0, 1.0});
    CHECK(a == b);
    CHECK(ra.train_loss == rb.train_loss);
    CHECK(ra.val_loss == rb.val_loss);
}

TEST_CASE("patience zero runs exactly one epoch") {
    const Blobs blobs = two_blobs();
    MlpConfig config = small_config({4}, 2, 2);
    config.max_epochs = 20;
    config.patience = 0;
    const auto [model, report] = train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                                       blobs.y_val, {1.0, 1.0});
    CHECK(report.train_loss.size() == 1);
    CHECK(report.stopped_early);
}

TEST_CASE("divergence raises a training error naming the epoch") {
    const Blobs blobs = two_blobs();
    MlpConfig config = small_config({8}, 2, 2);
    config.optimizer = Optimizer::Sgd;
    config.learning_rate = 1e200;
    config.max_epochs = 10;
    CHECK_THROWS_WITH_AS((void)train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                                     blobs.y_val, {1.0, 1.0}),
                         doctest::Contains("non-finite"), TrainingError);
}

TEST_CASE("train validates inputs") {
    const Blobs blobs = two_blobs();
    MlpConfig config = small_config({4}, 2, 2);
    CHECK_THROWS_AS((void)train(config, Matrix(0, 2), std::vector<int>{}, blobs.x_val,
                                blobs.y_val, {1.0, 1.0}),
                    TrainingError);
    auto bad_labels = blobs.y_train;
    bad_labels[3] = 9;
    CHECK_THROWS_AS((void)train(config, blobs.x_train, bad_labels, blobs.x_val,
                                blobs.y_val, {1.0, 1.0}),
                    TrainingError);
    CHECK_THROWS_AS((void)train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                                blobs.y_val, {1.0, 1.0, 1.0}),
                    DimensionError);

    MlpConfig bad = config;
    bad.dropout_rate = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = config;
    bad.output_activation = OutputActivation::Sigmoid;
    bad.output_dim = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("inference does not mutate the model") {
    const Blobs blobs = two_blobs();
    MlpConfig config = small_config({5}, 2, 2);
    config.max_epochs = 2;
    const auto [model, report] = train(config, blobs.x_train, blobs.y_train, blobs.x_val,
                                       blobs.y_val, {1.0, 1.0});
    const MlpModel snapshot = model;
    (void)predict_batch(model, blobs.x_val);
    (void)predict_proba(model, blobs.x_val.row(0));
    CHECK(model == snapshot);
}
