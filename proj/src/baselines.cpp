#include "hharnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <thread>

#include "hharnet/error.hpp"
#include "hharnet/rng.hpp"

namespace hharnet::baselines {

namespace {

void check_labels(std::span<const int> y, std::size_t n_classes) {
    for (int v : y) {
        if (v < 0 || static_cast<std::size_t>(v) >= n_classes)
            throw Error("label " + std::to_string(v) + " out of range for " +
                        std::to_string(n_classes) + " classes");
    }
}

int majority_class(std::span<const std::size_t> counts) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = c;  // ties keep the lower class id
    }
    return static_cast<int>(best);
}

}  // namespace

int knn_predict(const KnnModel& model, std::span<const double> x) {
    const std::size_t n = model.train_x.rows();
    if (n == 0) throw Error("knn_predict: empty training set");
    if (model.k == 0 || model.k > n)
        throw ConfigError("knn_predict: k=" + std::to_string(model.k) +
                          " invalid for training size " + std::to_string(n));
    if (x.size() != model.train_x.cols())
        throw DimensionError("knn_predict: query has " + std::to_string(x.size()) +
                             " features, training data has " +
                             std::to_string(model.train_x.cols()));

    // Max-heap of the k best (distance, index) pairs; lexicographic order
    // makes the lower training index win distance ties.
    std::priority_queue<std::pair<double, std::size_t>> nearest;
    const std::size_t d = model.train_x.cols();
    const double* base = model.train_x.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = base + i * d;
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = row[j] - x[j];
            dist += delta * delta;
        }
        if (nearest.size() < model.k) {
            nearest.emplace(dist, i);
        } else if (std::pair<double, std::size_t>(dist, i) < nearest.top()) {
            nearest.pop();
            nearest.emplace(dist, i);
        }
    }

    std::vector<std::size_t> votes(model.n_classes, 0);
    while (!nearest.empty()) {
        ++votes[static_cast<std::size_t>(model.train_y[nearest.top().second])];
        nearest.pop();
    }
    return majority_class(votes);
}

std::vector<int> knn_predict_batch(const KnnModel& model, const Matrix& queries,
                                   std::size_t n_threads) {
    check_labels(model.train_y, model.n_classes);
    if (n_threads == 0)
        n_threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, std::max<std::size_t>(1, queries.rows()));

    std::vector<int> out(queries.rows());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = knn_predict(model, queries.row(i));
    };
    if (n_threads == 1) {
        worker(0, queries.rows());
        return out;
    }
    std::vector<std::thread> threads;
    const std::size_t chunk = (queries.rows() + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(queries.rows(), begin + chunk);
        if (begin >= end) break;
        threads.emplace_back(worker, begin, end);
    }
    for (auto& th : threads) th.join();
    return out;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                std::size_t max_depth, std::size_t mtry, Rng* rng)
        : x_(x), y_(y), n_classes_(n_classes), max_depth_(max_depth), mtry_(mtry),
          rng_(rng) {
        if (mtry_ < x_.cols() && rng_ == nullptr)
            throw ConfigError("tree: feature subsampling requires a seeded generator");
    }

    TreeModel build_from(std::vector<std::size_t> indices) {
        TreeModel model;
        model.n_classes = n_classes_;
        model.max_depth = max_depth_;
        nodes_.clear();
        grow(indices, 0);
        model.nodes = std::move(nodes_);
        return model;
    }

private:
    std::vector<std::size_t> class_counts(const std::vector<std::size_t>& indices) const {
        std::vector<std::size_t> counts(n_classes_, 0);
        for (std::size_t i : indices) ++counts[static_cast<std::size_t>(y_[i])];
        return counts;
    }

    int make_leaf(std::vector<std::size_t> counts) {
        TreeNode node;
        node.is_leaf = true;
        node.leaf_class = majority_class(counts);
        node.class_counts = std::move(counts);
        nodes_.push_back(std::move(node));
        return static_cast<int>(nodes_.size() - 1);
    }

    // Candidate features for this split, in evaluation order.
    std::vector<std::size_t> candidate_features() const {
        const std::size_t d = x_.cols();
        std::vector<std::size_t> pool(d);
        for (std::size_t j = 0; j < d; ++j) pool[j] = j;
        if (mtry_ >= d) return pool;  // full set, ascending order
        for (std::size_t i = 0; i < mtry_; ++i)
            std::swap(pool[i], pool[i + rng_->next_below(d - i)]);
        pool.resize(mtry_);
        return pool;
    }

    int grow(std::vector<std::size_t>& indices, std::size_t depth) {
        std::vector<std::size_t> counts = class_counts(indices);
        const std::size_t n = indices.size();
        const bool pure =
            std::count_if(counts.begin(), counts.end(),
                          [](std::size_t c) { return c > 0; }) <= 1;
        if (pure || n < 2 || depth >= max_depth_) return make_leaf(std::move(counts));

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = std::numeric_limits<double>::infinity();

        std::vector<std::pair<double, int>> values;
        values.reserve(n);
        std::vector<std::size_t> left_counts(n_classes_);
        for (std::size_t f : candidate_features()) {
            values.clear();
            for (std::size_t i : indices)
                values.emplace_back(x_(i, static_cast<std::size_t>(f)), y_[i]);
            std::sort(values.begin(), values.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::fill(left_counts.begin(), left_counts.end(), 0);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ++left_counts[static_cast<std::size_t>(values[i].second)];
                if (!(values[i].first < values[i + 1].first)) continue;
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(n - i - 1);
                // weighted Gini: nl*(1 - sum (cl/nl)^2) + nr*(...)
                double sql = 0.0, sqr = 0.0;
                for (std::size_t c = 0; c < n_classes_; ++c) {
                    const auto cl = static_cast<double>(left_counts[c]);
                    const auto cr = static_cast<double>(counts[c] - left_counts[c]);
                    sql += cl * cl;
                    sqr += cr * cr;
                }
                const double impurity = (nl - sql / nl) + (nr - sqr / nr);
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(f);
                    double mid = (values[i].first + values[i + 1].first) / 2.0;
                    if (!(mid < values[i + 1].first)) mid = values[i].first;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) return make_leaf(std::move(counts));  // all values equal

        std::vector<std::size_t> left, right;
        for (std::size_t i : indices) {
            if (x_(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        indices.clear();
        indices.shrink_to_fit();

        const auto node_index = static_cast<int>(nodes_.size());
        TreeNode node;
        node.is_leaf = false;
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.leaf_class = majority_class(counts);
        node.class_counts = std::move(counts);
        nodes_.push_back(std::move(node));

        nodes_[node_index].left = grow(left, depth + 1);
        nodes_[node_index].right = grow(right, depth + 1);
        return node_index;
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    std::size_t n_classes_;
    std::size_t max_depth_;
    std::size_t mtry_;
    Rng* rng_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

TreeModel tree_fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                   std::size_t max_depth) {
    if (x.rows() == 0) throw Error("tree_fit: empty training set");
    if (x.rows() != y.size()) throw DimensionError("tree_fit: feature/label mismatch");
    check_labels(y, n_classes);
    std::vector<std::size_t> indices(x.rows());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    TreeBuilder builder(x, y, n_classes, max_depth, x.cols(), nullptr);
    return builder.build_from(std::move(indices));
}

int tree_predict(const TreeModel& model, std::span<const double> x) {
    if (model.nodes.empty()) throw Error("tree_predict: untrained model");
    const TreeNode* node = &model.nodes[0];
    while (!node->is_leaf) {
        if (static_cast<std::size_t>(node->feature) >= x.size())
            throw DimensionError("tree_predict: query too short for split feature " +
                                 std::to_string(node->feature));
        node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
                   ? &model.nodes[static_cast<std::size_t>(node->left)]
                   : &model.nodes[static_cast<std::size_t>(node->right)];
    }
    return node->leaf_class;
}

ForestModel forest_fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                       const ForestConfig& config) {
    if (x.rows() == 0) throw Error("forest_fit: empty training set");
    if (x.rows() != y.size()) throw DimensionError("forest_fit: feature/label mismatch");
    if (config.n_trees == 0) throw ConfigError("forest_fit: need at least 1 tree");
    check_labels(y, n_classes);

    const std::size_t mtry =
        config.mtry ? config.mtry
                    : static_cast<std::size_t>(
                          std::ceil(std::sqrt(static_cast<double>(x.cols()))));

    ForestModel model;
    model.config = config;
    model.config.mtry = mtry;
    model.n_classes = n_classes;
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        Rng rng(derive_seed(config.seed, t));
        std::vector<std::size_t> indices(x.rows());
        if (config.bootstrap) {
            for (auto& i : indices) i = rng.next_below(x.rows());
        } else {
            for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        }
        TreeBuilder builder(x, y, n_classes, config.max_depth, mtry, &rng);
        model.trees.push_back(builder.build_from(std::move(indices)));
    }
    return model;
}

int forest_predict(const ForestModel& model, std::span<const double> x) {
    if (model.trees.empty()) throw Error("forest_predict: untrained model");
    std::vector<std::size_t> votes(model.n_classes, 0);
    for (const TreeModel& tree : model.trees)
        ++votes[static_cast<std::size_t>(tree_predict(tree, x))];
    return majority_class(votes);
}

std::vector<int> tree_predict_batch(const TreeModel& model, const Matrix& queries) {
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i)
        out[i] = tree_predict(model, queries.row(i));
    return out;
}

std::vector<int> forest_predict_batch(const ForestModel& model, const Matrix& queries) {
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i)
        out[i] = forest_predict(model, queries.row(i));
    return out;
}

}  // namespace hharnet::baselines
