#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hharnet/matrix.hpp"

namespace hharnet::baselines {

/// Brute-force k-nearest-neighbors over Euclidean distance. The model is the
/// training data itself.
struct KnnModel {
    Matrix train_x;
    std::vector<int> train_y;
    std::size_t n_classes = 6;
    std::size_t k = 10;
};

/// Majority vote among the k nearest. Distance ties break toward the lower
/// training index, vote ties toward the lower class id.
int knn_predict(const KnnModel& model, std::span<const double> x);

/// knn_predict over every query row; queries are independent, so the scan is
/// parallelized across `n_threads` (0 = hardware concurrency).
std::vector<int> knn_predict_batch(const KnnModel& model, const Matrix& queries,
                                   std::size_t n_threads = 0);

/// Axis-aligned binary decision tree with Gini splits. Nodes are stored in a
/// flat vector; children referenced by index.
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;  // value <= threshold goes left
    int left = -1;
    int right = -1;
    int leaf_class = 0;
    std::vector<std::size_t> class_counts;

    bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t n_classes = 0;
    std::size_t max_depth = 0;

    bool operator==(const TreeModel&) const = default;
};

/// Greedy Gini-impurity fitting. Candidate thresholds are midpoints between
/// consecutive distinct feature values; growth stops at max_depth, on a pure
/// node, or below 2 samples.
TreeModel tree_fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                   std::size_t max_depth);

int tree_predict(const TreeModel& model, std::span<const double> x);

struct ForestConfig {
    std::size_t n_trees = 10;
    std::size_t max_depth = 10;
    bool bootstrap = true;  // false: every tree sees the training set as-is
    std::size_t mtry = 0;   // candidate features per split; 0 = ceil(sqrt(d))
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    ForestConfig config;
    std::size_t n_classes = 0;
};

/// Each tree fits a seeded bootstrap resample with per-split feature
/// subsampling. Per-tree seeds derive from config.seed and the tree index, so
/// the result does not depend on scheduling.
ForestModel forest_fit(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                       const ForestConfig& config);

/// Majority vote over the trees, ties toward the lower class id.
int forest_predict(const ForestModel& model, std::span<const double> x);

std::vector<int> tree_predict_batch(const TreeModel& model, const Matrix& queries);
std::vector<int> forest_predict_batch(const ForestModel& model, const Matrix& queries);

}  // namespace hharnet::baselines
