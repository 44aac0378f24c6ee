#pragma once

#include <span>
#include <string>
#include <vector>

#include "hharnet/ingest.hpp"
#include "hharnet/labels.hpp"
#include "hharnet/nn.hpp"

namespace hharnet::hierarchy {

using ingest::Dataset;
using ingest::Preprocessor;

/// Feature matrix plus node-local labels for one classifier of the tree.
struct NodeData {
    Matrix x;
    std::vector<int> y;
};

struct NodeDatasets {
    NodeData root;                   // labels are parent ids (0 / 1)
    std::vector<NodeData> children;  // labels are within-parent leaf indices
};

/// Routes the training set to the tree nodes: the root sees every sample with
/// its parent label; each child sees only the samples of its true parent,
/// relabeled to within-parent indices. Throws TrainingError naming a parent
/// with zero samples.
NodeDatasets build_node_datasets(const Dataset& data, const HierarchySpec& spec);

/// One MlpConfig per tree node. Dimensions and head types are overwritten to
/// fit the hierarchy before training (root: 1 sigmoid unit; child p: softmax
/// over that parent's leaves).
struct LcpnConfigs {
    nn::MlpConfig root;
    std::vector<nn::MlpConfig> children;
};

/// The local-classifier-per-parent-node stack: a binary root plus one
/// multi-class model per parent, trained independently.
struct LcpnModel {
    nn::MlpModel root;
    std::vector<nn::MlpModel> children;
    HierarchySpec hierarchy;
    Preprocessor preprocessor;

    bool operator==(const LcpnModel&) const = default;
};

/// A single softmax model over all six leaves, with the same architecture and
/// preprocessing as the hierarchical stack.
struct FlatModel {
    nn::MlpModel mlp;
    std::vector<std::string> class_names;
    Preprocessor preprocessor;

    bool operator==(const FlatModel&) const = default;
};

/// Trains the root and each child independently, each with inverse-frequency
/// class weights computed on its own node dataset. Validation samples are
/// routed by their true parent, same as training. Reports (root first, then
/// children) are appended to `reports` when given.
LcpnModel train_lcpn(const Dataset& train, const Dataset& val, const HierarchySpec& spec,
                     const LcpnConfigs& configs, const Preprocessor& preprocessor,
                     std::vector<nn::TrainReport>* reports = nullptr);

/// Top-down prediction: the root picks the parent (sigmoid >= 0.5 means
/// parent 1), then only that parent's child runs; its argmax maps back to the
/// global leaf id. `x` must already be preprocessed.
int predict_topdown(const LcpnModel& model, std::span<const double> x);
std::vector<int> predict_topdown_batch(const LcpnModel& model, const Matrix& x);

/// The parent the root alone would choose.
int predict_root(const LcpnModel& model, std::span<const double> x);
std::vector<int> predict_root_batch(const LcpnModel& model, const Matrix& x);

FlatModel train_flat(const Dataset& train, const Dataset& val,
                     const nn::MlpConfig& config, const Preprocessor& preprocessor,
                     const std::vector<std::string>& class_names,
                     nn::TrainReport* report = nullptr);

int predict_flat(const FlatModel& model, std::span<const double> x);
std::vector<int> predict_flat_batch(const FlatModel& model, const Matrix& x);

}  // namespace hharnet::hierarchy
