#include "hharnet/hierarchy.hpp"

#include <algorithm>

#include "hharnet/error.hpp"

namespace hharnet::hierarchy {

NodeDatasets build_node_datasets(const Dataset& data, const HierarchySpec& spec) {
    if (data.parent_labels.size() != data.size())
        throw TrainingError("build_node_datasets: parent labels not derived");

    NodeDatasets out;
    out.root.x = data.x;
    out.root.y = data.parent_labels;

    const std::size_t n_parents = spec.parent_count();
    std::vector<std::vector<std::size_t>> rows_per_parent(n_parents);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int p = data.parent_labels[i];
        if (p < 0 || static_cast<std::size_t>(p) >= n_parents)
            throw TrainingError("build_node_datasets: parent label out of range");
        rows_per_parent[p].push_back(i);
    }

    out.children.resize(n_parents);
    for (std::size_t p = 0; p < n_parents; ++p) {
        if (rows_per_parent[p].empty())
            throw TrainingError("build_node_datasets: parent '" + spec.parents[p].name +
                                "' has zero samples");
        NodeData& node = out.children[p];
        node.x = data.x.select_rows(rows_per_parent[p]);
        node.y.reserve(rows_per_parent[p].size());
        const auto& leaves = spec.parents[p].leaves;
        for (std::size_t i : rows_per_parent[p]) {
            const int leaf = data.leaf_labels[i];
            auto it = std::find(leaves.begin(), leaves.end(), leaf);
            if (it == leaves.end())
                throw TrainingError("build_node_datasets: leaf " + std::to_string(leaf) +
                                    " not under parent '" + spec.parents[p].name + "'");
            node.y.push_back(static_cast<int>(it - leaves.begin()));
        }
    }
    return out;
}

namespace {

std::vector<std::size_t> count_classes(std::span<const int> y, std::size_t k) {
    std::vector<std::size_t> counts(k, 0);
    for (int v : y) ++counts[static_cast<std::size_t>(v)];
    return counts;
}

nn::MlpConfig shape_root_config(nn::MlpConfig config, std::size_t input_dim) {
    config.input_dim = input_dim;
    config.output_dim = 1;
    config.output_activation = nn::OutputActivation::Sigmoid;
    return config;
}

nn::MlpConfig shape_child_config(nn::MlpConfig config, std::size_t input_dim,
                                 std::size_t leaves) {
    config.input_dim = input_dim;
    config.output_dim = leaves;
    config.output_activation = nn::OutputActivation::Softmax;
    return config;
}

}  // namespace

LcpnModel train_lcpn(const Dataset& train, const Dataset& val, const HierarchySpec& spec,
                     const LcpnConfigs& configs, const Preprocessor& preprocessor,
                     std::vector<nn::TrainReport>* reports) {
    if (configs.children.size() != spec.parent_count())
        throw ConfigError("train_lcpn: expected one child config per parent");

    const NodeDatasets train_nodes = build_node_datasets(train, spec);
    const NodeDatasets val_nodes = build_node_datasets(val, spec);
    const std::size_t d = train.x.cols();

    LcpnModel model;
    model.hierarchy = spec;
    model.preprocessor = preprocessor;

    {
        const auto config = shape_root_config(configs.root, d);
        auto weights = nn::class_weights(count_classes(train_nodes.root.y, 2));
        try {
            auto [m, report] = nn::train(config, train_nodes.root.x, train_nodes.root.y,
                                         val_nodes.root.x, val_nodes.root.y,
                                         std::move(weights));
            model.root = std::move(m);
            if (reports) reports->push_back(std::move(report));
        } catch (const Error& e) {
            throw TrainingError("node '" + spec.root_name + "': " + e.what());
        }
    }

    for (std::size_t p = 0; p < spec.parent_count(); ++p) {
        const std::size_t leaves = spec.parents[p].leaves.size();
        const auto config = shape_child_config(configs.children[p], d, leaves);
        auto weights = nn::class_weights(count_classes(train_nodes.children[p].y, leaves));
        try {
            auto [m, report] =
                nn::train(config, train_nodes.children[p].x, train_nodes.children[p].y,
                          val_nodes.children[p].x, val_nodes.children[p].y,
                          std::move(weights));
            model.children.push_back(std::move(m));
            if (reports) reports->push_back(std::move(report));
        } catch (const Error& e) {
            throw TrainingError("node '" + spec.parents[p].name + "': " + e.what());
        }
    }
    return model;
}

int predict_root(const LcpnModel& model, std::span<const double> x) {
    return nn::predict(model.root, x);
}

std::vector<int> predict_root_batch(const LcpnModel& model, const Matrix& x) {
    return nn::predict_batch(model.root, x);
}

int predict_topdown(const LcpnModel& model, std::span<const double> x) {
    const int parent = nn::predict(model.root, x);
    const int within = nn::predict(model.children[parent], x);
    return model.hierarchy.global_leaf(parent, within);
}

std::vector<int> predict_topdown_batch(const LcpnModel& model, const Matrix& x) {
    // Route once, then run each child on only its own samples.
    const std::vector<int> parents = nn::predict_batch(model.root, x);
    std::vector<int> out(x.rows());
    for (std::size_t p = 0; p < model.hierarchy.parent_count(); ++p) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < parents.size(); ++i) {
            if (parents[i] == static_cast<int>(p)) rows.push_back(i);
        }
        if (rows.empty()) continue;
        const Matrix xp = x.select_rows(rows);
        const std::vector<int> within = nn::predict_batch(model.children[p], xp);
        for (std::size_t i = 0; i < rows.size(); ++i)
            out[rows[i]] = model.hierarchy.global_leaf(static_cast<int>(p), within[i]);
    }
    return out;
}

FlatModel train_flat(const Dataset& train, const Dataset& val,
                     const nn::MlpConfig& config, const Preprocessor& preprocessor,
                     const std::vector<std::string>& class_names,
                     nn::TrainReport* report) {
    nn::MlpConfig shaped = config;
    shaped.input_dim = train.x.cols();
    shaped.output_activation = nn::OutputActivation::Softmax;
    shaped.output_dim = class_names.size();

    auto weights =
        nn::class_weights(count_classes(train.leaf_labels, shaped.output_dim));
    auto [m, r] = nn::train(shaped, train.x, train.leaf_labels, val.x, val.leaf_labels,
                            std::move(weights));
    if (report) *report = std::move(r);

    FlatModel model;
    model.mlp = std::move(m);
    model.class_names = class_names;
    model.preprocessor = preprocessor;
    return model;
}

int predict_flat(const FlatModel& model, std::span<const double> x) {
    return nn::predict(model.mlp, x);
}

std::vector<int> predict_flat_batch(const FlatModel& model, const Matrix& x) {
    return nn::predict_batch(model.mlp, x);
}

}  // namespace hharnet::hierarchy
