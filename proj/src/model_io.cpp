#include "hharnet/model_io.hpp"

#include <filesystem>
#include <sstream>

#include "hharnet/error.hpp"

namespace hharnet::io {

namespace {

std::string join_sizes(const std::vector<std::size_t>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << values[i];
    }
    return os.str();
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) throw ParseError("empty entry in size list '" + text + "'");
        out.push_back(std::stoull(item));
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << values[i];
    }
    return os.str();
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stoi(item));
    return out;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].find('|') != std::string::npos)
            throw ConfigError("name '" + names[i] + "' may not contain '|'");
        if (i) out += '|';
        out += names[i];
    }
    return out;
}

std::vector<std::string> parse_names(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t bar = text.find('|', start);
        if (bar == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, bar - start));
        start = bar + 1;
    }
    return out;
}

std::vector<std::int64_t> to_i64(const std::vector<int>& v) {
    return {v.begin(), v.end()};
}

std::vector<int> to_int(const std::vector<std::int64_t>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

std::string kind_of(const KvDocument& doc) {
    if (!doc.has("kind")) throw SchemaError("document has no 'kind' key");
    return doc.get_string("kind");
}

void mlp_to_kv(const nn::MlpModel& model, KvDocument& doc, const std::string& prefix) {
    const nn::MlpConfig& c = model.config;
    doc.set_u64(prefix + "input_dim", c.input_dim);
    doc.set_string(prefix + "hidden_dims", join_sizes(c.hidden_dims));
    doc.set_u64(prefix + "output_dim", c.output_dim);
    doc.set_string(prefix + "output_activation",
                   c.output_activation == nn::OutputActivation::Softmax ? "softmax"
                                                                        : "sigmoid");
    doc.set_f64(prefix + "dropout_rate", c.dropout_rate);
    doc.set_string(prefix + "optimizer",
                   c.optimizer == nn::Optimizer::Adam ? "adam" : "sgd");
    doc.set_f64(prefix + "learning_rate", c.learning_rate);
    doc.set_f64(prefix + "adam_beta1", c.adam_beta1);
    doc.set_f64(prefix + "adam_beta2", c.adam_beta2);
    doc.set_f64(prefix + "adam_epsilon", c.adam_epsilon);
    doc.set_u64(prefix + "batch_size", c.batch_size);
    doc.set_u64(prefix + "max_epochs", c.max_epochs);
    doc.set_u64(prefix + "patience", c.patience);
    doc.set_u64(prefix + "seed", c.seed);
    doc.set_f64_array(prefix + "class_weights", model.class_weights);
    doc.set_u64(prefix + "layers", model.weights.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const std::string lp = prefix + "layer" + std::to_string(l) + ".";
        doc.set_u64(lp + "rows", model.weights[l].rows());
        doc.set_u64(lp + "cols", model.weights[l].cols());
        doc.set_f64_array(lp + "weights", model.weights[l].data());
        doc.set_f64_array(lp + "bias", model.biases[l]);
    }
}

nn::MlpModel mlp_from_kv(const KvDocument& doc, const std::string& prefix) {
    nn::MlpModel model;
    nn::MlpConfig& c = model.config;
    c.input_dim = doc.get_u64(prefix + "input_dim");
    c.hidden_dims = parse_sizes(doc.get_string(prefix + "hidden_dims"));
    c.output_dim = doc.get_u64(prefix + "output_dim");
    const std::string head = doc.get_string(prefix + "output_activation");
    if (head == "softmax")
        c.output_activation = nn::OutputActivation::Softmax;
    else if (head == "sigmoid")
        c.output_activation = nn::OutputActivation::Sigmoid;
    else
        throw SchemaError("unknown output activation '" + head + "'");
    c.dropout_rate = doc.get_f64(prefix + "dropout_rate");
    const std::string opt = doc.get_string(prefix + "optimizer");
    if (opt == "adam")
        c.optimizer = nn::Optimizer::Adam;
    else if (opt == "sgd")
        c.optimizer = nn::Optimizer::Sgd;
    else
        throw SchemaError("unknown optimizer '" + opt + "'");
    c.learning_rate = doc.get_f64(prefix + "learning_rate");
    c.adam_beta1 = doc.get_f64(prefix + "adam_beta1");
    c.adam_beta2 = doc.get_f64(prefix + "adam_beta2");
    c.adam_epsilon = doc.get_f64(prefix + "adam_epsilon");
    c.batch_size = doc.get_u64(prefix + "batch_size");
    c.max_epochs = doc.get_u64(prefix + "max_epochs");
    c.patience = doc.get_u64(prefix + "patience");
    c.seed = doc.get_u64(prefix + "seed");
    model.class_weights = doc.get_f64_array(prefix + "class_weights");

    const std::size_t layers = doc.get_u64(prefix + "layers");
    const auto dims = c.layer_dims();
    if (layers != dims.size() - 1)
        throw SchemaError("layer count does not match the configured dimensions");
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string lp = prefix + "layer" + std::to_string(l) + ".";
        const std::size_t rows = doc.get_u64(lp + "rows");
        const std::size_t cols = doc.get_u64(lp + "cols");
        if (rows != dims[l] || cols != dims[l + 1])
            throw SchemaError("layer " + std::to_string(l) + " has shape " +
                              std::to_string(rows) + "x" + std::to_string(cols) +
                              ", expected " + std::to_string(dims[l]) + "x" +
                              std::to_string(dims[l + 1]));
        Matrix w(rows, cols);
        w.data() = doc.get_f64_array(lp + "weights");
        if (w.data().size() != rows * cols)
            throw SchemaError("layer " + std::to_string(l) + " weight payload mismatch");
        model.weights.push_back(std::move(w));
        auto bias = doc.get_f64_array(lp + "bias");
        if (bias.size() != cols)
            throw SchemaError("layer " + std::to_string(l) + " bias payload mismatch");
        model.biases.push_back(std::move(bias));
    }
    return model;
}

void preprocessor_to_kv(const ingest::Preprocessor& prep, KvDocument& doc,
                        const std::string& prefix) {
    doc.set_f64_array(prefix + "impute_means", prep.impute_means);
    doc.set_bool(prefix + "standardize", prep.standardize);
    doc.set_f64_array(prefix + "feature_means", prep.feature_means);
    doc.set_f64_array(prefix + "feature_stds", prep.feature_stds);
}

ingest::Preprocessor preprocessor_from_kv(const KvDocument& doc,
                                          const std::string& prefix) {
    ingest::Preprocessor prep;
    prep.impute_means = doc.get_f64_array(prefix + "impute_means");
    prep.standardize = doc.get_bool(prefix + "standardize");
    prep.feature_means = doc.get_f64_array(prefix + "feature_means");
    prep.feature_stds = doc.get_f64_array(prefix + "feature_stds");
    return prep;
}

void hierarchy_to_kv(const HierarchySpec& spec, KvDocument& doc,
                     const std::string& prefix) {
    doc.set_string(prefix + "root_name", spec.root_name);
    doc.set_u64(prefix + "parents", spec.parents.size());
    for (std::size_t p = 0; p < spec.parents.size(); ++p) {
        const std::string pp = prefix + "parent" + std::to_string(p) + ".";
        doc.set_string(pp + "name", spec.parents[p].name);
        doc.set_string(pp + "leaves", join_ints(spec.parents[p].leaves));
    }
    doc.set_string(prefix + "leaf_names", join_names(spec.leaf_names));
}

HierarchySpec hierarchy_from_kv(const KvDocument& doc, const std::string& prefix) {
    HierarchySpec spec;
    spec.root_name = doc.get_string(prefix + "root_name");
    const std::size_t parents = doc.get_u64(prefix + "parents");
    for (std::size_t p = 0; p < parents; ++p) {
        const std::string pp = prefix + "parent" + std::to_string(p) + ".";
        LabelConfig::ParentGroup group;
        group.name = doc.get_string(pp + "name");
        group.leaves = parse_ints(doc.get_string(pp + "leaves"));
        spec.parents.push_back(std::move(group));
    }
    spec.leaf_names = parse_names(doc.get_string(prefix + "leaf_names"));
    return spec;
}

KvDocument flat_to_kv(const hierarchy::FlatModel& model) {
    KvDocument doc;
    doc.set_string("kind", kKindFlat);
    doc.set_u64("format", 1);
    doc.set_string("class_names", join_names(model.class_names));
    preprocessor_to_kv(model.preprocessor, doc, "prep.");
    mlp_to_kv(model.mlp, doc, "mlp.");
    return doc;
}

hierarchy::FlatModel flat_from_kv(const KvDocument& doc) {
    if (kind_of(doc) != kKindFlat) throw SchemaError("not a flat-dnn document");
    hierarchy::FlatModel model;
    model.class_names = parse_names(doc.get_string("class_names"));
    model.preprocessor = preprocessor_from_kv(doc, "prep.");
    model.mlp = mlp_from_kv(doc, "mlp.");
    return model;
}

KvDocument lcpn_to_kv(const hierarchy::LcpnModel& model) {
    KvDocument doc;
    doc.set_string("kind", kKindLcpn);
    doc.set_u64("format", 1);
    hierarchy_to_kv(model.hierarchy, doc, "hierarchy.");
    preprocessor_to_kv(model.preprocessor, doc, "prep.");
    mlp_to_kv(model.root, doc, "root.");
    for (std::size_t p = 0; p < model.children.size(); ++p)
        mlp_to_kv(model.children[p], doc, "child" + std::to_string(p) + ".");
    return doc;
}

hierarchy::LcpnModel lcpn_from_kv(const KvDocument& doc) {
    if (kind_of(doc) != kKindLcpn) throw SchemaError("not an lcpn document");
    hierarchy::LcpnModel model;
    model.hierarchy = hierarchy_from_kv(doc, "hierarchy.");
    model.preprocessor = preprocessor_from_kv(doc, "prep.");
    model.root = mlp_from_kv(doc, "root.");
    for (std::size_t p = 0; p < model.hierarchy.parents.size(); ++p)
        model.children.push_back(mlp_from_kv(doc, "child" + std::to_string(p) + "."));
    return model;
}

void tree_to_kv(const baselines::TreeModel& model, KvDocument& doc,
                const std::string& prefix) {
    doc.set_u64(prefix + "n_classes", model.n_classes);
    doc.set_u64(prefix + "max_depth", model.max_depth);
    doc.set_u64(prefix + "nodes", model.nodes.size());
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const baselines::TreeNode& node = model.nodes[i];
        const std::string np = prefix + "node" + std::to_string(i) + ".";
        doc.set_string(np + "type", node.is_leaf ? "leaf" : "split");
        if (!node.is_leaf) {
            doc.set_i64(np + "feature", node.feature);
            doc.set_f64(np + "threshold", node.threshold);
            doc.set_i64(np + "left", node.left);
            doc.set_i64(np + "right", node.right);
        }
        doc.set_i64(np + "class", node.leaf_class);
        doc.set_i64_array(np + "counts",
                          std::vector<std::int64_t>(node.class_counts.begin(),
                                                    node.class_counts.end()));
    }
}

baselines::TreeModel tree_from_kv(const KvDocument& doc, const std::string& prefix) {
    baselines::TreeModel model;
    model.n_classes = doc.get_u64(prefix + "n_classes");
    model.max_depth = doc.get_u64(prefix + "max_depth");
    const std::size_t count = doc.get_u64(prefix + "nodes");
    for (std::size_t i = 0; i < count; ++i) {
        const std::string np = prefix + "node" + std::to_string(i) + ".";
        baselines::TreeNode node;
        const std::string type = doc.get_string(np + "type");
        node.is_leaf = type == "leaf";
        if (!node.is_leaf && type != "split")
            throw SchemaError("unknown tree node type '" + type + "'");
        if (!node.is_leaf) {
            node.feature = static_cast<int>(doc.get_i64(np + "feature"));
            node.threshold = doc.get_f64(np + "threshold");
            node.left = static_cast<int>(doc.get_i64(np + "left"));
            node.right = static_cast<int>(doc.get_i64(np + "right"));
        }
        node.leaf_class = static_cast<int>(doc.get_i64(np + "class"));
        const auto counts = doc.get_i64_array(np + "counts");
        node.class_counts.assign(counts.begin(), counts.end());
        model.nodes.push_back(std::move(node));
    }
    return model;
}

KvDocument forest_to_kv(const baselines::ForestModel& model) {
    KvDocument doc;
    doc.set_string("kind", kKindForest);
    doc.set_u64("format", 1);
    doc.set_u64("n_classes", model.n_classes);
    doc.set_u64("n_trees", model.trees.size());
    doc.set_u64("max_depth", model.config.max_depth);
    doc.set_bool("bootstrap", model.config.bootstrap);
    doc.set_u64("mtry", model.config.mtry);
    doc.set_u64("seed", model.config.seed);
    for (std::size_t t = 0; t < model.trees.size(); ++t)
        tree_to_kv(model.trees[t], doc, "tree" + std::to_string(t) + ".");
    return doc;
}

baselines::ForestModel forest_from_kv(const KvDocument& doc) {
    if (kind_of(doc) != kKindForest) throw SchemaError("not a random-forest document");
    baselines::ForestModel model;
    model.n_classes = doc.get_u64("n_classes");
    model.config.n_trees = doc.get_u64("n_trees");
    model.config.max_depth = doc.get_u64("max_depth");
    model.config.bootstrap = doc.get_bool("bootstrap");
    model.config.mtry = doc.get_u64("mtry");
    model.config.seed = doc.get_u64("seed");
    for (std::size_t t = 0; t < model.config.n_trees; ++t)
        model.trees.push_back(tree_from_kv(doc, "tree" + std::to_string(t) + "."));
    return model;
}

KvDocument knn_to_kv(std::size_t k, std::size_t n_classes, const std::string& train_ref) {
    KvDocument doc;
    doc.set_string("kind", kKindKnn);
    doc.set_u64("format", 1);
    doc.set_u64("k", k);
    doc.set_u64("n_classes", n_classes);
    doc.set_string("train_ref", train_ref);
    return doc;
}

baselines::KnnModel knn_from_kv(const KvDocument& doc, const std::string& model_dir) {
    if (kind_of(doc) != kKindKnn) throw SchemaError("not a knn document");
    baselines::KnnModel model;
    model.k = doc.get_u64("k");
    model.n_classes = doc.get_u64("n_classes");
    std::filesystem::path ref(doc.get_string("train_ref"));
    if (ref.is_relative()) ref = std::filesystem::path(model_dir) / ref;
    const ingest::Dataset train = dataset_from_kv(KvDocument::load(ref.string()));
    model.train_x = train.x;
    model.train_y = train.leaf_labels;
    return model;
}

KvDocument dataset_to_kv(const ingest::Dataset& data) {
    KvDocument doc;
    doc.set_string("kind", kKindDataset);
    doc.set_u64("format", 1);
    doc.set_u64("rows", data.x.rows());
    doc.set_u64("cols", data.x.cols());
    doc.set_f64_array("x", data.x.data());
    doc.set_i64_array("leaf_labels", to_i64(data.leaf_labels));
    doc.set_i64_array("parent_labels", to_i64(data.parent_labels));
    return doc;
}

ingest::Dataset dataset_from_kv(const KvDocument& doc) {
    if (kind_of(doc) != kKindDataset) throw SchemaError("not a dataset document");
    ingest::Dataset data;
    const std::size_t rows = doc.get_u64("rows");
    const std::size_t cols = doc.get_u64("cols");
    data.x = Matrix(rows, cols);
    data.x.data() = doc.get_f64_array("x");
    if (data.x.data().size() != rows * cols)
        throw SchemaError("dataset payload does not match rows*cols");
    data.leaf_labels = to_int(doc.get_i64_array("leaf_labels"));
    data.parent_labels = to_int(doc.get_i64_array("parent_labels"));
    if (data.leaf_labels.size() != rows)
        throw SchemaError("dataset label count does not match rows");
    return data;
}

KvDocument train_report_to_kv(const nn::TrainReport& report) {
    KvDocument doc;
    doc.set_string("kind", kKindTrainReport);
    doc.set_u64("format", 1);
    doc.set_f64_array("train_loss", report.train_loss);
    doc.set_f64_array("val_loss", report.val_loss);
    doc.set_f64_array("val_accuracy", report.val_accuracy);
    doc.set_u64("best_epoch", report.best_epoch);
    doc.set_bool("stopped_early", report.stopped_early);
    return doc;
}

nn::TrainReport train_report_from_kv(const KvDocument& doc) {
    if (kind_of(doc) != kKindTrainReport) throw SchemaError("not a train-report document");
    nn::TrainReport report;
    report.train_loss = doc.get_f64_array("train_loss");
    report.val_loss = doc.get_f64_array("val_loss");
    report.val_accuracy = doc.get_f64_array("val_accuracy");
    report.best_epoch = doc.get_u64("best_epoch");
    report.stopped_early = doc.get_bool("stopped_early");
    return report;
}

}  // namespace hharnet::io
