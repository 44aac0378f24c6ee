#include "hharnet/commands.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hharnet/error.hpp"
#include "hharnet/hierarchy.hpp"
#include "hharnet/ingest.hpp"
#include "hharnet/metrics.hpp"
#include "hharnet/model_io.hpp"
#include "hharnet/reference_results.hpp"
#include "hharnet/rng.hpp"
#include "hharnet/synthetic.hpp"

namespace fs = std::filesystem;

namespace hharnet::cli {

namespace {

constexpr const char* kKindMlpNode = "mlp-node";

const std::vector<std::string> kModels = {"dt", "knn", "rf", "mlp64", "flat", "hhar"};

void stamp(KvDocument& doc, const RunConfig& config) {
    doc.set_string("config_hash", hash_hex(config.config_hash));
    doc.set_u64("master_seed", config.master_seed);
}

std::string out_path(const RunConfig& config, const std::string& name) {
    return (fs::path(config.output_dir) / name).string();
}

std::string stamp_comment(const RunConfig& config) {
    return "# config_hash = " + hash_hex(config.config_hash) +
           ", master_seed = " + std::to_string(config.master_seed) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

struct Prepared {
    ingest::Dataset train;
    ingest::Dataset val;
    ingest::Dataset test;
    ingest::Preprocessor prep;
};

KvDocument load_artifact(const RunConfig& config, const std::string& name) {
    const std::string path = out_path(config, name);
    if (!fs::exists(path))
        throw IoError("missing prepared artifact '" + path + "' (run 'prepare' first)");
    return KvDocument::load(path);
}

Prepared load_prepared(const RunConfig& config, bool need_train, bool need_test) {
    Prepared p;
    if (need_train) {
        p.train = io::dataset_from_kv(load_artifact(config, "train.kv"));
        p.val = io::dataset_from_kv(load_artifact(config, "val.kv"));
    }
    if (need_test) p.test = io::dataset_from_kv(load_artifact(config, "test.kv"));
    p.prep = io::preprocessor_from_kv(load_artifact(config, "preprocessor.kv"), "prep.");
    return p;
}

std::vector<std::string> display_names(const LabelConfig& labels) {
    std::vector<std::string> names;
    names.reserve(labels.leaf_count());
    for (const auto& leaf : labels.leaf_labels) names.push_back(leaf.display_name);
    return names;
}

std::string sanitize(std::string name) {
    for (char& c : name) {
        if (c == ' ' || c == '/') c = '_';
    }
    return name;
}

std::size_t count_label(const std::vector<int>& labels, int value) {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), value));
}

// ---------------------------------------------------------------------------
// prediction dispatch over persisted models

struct EvalOutcome {
    std::string model_kind;
    std::vector<int> y_pred;
    // populated for lcpn models only
    std::optional<double> level0_accuracy;
    std::vector<std::pair<std::string, double>> parent_accuracy;
};

void check_feature_dim(std::size_t model_dim, std::size_t data_dim,
                       const std::string& file) {
    if (model_dim != data_dim)
        throw SchemaError("'" + file + "': model expects " + std::to_string(model_dim) +
                          " features but the test split has " + std::to_string(data_dim));
}

EvalOutcome run_model(const RunConfig& config, const std::string& model_file,
                      const ingest::Dataset& test) {
    if (!fs::exists(model_file)) throw IoError("model file '" + model_file + "' not found");
    const KvDocument doc = KvDocument::load(model_file);
    const std::string kind = io::kind_of(doc);

    EvalOutcome outcome;
    outcome.model_kind = kind;

    if (kind == io::kKindFlat) {
        const auto model = io::flat_from_kv(doc);
        check_feature_dim(model.mlp.config.input_dim, test.x.cols(), model_file);
        outcome.y_pred = hierarchy::predict_flat_batch(model, test.x);
    } else if (kind == io::kKindLcpn) {
        const auto model = io::lcpn_from_kv(doc);
        check_feature_dim(model.root.config.input_dim, test.x.cols(), model_file);
        outcome.y_pred = hierarchy::predict_topdown_batch(model, test.x);

        const std::vector<int> root_pred = hierarchy::predict_root_batch(model, test.x);
        if (!test.parent_labels.empty()) {
            const auto cm = metrics::confusion(test.parent_labels, root_pred, 2);
            outcome.level0_accuracy = metrics::accuracy(cm);
            for (std::size_t p = 0; p < model.hierarchy.parent_count(); ++p) {
                // child accuracy on its own (true-parent) test subset
                std::vector<std::size_t> rows;
                std::vector<int> within_true;
                const auto& leaves = model.hierarchy.parents[p].leaves;
                for (std::size_t i = 0; i < test.size(); ++i) {
                    if (test.parent_labels[i] != static_cast<int>(p)) continue;
                    rows.push_back(i);
                    auto it = std::find(leaves.begin(), leaves.end(), test.leaf_labels[i]);
                    within_true.push_back(static_cast<int>(it - leaves.begin()));
                }
                if (rows.empty()) continue;
                const Matrix xp = test.x.select_rows(rows);
                const auto within_pred = nn::predict_batch(model.children[p], xp);
                std::size_t correct = 0;
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (within_pred[i] == within_true[i]) ++correct;
                }
                outcome.parent_accuracy.emplace_back(
                    model.hierarchy.parents[p].name,
                    static_cast<double>(correct) / static_cast<double>(rows.size()));
            }
        }
    } else if (kind == io::kKindTree) {
        const auto model = io::tree_from_kv(doc, "");
        outcome.y_pred = baselines::tree_predict_batch(model, test.x);
    } else if (kind == io::kKindForest) {
        const auto model = io::forest_from_kv(doc);
        outcome.y_pred = baselines::forest_predict_batch(model, test.x);
    } else if (kind == io::kKindKnn) {
        const auto model =
            io::knn_from_kv(doc, fs::path(model_file).parent_path().string());
        check_feature_dim(model.train_x.cols(), test.x.cols(), model_file);
        outcome.y_pred = baselines::knn_predict_batch(model, test.x, config.knn_threads);
    } else if (kind == kKindMlpNode) {
        throw SchemaError("'" + model_file +
                          "' is a single hierarchy-node model; evaluate the combined "
                          "lcpn model file instead");
    } else {
        throw SchemaError("'" + model_file + "': cannot evaluate documents of kind '" +
                          kind + "'");
    }
    return outcome;
}

}  // namespace

const std::vector<std::string>& model_names() { return kModels; }

void cmd_synth(const RunConfig& config) {
    const std::string dir = out_path(config, "data");
    const std::string manifest = synth::write_dataset(config.synth, config.labels, dir);
    std::cout << "synthetic dataset written, manifest: " << manifest << "\n";
}

void cmd_prepare(const RunConfig& config) {
    if (config.manifest.empty()) throw ConfigError("config: 'manifest' not set");
    const std::vector<std::string> files = ingest::read_manifest(config.manifest);
    if (files.empty()) throw Error("no input files in manifest '" + config.manifest + "'");
    fs::create_directories(config.output_dir);

    ingest::Dataset all;
    all.x = Matrix(0, config.labels.feature_count);
    std::size_t dropped_no_target = 0, dropped_conflict = 0, raw_rows = 0;
    for (const std::string& file : files) {
        const auto rows = ingest::load_user_file(file, config.labels);
        raw_rows += rows.size();
        auto filtered = ingest::filter_target_samples(rows, config.labels);
        dropped_no_target += filtered.dropped_no_target;
        dropped_conflict += filtered.dropped_conflict;
        for (std::size_t i = 0; i < filtered.leaf_labels.size(); ++i)
            all.x.append_row(filtered.features.row(i));
        all.leaf_labels.insert(all.leaf_labels.end(), filtered.leaf_labels.begin(),
                               filtered.leaf_labels.end());
    }
    ingest::derive_parent_labels(all, config.labels);

    ingest::Splits splits = ingest::split_dataset(all, config.split);

    ingest::Preprocessor prep;
    std::vector<Matrix*> others = {&splits.val.x, &splits.test.x};
    prep.impute_means = ingest::impute_means(splits.train.x, others);
    prep.standardize = config.standardize;
    if (config.standardize) {
        ingest::fit_standardizer(splits.train.x, prep.feature_means, prep.feature_stds);
        auto zscore = [&](Matrix& m) {
            for (std::size_t i = 0; i < m.rows(); ++i) {
                for (std::size_t j = 0; j < m.cols(); ++j)
                    m(i, j) = (m(i, j) - prep.feature_means[j]) / prep.feature_stds[j];
            }
        };
        zscore(splits.train.x);
        zscore(splits.val.x);
        zscore(splits.test.x);
    }

    auto save_split = [&](const ingest::Dataset& d, const std::string& name) {
        KvDocument doc = io::dataset_to_kv(d);
        stamp(doc, config);
        doc.save(out_path(config, name));
    };
    save_split(splits.train, "train.kv");
    save_split(splits.val, "val.kv");
    save_split(splits.test, "test.kv");

    KvDocument prep_doc;
    prep_doc.set_string("kind", io::kKindPreprocessor);
    prep_doc.set_u64("format", 1);
    io::preprocessor_to_kv(prep, prep_doc, "prep.");
    stamp(prep_doc, config);
    prep_doc.save(out_path(config, "preprocessor.kv"));

    // summary: per-split class counts
    std::ostringstream txt;
    txt << "# prepared dataset summary\n" << stamp_comment(config);
    txt << "input rows: " << raw_rows << ", kept: " << all.size()
        << ", dropped (no target): " << dropped_no_target
        << ", dropped (conflicting targets): " << dropped_conflict << "\n\n";
    const auto names = display_names(config.labels);
    std::size_t name_width = 6;
    for (const auto& n : names) name_width = std::max(name_width, n.size());
    txt << pad_right("class", name_width + 2) << pad_left("train", 8)
        << pad_left("val", 8) << pad_left("test", 8) << "\n";
    for (std::size_t c = 0; c < names.size(); ++c) {
        txt << pad_right(names[c], name_width + 2)
            << pad_left(std::to_string(count_label(splits.train.leaf_labels,
                                                   static_cast<int>(c))), 8)
            << pad_left(std::to_string(count_label(splits.val.leaf_labels,
                                                   static_cast<int>(c))), 8)
            << pad_left(std::to_string(count_label(splits.test.leaf_labels,
                                                   static_cast<int>(c))), 8)
            << "\n";
    }
    txt << pad_right("total", name_width + 2)
        << pad_left(std::to_string(splits.train.size()), 8)
        << pad_left(std::to_string(splits.val.size()), 8)
        << pad_left(std::to_string(splits.test.size()), 8) << "\n";
    write_text(out_path(config, "prepare.summary.txt"), txt.str());
    std::cout << txt.str();
}

void cmd_train(const RunConfig& config, const std::string& model_name) {
    if (std::find(kModels.begin(), kModels.end(), model_name) == kModels.end()) {
        std::string valid;
        for (const auto& m : kModels) valid += (valid.empty() ? "" : ", ") + m;
        throw ConfigError("unknown model '" + model_name + "' (expected one of: " +
                          valid + ")");
    }
    fs::create_directories(config.output_dir);
    Prepared prepared = load_prepared(config, /*need_train=*/true, /*need_test=*/false);
    const auto class_names = display_names(config.labels);

    auto save_model = [&](KvDocument doc, const std::string& name) {
        stamp(doc, config);
        doc.save(out_path(config, name));
    };
    auto save_report = [&](const nn::TrainReport& report, const std::string& name) {
        KvDocument doc = io::train_report_to_kv(report);
        stamp(doc, config);
        doc.save(out_path(config, name));
    };

    if (model_name == "flat" || model_name == "mlp64") {
        const nn::MlpConfig& mlp_config =
            model_name == "flat" ? config.flat : config.mlp64;
        nn::TrainReport report;
        const auto model = hierarchy::train_flat(prepared.train, prepared.val, mlp_config,
                                                 prepared.prep, class_names, &report);
        save_model(io::flat_to_kv(model), model_name + ".model");
        save_report(report, model_name + ".train_report.kv");
        std::cout << "trained " << model_name << ": best epoch "
                  << (report.best_epoch + 1) << ", val accuracy "
                  << percent(report.val_accuracy[report.best_epoch]) << "%\n";
    } else if (model_name == "hhar") {
        const auto spec = HierarchySpec::from_label_config(config.labels);
        hierarchy::LcpnConfigs configs{config.root, config.children};
        std::vector<nn::TrainReport> reports;
        const auto model = hierarchy::train_lcpn(prepared.train, prepared.val, spec,
                                                 configs, prepared.prep, &reports);

        // three node models plus the combined stack
        auto node_doc = [&](const nn::MlpModel& m) {
            KvDocument doc;
            doc.set_string("kind", kKindMlpNode);
            doc.set_u64("format", 1);
            io::preprocessor_to_kv(model.preprocessor, doc, "prep.");
            io::mlp_to_kv(m, doc, "mlp.");
            return doc;
        };
        save_model(node_doc(model.root), "hhar_root.model");
        save_report(reports[0], "hhar_root.train_report.kv");
        for (std::size_t p = 0; p < model.children.size(); ++p) {
            const std::string node = sanitize(spec.parents[p].name);
            save_model(node_doc(model.children[p]), "hhar_" + node + ".model");
            save_report(reports[p + 1], "hhar_" + node + ".train_report.kv");
        }
        save_model(io::lcpn_to_kv(model), "hhar.model");
        std::cout << "trained hhar: root val accuracy "
                  << percent(reports[0].val_accuracy[reports[0].best_epoch]) << "%\n";
    } else if (model_name == "dt") {
        const auto model = baselines::tree_fit(prepared.train.x,
                                               prepared.train.leaf_labels,
                                               class_names.size(), config.tree_max_depth);
        KvDocument doc;
        doc.set_string("kind", io::kKindTree);
        doc.set_u64("format", 1);
        io::tree_to_kv(model, doc, "");
        save_model(std::move(doc), "dt.model");
        save_report({}, "dt.train_report.kv");
        std::cout << "trained dt: " << model.nodes.size() << " nodes\n";
    } else if (model_name == "rf") {
        const auto model = baselines::forest_fit(prepared.train.x,
                                                 prepared.train.leaf_labels,
                                                 class_names.size(), config.forest);
        save_model(io::forest_to_kv(model), "rf.model");
        save_report({}, "rf.train_report.kv");
        std::cout << "trained rf: " << model.trees.size() << " trees\n";
    } else {  // knn
        if (config.knn_k == 0 || config.knn_k > prepared.train.size())
            throw ConfigError("knn.k=" + std::to_string(config.knn_k) +
                              " invalid for training size " +
                              std::to_string(prepared.train.size()));
        save_model(io::knn_to_kv(config.knn_k, class_names.size(), "train.kv"),
                   "knn.model");
        save_report({}, "knn.train_report.kv");
        std::cout << "trained knn: k=" << config.knn_k << ", referencing train.kv\n";
    }
}

namespace {

std::string render_optional_percent(const std::optional<double>& v) {
    return v ? percent(*v) : "undefined";
}

struct CellWithInterval {
    std::optional<double> value;
    std::optional<double> half_width;

    std::string render() const {
        if (!value) return "undefined";
        std::string s = percent(*value);
        if (half_width) s += " +- " + percent(*half_width);
        return s;
    }
};

}  // namespace

void cmd_evaluate(const RunConfig& config, const std::string& model_file) {
    fs::create_directories(config.output_dir);
    Prepared prepared = load_prepared(config, /*need_train=*/false, /*need_test=*/true);
    const ingest::Dataset& test = prepared.test;
    if (test.size() == 0) throw Error("test split is empty");

    const EvalOutcome outcome = run_model(config, model_file, test);
    const auto names = display_names(config.labels);
    const std::size_t n = names.size();

    const auto cm = metrics::confusion(test.leaf_labels, outcome.y_pred, n);
    const auto report = metrics::per_class_metrics(cm);

    std::vector<int> class_to_block(n);
    for (std::size_t c = 0; c < n; ++c)
        class_to_block[c] = config.labels.parent_of(static_cast<int>(c));
    auto blocks = metrics::block_misclassification(cm, class_to_block);
    blocks.first_name = config.labels.parent_groups[0].name;
    blocks.second_name = config.labels.parent_groups[1].name;

    // bootstrap intervals (skipped when resamples == 0)
    const bool do_bootstrap = config.bootstrap_resamples >= 100;
    const std::uint64_t boot_seed = derive_seed(config.master_seed, seed_tag::kBootstrap);
    auto interval = [&](const metrics::MetricFn& fn) -> std::optional<double> {
        if (!do_bootstrap) return std::nullopt;
        return metrics::bootstrap_interval(test.leaf_labels, outcome.y_pred, fn,
                                           config.bootstrap_resamples, boot_seed)
            .half_width;
    };

    CellWithInterval acc_cell{report.accuracy, interval(metrics::make_accuracy_metric(n))};
    CellWithInterval bal_cell{report.balanced_accuracy,
                              report.balanced_accuracy
                                  ? interval(metrics::make_balanced_accuracy_metric(n))
                                  : std::nullopt};
    std::vector<std::array<CellWithInterval, 4>> class_cells(n);
    using MK = metrics::ClassMetricKind;
    const MK kinds[4] = {MK::Precision, MK::Sensitivity, MK::Specificity, MK::F1};
    for (std::size_t c = 0; c < n; ++c) {
        const auto& m = report.per_class[c];
        const std::optional<double> values[4] = {m.precision, m.sensitivity,
                                                 m.specificity, m.f1};
        for (int k = 0; k < 4; ++k) {
            class_cells[c][k].value = values[k];
            if (values[k])
                class_cells[c][k].half_width =
                    interval(metrics::make_class_metric(n, c, kinds[k]));
        }
    }

    // machine-readable report; only the basename is embedded so that reruns
    // into different directories stay byte-comparable
    const std::string model_name = fs::path(model_file).filename().string();
    KvDocument doc;
    doc.set_string("kind", io::kKindEvalReport);
    doc.set_u64("format", 1);
    doc.set_string("model_file", model_name);
    doc.set_string("model_kind", outcome.model_kind);
    doc.set_u64("samples", test.size());
    doc.set_f64("accuracy", report.accuracy);
    if (report.balanced_accuracy)
        doc.set_f64("balanced_accuracy", *report.balanced_accuracy);
    else
        doc.set_string("balanced_accuracy", "undefined");
    const char* metric_keys[4] = {"precision", "sensitivity", "specificity", "f1"};
    for (std::size_t c = 0; c < n; ++c) {
        const std::string cp = "class" + std::to_string(c) + ".";
        doc.set_string(cp + "name", names[c]);
        for (int k = 0; k < 4; ++k) {
            if (class_cells[c][k].value)
                doc.set_f64(cp + metric_keys[k], *class_cells[c][k].value);
            else
                doc.set_string(cp + metric_keys[k], "undefined");
            if (class_cells[c][k].half_width)
                doc.set_f64(cp + metric_keys[k] + "_halfwidth",
                            *class_cells[c][k].half_width);
        }
    }
    std::vector<std::int64_t> cm_flat(cm.counts.begin(), cm.counts.end());
    doc.set_i64_array("confusion", cm_flat);
    doc.set_u64("block.within_first", blocks.within_first);
    doc.set_u64("block.first_to_second", blocks.first_to_second);
    doc.set_u64("block.second_to_first", blocks.second_to_first);
    doc.set_u64("block.within_second", blocks.within_second);
    doc.set_u64("block.total", blocks.total());
    doc.set_u64("block.cross", blocks.cross());
    if (outcome.level0_accuracy) {
        doc.set_f64("level0_accuracy", *outcome.level0_accuracy);
        for (std::size_t p = 0; p < outcome.parent_accuracy.size(); ++p) {
            doc.set_string("parent" + std::to_string(p) + ".name",
                           outcome.parent_accuracy[p].first);
            doc.set_f64("parent" + std::to_string(p) + ".accuracy",
                        outcome.parent_accuracy[p].second);
        }
    }
    stamp(doc, config);

    const std::string stem = fs::path(model_file).stem().string();
    doc.save(out_path(config, stem + ".eval.kv"));

    // plain-text tables
    std::ostringstream txt;
    txt << "# evaluation report\n" << stamp_comment(config);
    txt << "model: " << model_name << " (" << outcome.model_kind << "), test samples: "
        << test.size() << "\n\n";

    std::size_t name_width = 5;
    for (const auto& nm : names) name_width = std::max(name_width, nm.size());
    const std::size_t cell = std::max<std::size_t>(name_width + 2, 10);

    txt << "confusion matrix (rows = true, columns = predicted)\n";
    txt << pad_right("", name_width + 2);
    for (const auto& nm : names) txt << pad_left(nm, cell);
    txt << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        txt << pad_right(names[i], name_width + 2);
        for (std::size_t j = 0; j < n; ++j)
            txt << pad_left(std::to_string(cm.at(i, j)), cell);
        txt << "\n";
    }
    txt << "\naccuracy: " << acc_cell.render() << "%\n";
    txt << "balanced accuracy: " << bal_cell.render() << "%\n\n";

    txt << "per-class metrics (%";
    if (do_bootstrap) txt << ", +- is a 95% bootstrap interval";
    txt << ")\n";
    txt << pad_right("class", name_width + 2);
    for (const char* key : metric_keys) txt << pad_left(key, 18);
    txt << "\n";
    for (std::size_t c = 0; c < n; ++c) {
        txt << pad_right(names[c], name_width + 2);
        for (int k = 0; k < 4; ++k) txt << pad_left(class_cells[c][k].render(), 18);
        txt << "\n";
    }

    const std::size_t block_width =
        std::max(blocks.first_name.size(), blocks.second_name.size()) + 6;
    txt << "\nmisclassification blocks (correct predictions excluded)\n";
    txt << pad_right("true \\ predicted", block_width + 2)
        << pad_left(blocks.first_name, block_width)
        << pad_left(blocks.second_name, block_width) << "\n";
    txt << pad_right(blocks.first_name, block_width + 2)
        << pad_left(std::to_string(blocks.within_first), block_width)
        << pad_left(std::to_string(blocks.first_to_second), block_width) << "\n";
    txt << pad_right(blocks.second_name, block_width + 2)
        << pad_left(std::to_string(blocks.second_to_first), block_width)
        << pad_left(std::to_string(blocks.within_second), block_width) << "\n";
    txt << "total misclassified: " << blocks.total() << " (cross-block: "
        << blocks.cross() << ")\n";

    if (outcome.level0_accuracy) {
        txt << "\nlevel-0 (root) accuracy: " << percent(*outcome.level0_accuracy)
            << "%\n";
        for (const auto& [pname, pacc] : outcome.parent_accuracy)
            txt << "parent '" << pname << "' accuracy: " << percent(pacc) << "%\n";
    }
    write_text(out_path(config, stem + ".eval.txt"), txt.str());
    std::cout << "evaluated " << model_file << ": accuracy " << percent(report.accuracy)
              << "%, report " << out_path(config, stem + ".eval.txt") << "\n";
}

void cmd_compare(const RunConfig& config) {
    fs::create_directories(config.output_dir);
    Prepared prepared = load_prepared(config, /*need_train=*/false, /*need_test=*/true);
    const ingest::Dataset& test = prepared.test;
    const std::size_t n = config.labels.leaf_count();

    struct Row {
        std::string display;
        std::string model;  // empty = not part of this artifact
        reference::BenchmarkRow published;
        std::optional<double> accuracy;
        std::optional<double> balanced;
        std::string status;
    };
    std::vector<Row> rows = {
        {"Decision Tree", "dt", reference::kDecisionTree, {}, {}, ""},
        {"k-NN", "knn", reference::kKnn, {}, {}, ""},
        {"SVM", "", reference::kSvm, {}, {}, "out of scope"},
        {"Random Forest", "rf", reference::kRandomForest, {}, {}, ""},
        {"MLP", "mlp64", reference::kMlp, {}, {}, ""},
        {"Flat DNN", "flat", reference::kFlatDnn, {}, {}, ""},
        {"HHAR-Net", "hhar", reference::kHharNet, {}, {}, ""},
    };

    for (Row& row : rows) {
        if (row.model.empty()) continue;
        const std::string file = out_path(config, row.model + ".model");
        if (!fs::exists(file)) {
            row.status = "missing (train '" + row.model + "' first)";
            continue;
        }
        const EvalOutcome outcome = run_model(config, file, test);
        const auto cm = metrics::confusion(test.leaf_labels, outcome.y_pred, n);
        row.accuracy = metrics::accuracy(cm);
        const auto report = metrics::per_class_metrics(cm);
        row.balanced = report.balanced_accuracy;
        row.status = "ok";
    }

    KvDocument doc;
    doc.set_string("kind", "compare-report");
    doc.set_u64("format", 1);
    doc.set_u64("rows", rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string rp = "row" + std::to_string(i) + ".";
        doc.set_string(rp + "name", rows[i].display);
        doc.set_string(rp + "status", rows[i].status);
        if (rows[i].accuracy) doc.set_f64(rp + "accuracy", *rows[i].accuracy);
        if (rows[i].balanced) doc.set_f64(rp + "balanced_accuracy", *rows[i].balanced);
        doc.set_f64(rp + "published_accuracy", rows[i].published.accuracy);
        doc.set_f64(rp + "published_balanced_accuracy",
                    rows[i].published.balanced_accuracy);
    }
    stamp(doc, config);
    doc.save(out_path(config, "compare.kv"));

    std::ostringstream txt;
    txt << "# classifier comparison (accuracy %, balanced accuracy %)\n"
        << stamp_comment(config);
    txt << pad_right("classifier", 16) << pad_left("accuracy", 12)
        << pad_left("published", 12) << pad_left("balanced", 12)
        << pad_left("published", 12) << "  note\n";
    char buf[32];
    for (const Row& row : rows) {
        txt << pad_right(row.display, 16);
        txt << pad_left(row.accuracy ? percent(*row.accuracy) : "-", 12);
        std::snprintf(buf, sizeof(buf), "%.1f", row.published.accuracy);
        txt << pad_left(buf, 12);
        txt << pad_left(row.balanced ? percent(*row.balanced) : "-", 12);
        std::snprintf(buf, sizeof(buf), "%.1f", row.published.balanced_accuracy);
        txt << pad_left(buf, 12);
        txt << "  " << (row.status == "ok" ? "" : row.status) << "\n";
    }
    write_text(out_path(config, "compare.txt"), txt.str());
    std::cout << txt.str();
}

void cmd_gridsearch(const RunConfig& config) {
    fs::create_directories(config.output_dir);
    Prepared prepared = load_prepared(config, /*need_train=*/true, /*need_test=*/false);
    const auto class_names = display_names(config.labels);

    // layer counts {2, 3} x widths {64, 128, 256, 512}; uniform width per net
    // unless the exhaustive mode asks for every width combination
    const std::vector<std::size_t> layer_counts = {2, 3};
    const std::vector<std::size_t> widths = {64, 128, 256, 512};
    std::vector<std::vector<std::size_t>> architectures;
    if (config.gridsearch_exhaustive) {
        for (std::size_t layers : layer_counts) {
            std::vector<std::size_t> arch(layers, widths[0]);
            std::vector<std::size_t> idx(layers, 0);
            for (;;) {
                for (std::size_t l = 0; l < layers; ++l) arch[l] = widths[idx[l]];
                architectures.push_back(arch);
                std::size_t l = layers;
                while (l-- > 0) {
                    if (++idx[l] < widths.size()) break;
                    idx[l] = 0;
                    if (l == 0) goto next_layer_count;
                }
            }
        next_layer_count:;
        }
    } else {
        for (std::size_t layers : layer_counts) {
            for (std::size_t w : widths)
                architectures.push_back(std::vector<std::size_t>(layers, w));
        }
    }

    struct Run {
        std::vector<std::size_t> hidden;
        double val_accuracy = 0.0;
        std::size_t best_epoch = 0;
    };
    std::vector<Run> runs;
    for (std::size_t j = 0; j < architectures.size(); ++j) {
        nn::MlpConfig mlp_config = config.flat;
        mlp_config.hidden_dims = architectures[j];
        mlp_config.seed = derive_seed(config.master_seed, seed_tag::kGridSearch + j);
        nn::TrainReport report;
        hierarchy::train_flat(prepared.train, prepared.val, mlp_config, prepared.prep,
                              class_names, &report);
        Run run;
        run.hidden = architectures[j];
        run.best_epoch = report.best_epoch;
        run.val_accuracy = report.val_accuracy[report.best_epoch];
        runs.push_back(std::move(run));
        std::cout << "gridsearch " << (j + 1) << "/" << architectures.size() << "\n";
    }

    std::vector<std::size_t> order(runs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return runs[a].val_accuracy > runs[b].val_accuracy;
    });

    auto arch_text = [](const std::vector<std::size_t>& dims) {
        std::string s;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(dims[i]);
        }
        return s;
    };

    KvDocument doc;
    doc.set_string("kind", "gridsearch-report");
    doc.set_u64("format", 1);
    doc.set_u64("runs", runs.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const Run& run = runs[order[r]];
        const std::string rp = "rank" + std::to_string(r) + ".";
        doc.set_string(rp + "hidden_dims", arch_text(run.hidden));
        doc.set_f64(rp + "val_accuracy", run.val_accuracy);
        doc.set_u64(rp + "best_epoch", run.best_epoch);
    }
    stamp(doc, config);
    doc.save(out_path(config, "gridsearch.kv"));

    std::ostringstream txt;
    txt << "# architecture search, ranked by validation accuracy\n"
        << stamp_comment(config);
    txt << pad_right("hidden layers", 18) << pad_left("val accuracy", 14)
        << pad_left("best epoch", 12) << "\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const Run& run = runs[order[r]];
        txt << pad_right(arch_text(run.hidden), 18)
            << pad_left(percent(run.val_accuracy), 14)
            << pad_left(std::to_string(run.best_epoch + 1), 12) << "\n";
    }
    write_text(out_path(config, "gridsearch.txt"), txt.str());
    std::cout << "best architecture: " << arch_text(runs[order[0]].hidden)
              << " (val accuracy " << percent(runs[order[0]].val_accuracy) << "%)\n";
}

}  // namespace hharnet::cli
