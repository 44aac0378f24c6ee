#pragma once

#include <string>

#include "hharnet/baselines.hpp"
#include "hharnet/hierarchy.hpp"
#include "hharnet/ingest.hpp"
#include "hharnet/kv.hpp"
#include "hharnet/nn.hpp"

namespace hharnet::io {

/// Document kinds (the `kind` key of each persisted file).
inline constexpr const char* kKindFlat = "flat-dnn";
inline constexpr const char* kKindLcpn = "lcpn";
inline constexpr const char* kKindTree = "decision-tree";
inline constexpr const char* kKindForest = "random-forest";
inline constexpr const char* kKindKnn = "knn";
inline constexpr const char* kKindDataset = "dataset";
inline constexpr const char* kKindPreprocessor = "preprocessor";
inline constexpr const char* kKindTrainReport = "train-report";
inline constexpr const char* kKindEvalReport = "eval-report";

void mlp_to_kv(const nn::MlpModel& model, KvDocument& doc, const std::string& prefix);
nn::MlpModel mlp_from_kv(const KvDocument& doc, const std::string& prefix);

void preprocessor_to_kv(const ingest::Preprocessor& prep, KvDocument& doc,
                        const std::string& prefix);
ingest::Preprocessor preprocessor_from_kv(const KvDocument& doc,
                                          const std::string& prefix);

void hierarchy_to_kv(const HierarchySpec& spec, KvDocument& doc,
                     const std::string& prefix);
HierarchySpec hierarchy_from_kv(const KvDocument& doc, const std::string& prefix);

KvDocument flat_to_kv(const hierarchy::FlatModel& model);
hierarchy::FlatModel flat_from_kv(const KvDocument& doc);

KvDocument lcpn_to_kv(const hierarchy::LcpnModel& model);
hierarchy::LcpnModel lcpn_from_kv(const KvDocument& doc);

void tree_to_kv(const baselines::TreeModel& model, KvDocument& doc,
                const std::string& prefix);
baselines::TreeModel tree_from_kv(const KvDocument& doc, const std::string& prefix);

KvDocument forest_to_kv(const baselines::ForestModel& model);
baselines::ForestModel forest_from_kv(const KvDocument& doc);

/// The kNN model file references the prepared training-set file instead of
/// duplicating the matrix; `train_ref` is resolved against the model file's
/// directory at load time.
KvDocument knn_to_kv(std::size_t k, std::size_t n_classes, const std::string& train_ref);
baselines::KnnModel knn_from_kv(const KvDocument& doc, const std::string& model_dir);

KvDocument dataset_to_kv(const ingest::Dataset& data);
ingest::Dataset dataset_from_kv(const KvDocument& doc);

KvDocument train_report_to_kv(const nn::TrainReport& report);
nn::TrainReport train_report_from_kv(const KvDocument& doc);

/// The `kind` key of a persisted document, with a clear error if absent.
std::string kind_of(const KvDocument& doc);

}  // namespace hharnet::io
