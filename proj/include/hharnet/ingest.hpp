#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hharnet/labels.hpp"
#include "hharnet/matrix.hpp"

namespace hharnet::ingest {

enum class LabelFlag : unsigned char { kNotRelevant, kRelevant, kMissing };

/// One data line of a per-user file. Missing feature cells are NaN.
struct RawRow {
    long long timestamp = 0;
    std::vector<double> features;
    std::vector<LabelFlag> label_flags;  // one per configured leaf, leaf order
};

/// Rows that survive the cleaning rules: exactly one relevant target label.
struct FilterResult {
    Matrix features;  // still contains NaN for missing cells
    std::vector<int> leaf_labels;
    std::size_t dropped_no_target = 0;
    std::size_t dropped_conflict = 0;  // rows with two or more relevant targets
};

/// Feature matrix plus leaf labels; parent labels filled by
/// derive_parent_labels.
struct Dataset {
    Matrix x;
    std::vector<int> leaf_labels;
    std::vector<int> parent_labels;

    std::size_t size() const { return leaf_labels.size(); }
};

struct SplitSpec {
    double train_fraction = 0.80;
    double val_fraction_of_train = 0.05;
    std::uint64_t seed = 0;
};

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Imputation plus optional z-scoring, fit on the training split only and
/// applied identically everywhere. Persisted alongside every model.
struct Preprocessor {
    std::vector<double> impute_means;
    bool standardize = true;
    std::vector<double> feature_means;  // empty when standardize is false
    std::vector<double> feature_stds;   // floored at kStdFloor

    static constexpr double kStdFloor = 1e-8;

    void apply(Matrix& x) const;
    void apply_row(std::vector<double>& row) const;

    bool operator==(const Preprocessor&) const = default;
};

/// Parses one per-user file (gzip or plain CSV): header first, timestamp
/// column first, feature columns are everything that is not `label:`-prefixed
/// (and not `label_source`), label cells are 0 / 1 / empty.
std::vector<RawRow> load_user_file(const std::string& path, const LabelConfig& config);

/// Keeps rows with exactly one relevant target label. Rows with none are
/// dropped; rows with two or more are dropped and tallied as conflicts.
FilterResult filter_target_samples(const std::vector<RawRow>& rows,
                                   const LabelConfig& config);

/// Column means computed on `train` only; every NaN cell in `train` and in
/// each matrix of `others` is replaced by the train column mean. Returns the
/// means. Throws naming the column index if a train column has no observed
/// value.
std::vector<double> impute_means(Matrix& train, const std::vector<Matrix*>& others);

/// Per-feature mean/std fit on `train` (population std, floored). Does not
/// modify anything.
void fit_standardizer(const Matrix& train, std::vector<double>& means,
                      std::vector<double>& stds);

/// parent_label[i] = index of the parent group containing leaf_labels[i].
void derive_parent_labels(Dataset& dataset, const LabelConfig& config);

/// Seeded uniform shuffle, then contiguous slices: train, then val (carved
/// from the tail of the train block), then test. Deterministic given the
/// seed; the three parts partition the input.
Splits split_dataset(const Dataset& dataset, const SplitSpec& spec);

/// One path per non-empty line; '#' lines are comments. Relative paths are
/// resolved against the manifest's directory.
std::vector<std::string> read_manifest(const std::string& path);

}  // namespace hharnet::ingest
