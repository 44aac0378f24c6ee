#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hharnet/error.hpp"

namespace hharnet::metrics {

/// Integer count matrix; rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> counts;  // n*n, row-major
    std::vector<std::string> class_names;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes)
        : n(classes), counts(classes * classes, 0) {}

    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * n + pred]; }
    std::size_t& at(std::size_t truth, std::size_t pred) { return counts[truth * n + pred]; }

    std::size_t total() const;
    std::size_t trace() const;
    std::size_t row_sum(std::size_t i) const;
    std::size_t col_sum(std::size_t j) const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::size_t n);

/// trace / total. Throws Error on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

/// Mean of per-class recalls. Throws Error naming the class if a row is empty.
double balanced_accuracy(const ConfusionMatrix& cm);

/// One-vs-rest metrics for a single class. Cells are nullopt when the
/// defining ratio is 0/0, distinct from 0. A class absent from both truth and
/// predictions has all four cells undefined.
struct ClassMetrics {
    std::optional<double> precision;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> f1;
};

struct MetricsReport {
    double accuracy = 0.0;
    std::optional<double> balanced_accuracy;  // nullopt if any class row is empty
    std::vector<ClassMetrics> per_class;
};

MetricsReport per_class_metrics(const ConfusionMatrix& cm);

/// Misclassification counts aggregated over a two-block class partition.
/// Diagonal (correct) cells are excluded, so the four cells sum to
/// total - trace.
struct BlockTable {
    std::size_t within_first = 0;
    std::size_t first_to_second = 0;
    std::size_t second_to_first = 0;
    std::size_t within_second = 0;
    std::string first_name = "S";
    std::string second_name = "non-S";

    std::size_t total() const {
        return within_first + first_to_second + second_to_first + within_second;
    }
    std::size_t cross() const { return first_to_second + second_to_first; }
};

/// `class_to_block[c]` is 0 or 1 for every class of `cm`.
BlockTable block_misclassification(const ConfusionMatrix& cm,
                                   std::span<const int> class_to_block);

/// A scalar metric of two label vectors; nullopt means undefined on this input.
using MetricFn = std::function<std::optional<double>(std::span<const int> y_true,
                                                     std::span<const int> y_pred)>;

struct BootstrapResult {
    double mean = 0.0;
    double half_width = 0.0;  // 1.96 * sample std of the resampled metric
    std::size_t discarded = 0;
};

/// Seeded nonparametric bootstrap over test samples.
BootstrapResult bootstrap_interval(std::span<const int> y_true,
                                   std::span<const int> y_pred, const MetricFn& metric,
                                   std::size_t n_resamples, std::uint64_t seed);

MetricFn make_accuracy_metric(std::size_t n);
MetricFn make_balanced_accuracy_metric(std::size_t n);

enum class ClassMetricKind { Precision, Sensitivity, Specificity, F1 };
MetricFn make_class_metric(std::size_t n, std::size_t class_id, ClassMetricKind kind);

}  // namespace hharnet::metrics
