#include "hharnet/metrics.hpp"

#include <cmath>
#include <numeric>

#include "hharnet/rng.hpp"

namespace hharnet::metrics {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) t += at(i, i);
    return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < n; ++j) s += at(i, j);
    return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t j) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += at(i, j);
    return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::size_t n) {
    if (y_true.size() != y_pred.size())
        throw DimensionError("confusion: label vectors differ in length (" +
                             std::to_string(y_true.size()) + " vs " +
                             std::to_string(y_pred.size()) + ")");
    ConfusionMatrix cm(n);
    for (std::size_t t = 0; t < y_true.size(); ++t) {
        int a = y_true[t];
        int p = y_pred[t];
        if (a < 0 || static_cast<std::size_t>(a) >= n)
            throw Error("confusion: true label " + std::to_string(a) +
                        " out of range at index " + std::to_string(t));
        if (p < 0 || static_cast<std::size_t>(p) >= n)
            throw Error("confusion: predicted label " + std::to_string(p) +
                        " out of range at index " + std::to_string(t));
        ++cm.at(static_cast<std::size_t>(a), static_cast<std::size_t>(p));
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    std::size_t total = cm.total();
    if (total == 0) throw Error("accuracy: empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    if (cm.n == 0 || cm.total() == 0)
        throw Error("balanced_accuracy: empty confusion matrix");
    double sum = 0.0;
    for (std::size_t i = 0; i < cm.n; ++i) {
        std::size_t row = cm.row_sum(i);
        if (row == 0)
            throw Error("balanced_accuracy: class " + std::to_string(i) +
                        " has no true samples");
        sum += static_cast<double>(cm.at(i, i)) / static_cast<double>(row);
    }
    return sum / static_cast<double>(cm.n);
}

MetricsReport per_class_metrics(const ConfusionMatrix& cm) {
    std::size_t total = cm.total();
    if (total == 0) throw Error("per_class_metrics: empty confusion matrix");

    MetricsReport report;
    report.accuracy = accuracy(cm);
    report.per_class.resize(cm.n);

    bool all_sensitivities_defined = true;
    double sensitivity_sum = 0.0;

    for (std::size_t i = 0; i < cm.n; ++i) {
        const std::size_t tp = cm.at(i, i);
        const std::size_t fp = cm.col_sum(i) - tp;
        const std::size_t fn = cm.row_sum(i) - tp;
        const std::size_t tn = total - tp - fp - fn;

        ClassMetrics& m = report.per_class[i];
        if (tp + fp + fn == 0) {
            // class absent from truth and predictions: every cell undefined,
            // including specificity (a bare TN/total would be misleading)
            all_sensitivities_defined = false;
            continue;
        }
        if (tp + fp > 0)
            m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        if (tp + fn > 0)
            m.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
        if (tn + fp > 0)
            m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
        if (m.precision && m.sensitivity && (*m.precision + *m.sensitivity) > 0.0)
            m.f1 = 2.0 * *m.precision * *m.sensitivity / (*m.precision + *m.sensitivity);

        if (m.sensitivity)
            sensitivity_sum += *m.sensitivity;
        else
            all_sensitivities_defined = false;
    }
    if (all_sensitivities_defined)
        report.balanced_accuracy = sensitivity_sum / static_cast<double>(cm.n);
    return report;
}

BlockTable block_misclassification(const ConfusionMatrix& cm,
                                   std::span<const int> class_to_block) {
    if (class_to_block.size() != cm.n)
        throw Error("block_misclassification: partition covers " +
                    std::to_string(class_to_block.size()) + " classes, matrix has " +
                    std::to_string(cm.n));
    for (int b : class_to_block) {
        if (b != 0 && b != 1)
            throw Error("block_misclassification: partition values must be 0 or 1");
    }
    BlockTable table;
    for (std::size_t i = 0; i < cm.n; ++i) {
        for (std::size_t j = 0; j < cm.n; ++j) {
            if (i == j) continue;
            std::size_t c = cm.at(i, j);
            bool from_first = class_to_block[i] == 0;
            bool to_first = class_to_block[j] == 0;
            if (from_first && to_first)
                table.within_first += c;
            else if (from_first && !to_first)
                table.first_to_second += c;
            else if (!from_first && to_first)
                table.second_to_first += c;
            else
                table.within_second += c;
        }
    }
    return table;
}

BootstrapResult bootstrap_interval(std::span<const int> y_true,
                                   std::span<const int> y_pred, const MetricFn& metric,
                                   std::size_t n_resamples, std::uint64_t seed) {
    if (y_true.size() != y_pred.size())
        throw DimensionError("bootstrap_interval: label vectors differ in length");
    if (y_true.empty()) throw Error("bootstrap_interval: empty input");
    if (n_resamples < 100)
        throw ConfigError("bootstrap_interval: need at least 100 resamples, got " +
                          std::to_string(n_resamples));

    const std::size_t m = y_true.size();
    Rng rng(seed);
    std::vector<int> rt(m), rp(m);
    std::vector<double> values;
    values.reserve(n_resamples);
    BootstrapResult result;

    for (std::size_t r = 0; r < n_resamples; ++r) {
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t k = rng.next_below(m);
            rt[i] = y_true[k];
            rp[i] = y_pred[k];
        }
        std::optional<double> v = metric(rt, rp);
        if (v)
            values.push_back(*v);
        else
            ++result.discarded;
    }
    if (values.empty())
        throw Error("bootstrap_interval: metric undefined on every resample");

    double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                  static_cast<double>(values.size());
    double var = 0.0;
    if (values.size() > 1) {
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size() - 1);
    }
    result.mean = mean;
    result.half_width = 1.96 * std::sqrt(var);
    return result;
}

MetricFn make_accuracy_metric(std::size_t n) {
    return [n](std::span<const int> yt, std::span<const int> yp) -> std::optional<double> {
        return accuracy(confusion(yt, yp, n));
    };
}

MetricFn make_balanced_accuracy_metric(std::size_t n) {
    return [n](std::span<const int> yt, std::span<const int> yp) -> std::optional<double> {
        ConfusionMatrix cm = confusion(yt, yp, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (cm.row_sum(i) == 0) return std::nullopt;
        }
        return balanced_accuracy(cm);
    };
}

MetricFn make_class_metric(std::size_t n, std::size_t class_id, ClassMetricKind kind) {
    if (class_id >= n) throw ConfigError("make_class_metric: class id out of range");
    return [n, class_id, kind](std::span<const int> yt,
                               std::span<const int> yp) -> std::optional<double> {
        MetricsReport report = per_class_metrics(confusion(yt, yp, n));
        const ClassMetrics& m = report.per_class[class_id];
        switch (kind) {
            case ClassMetricKind::Precision: return m.precision;
            case ClassMetricKind::Sensitivity: return m.sensitivity;
            case ClassMetricKind::Specificity: return m.specificity;
            case ClassMetricKind::F1: return m.f1;
        }
        return std::nullopt;
    };
}

}  // namespace hharnet::metrics
