#include "hharnet/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hharnet/error.hpp"
#include "hharnet/rng.hpp"
#include "gzio.hpp"

namespace hharnet::ingest {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

}  // namespace

void Preprocessor::apply_row(std::vector<double>& row) const {
    if (row.size() != impute_means.size())
        throw DimensionError("preprocessor: row has " + std::to_string(row.size()) +
                             " features, expected " + std::to_string(impute_means.size()));
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (std::isnan(row[j])) row[j] = impute_means[j];
        if (standardize) row[j] = (row[j] - feature_means[j]) / feature_stds[j];
    }
}

void Preprocessor::apply(Matrix& x) const {
    if (x.cols() != impute_means.size())
        throw DimensionError("preprocessor: matrix has " + std::to_string(x.cols()) +
                             " columns, expected " + std::to_string(impute_means.size()));
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double& v = x(i, j);
            if (std::isnan(v)) v = impute_means[j];
            if (standardize) v = (v - feature_means[j]) / feature_stds[j];
        }
    }
}

std::vector<RawRow> load_user_file(const std::string& path, const LabelConfig& config) {
    config.validate();
    internal::GzLineReader reader(path);

    std::string line;
    if (!reader.next_line(line)) throw SchemaError("'" + path + "': empty file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "timestamp")
        throw SchemaError("'" + path + "': first column must be 'timestamp'");

    // Feature columns: everything after the timestamp that is not a label
    // column and not the label provenance column.
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name.rfind("label:", 0) == 0 || name == "label_source") continue;
        feature_cols.push_back(c);
    }
    if (feature_cols.size() != config.feature_count)
        throw SchemaError("'" + path + "': expected " +
                          std::to_string(config.feature_count) + " feature columns, found " +
                          std::to_string(feature_cols.size()));

    std::vector<std::size_t> label_cols(config.leaf_count());
    for (std::size_t t = 0; t < config.leaf_count(); ++t) {
        const std::string& wanted = config.leaf_labels[t].source_column;
        auto it = std::find(header.begin(), header.end(), wanted);
        if (it == header.end())
            throw SchemaError("'" + path + "': missing label column '" + wanted + "'");
        label_cols[t] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<RawRow> rows;
    std::size_t lineno = 1;
    while (reader.next_line(line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("'" + path + "' line " + std::to_string(lineno) + ": has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(header.size()));

        RawRow row;
        double ts = 0.0;
        if (!parse_double(cells[0], ts))
            throw ParseError("'" + path + "' line " + std::to_string(lineno) +
                             ": bad timestamp '" + cells[0] + "'");
        row.timestamp = static_cast<long long>(ts);

        row.features.resize(config.feature_count);
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string& cell = cells[feature_cols[f]];
            if (cell.empty()) {
                row.features[f] = std::nan("");
                continue;
            }
            double v = 0.0;
            if (!parse_double(cell, v))
                throw ParseError("'" + path + "' line " + std::to_string(lineno) +
                                 ": bad numeric cell '" + cell + "' in column '" +
                                 header[feature_cols[f]] + "'");
            row.features[f] = v;  // a literal "nan" cell parses to NaN == missing
        }

        row.label_flags.resize(config.leaf_count());
        for (std::size_t t = 0; t < label_cols.size(); ++t) {
            const std::string& cell = cells[label_cols[t]];
            if (cell.empty()) {
                row.label_flags[t] = LabelFlag::kMissing;
                continue;
            }
            double v = 0.0;
            if (!parse_double(cell, v) || (v != 0.0 && v != 1.0))
                throw ParseError("'" + path + "' line " + std::to_string(lineno) +
                                 ": label cell '" + cell + "' is not 0, 1, or empty");
            row.label_flags[t] = v == 1.0 ? LabelFlag::kRelevant : LabelFlag::kNotRelevant;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

FilterResult filter_target_samples(const std::vector<RawRow>& rows,
                                   const LabelConfig& config) {
    FilterResult result;
    result.features = Matrix(0, config.feature_count);
    for (const RawRow& row : rows) {
        int relevant = -1;
        int relevant_count = 0;
        for (std::size_t t = 0; t < row.label_flags.size(); ++t) {
            if (row.label_flags[t] == LabelFlag::kRelevant) {
                ++relevant_count;
                relevant = static_cast<int>(t);
            }
        }
        if (relevant_count == 0) {
            ++result.dropped_no_target;
        } else if (relevant_count > 1) {
            ++result.dropped_conflict;
        } else {
            result.features.append_row(row.features);
            result.leaf_labels.push_back(relevant);
        }
    }
    return result;
}

std::vector<double> impute_means(Matrix& train, const std::vector<Matrix*>& others) {
    const std::size_t d = train.cols();
    std::vector<double> means(d, 0.0);
    std::vector<std::size_t> observed(d, 0);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = train(i, j);
            if (!std::isnan(v)) {
                means[j] += v;
                ++observed[j];
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (observed[j] == 0)
            throw Error("impute_means: feature column " + std::to_string(j) +
                        " has no observed values in the training split");
        means[j] /= static_cast<double>(observed[j]);
    }
    auto fill = [&](Matrix& m) {
        if (m.cols() != d)
            throw DimensionError("impute_means: matrix column count mismatch");
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                if (std::isnan(m(i, j))) m(i, j) = means[j];
            }
        }
    };
    fill(train);
    for (Matrix* m : others) fill(*m);
    return means;
}

void fit_standardizer(const Matrix& train, std::vector<double>& means,
                      std::vector<double>& stds) {
    const std::size_t n = train.rows(), d = train.cols();
    if (n == 0) throw Error("fit_standardizer: empty training matrix");
    means.assign(d, 0.0);
    stds.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) means[j] += train(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) means[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = train(i, j) - means[j];
            stds[j] += delta * delta;
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        stds[j] = std::max(std::sqrt(stds[j] / static_cast<double>(n)),
                           Preprocessor::kStdFloor);
}

void derive_parent_labels(Dataset& dataset, const LabelConfig& config) {
    config.validate();
    dataset.parent_labels.resize(dataset.leaf_labels.size());
    for (std::size_t i = 0; i < dataset.leaf_labels.size(); ++i)
        dataset.parent_labels[i] = config.parent_of(dataset.leaf_labels[i]);
}

namespace {

Dataset take_rows(const Dataset& src, std::span<const std::size_t> indices) {
    Dataset out;
    out.x = src.x.select_rows(indices);
    out.leaf_labels.reserve(indices.size());
    for (std::size_t i : indices) out.leaf_labels.push_back(src.leaf_labels[i]);
    if (!src.parent_labels.empty()) {
        out.parent_labels.reserve(indices.size());
        for (std::size_t i : indices) out.parent_labels.push_back(src.parent_labels[i]);
    }
    return out;
}

}  // namespace

Splits split_dataset(const Dataset& dataset, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("split: train_fraction must be in (0, 1)");
    if (!(spec.val_fraction_of_train > 0.0 && spec.val_fraction_of_train < 1.0))
        throw ConfigError("split: val_fraction_of_train must be in (0, 1)");
    const std::size_t n = dataset.size();
    if (n < 10) throw ConfigError("split: need at least 10 samples, got " +
                                  std::to_string(n));
    if (dataset.x.rows() != n)
        throw DimensionError("split: feature/label count mismatch");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(spec.seed);
    shuffle(order, rng);

    const auto n_train_total = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * spec.train_fraction));
    const auto n_val = static_cast<std::size_t>(std::llround(
        static_cast<double>(n_train_total) * spec.val_fraction_of_train));
    if (n_train_total == 0 || n_train_total >= n)
        throw ConfigError("split: degenerate train fraction for " + std::to_string(n) +
                          " samples");

    std::span<const std::size_t> all(order);
    Splits splits;
    splits.train = take_rows(dataset, all.subspan(0, n_train_total - n_val));
    splits.val = take_rows(dataset, all.subspan(n_train_total - n_val, n_val));
    splits.test = take_rows(dataset, all.subspan(n_train_total, n - n_train_total));
    return splits;
}

std::vector<std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::vector<std::string> files;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::filesystem::path p(line);
        if (p.is_relative()) p = base / p;
        files.push_back(p.string());
    }
    return files;
}

}  // namespace hharnet::ingest
