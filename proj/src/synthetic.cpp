#include "hharnet/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hharnet/error.hpp"
#include "hharnet/rng.hpp"
#include "gzio.hpp"

namespace hharnet::synth {

namespace {

double next_normal(Rng& rng) {
    const double u1 = 1.0 - rng.next_double();  // (0, 1]
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

BlobData make_gaussian_classes(const SyntheticSpec& spec, std::size_t feature_count,
                               std::size_t n_classes) {
    Rng rng(spec.seed);
    Matrix centers(n_classes, feature_count);
    for (double& v : centers.data()) v = spec.center_scale * next_normal(rng);

    const std::size_t n = spec.samples_per_class * n_classes;
    BlobData data;
    data.x = Matrix(n, feature_count);
    data.labels.resize(n);
    std::size_t row = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
            data.labels[row] = static_cast<int>(k);
            for (std::size_t j = 0; j < feature_count; ++j)
                data.x(row, j) = centers(k, j) + spec.noise_std * next_normal(rng);
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order, rng);
    BlobData shuffled;
    shuffled.x = data.x.select_rows(order);
    shuffled.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) shuffled.labels[i] = data.labels[order[i]];
    return shuffled;
}

std::string write_dataset(const SyntheticSpec& spec, const LabelConfig& config,
                          const std::string& dir) {
    config.validate();
    if (spec.users == 0) throw ConfigError("synth: need at least one user file");
    std::filesystem::create_directories(dir);

    const std::size_t n_classes = config.leaf_count();
    BlobData data = make_gaussian_classes(spec, config.feature_count, n_classes);
    Rng rng(derive_seed(spec.seed, 1));  // corruption / junk-row stream

    const std::size_t n = data.labels.size();
    const auto n_nolabel =
        static_cast<std::size_t>(std::llround(spec.no_label_rate * static_cast<double>(n)));
    const auto n_conflict =
        static_cast<std::size_t>(std::llround(spec.conflict_rate * static_cast<double>(n)));

    // Row plan: -1 = junk row without a relevant target, -2 = conflict row,
    // otherwise an index into the labeled data.
    std::vector<long long> plan;
    plan.reserve(n + n_nolabel + n_conflict);
    for (std::size_t i = 0; i < n; ++i) plan.push_back(static_cast<long long>(i));
    for (std::size_t i = 0; i < n_nolabel; ++i) plan.push_back(-1);
    for (std::size_t i = 0; i < n_conflict; ++i) plan.push_back(-2);
    shuffle(plan, rng);

    std::string header = "timestamp";
    for (std::size_t j = 0; j < config.feature_count; ++j)
        header += ",f" + std::to_string(j);
    for (const auto& leaf : config.leaf_labels) header += "," + leaf.source_column;
    header += ",label_source\n";

    const std::size_t per_user = (plan.size() + spec.users - 1) / spec.users;
    std::vector<std::string> file_names;
    std::size_t cursor = 0;
    long long timestamp = 1444000000;
    std::vector<double> junk_features(config.feature_count);

    for (std::size_t u = 0; u < spec.users; ++u) {
        const std::string name = "user" + std::to_string(u) + ".features_labels.csv.gz";
        file_names.push_back(name);
        internal::GzWriter writer((std::filesystem::path(dir) / name).string());
        writer.write(header);
        std::string line;
        for (std::size_t r = 0; r < per_user && cursor < plan.size(); ++r, ++cursor) {
            const long long what = plan[cursor];
            line = std::to_string(timestamp);
            timestamp += 60;

            const double* features = nullptr;
            if (what >= 0) {
                features = data.x.row(static_cast<std::size_t>(what)).data();
            } else {
                // junk rows copy a random labeled row's features so they look real
                const std::size_t donor = rng.next_below(n);
                auto src = data.x.row(donor);
                std::copy(src.begin(), src.end(), junk_features.begin());
                features = junk_features.data();
            }
            for (std::size_t j = 0; j < config.feature_count; ++j) {
                line += ',';
                if (rng.next_double() < spec.missing_feature_rate) continue;  // empty cell
                line += format_value(features[j]);
            }

            if (what >= 0) {
                const int leaf = data.labels[static_cast<std::size_t>(what)];
                for (std::size_t t = 0; t < n_classes; ++t) {
                    line += ',';
                    if (static_cast<int>(t) == leaf) {
                        line += "1.0";
                    } else if (rng.next_double() < 0.02) {
                        // occasionally unreported rather than explicitly 0
                    } else {
                        line += "0.0";
                    }
                }
            } else if (what == -1) {
                for (std::size_t t = 0; t < n_classes; ++t) {
                    line += ',';
                    if (rng.next_double() < 0.5) line += "0.0";
                }
            } else {
                const std::size_t first = rng.next_below(n_classes);
                std::size_t second = rng.next_below(n_classes - 1);
                if (second >= first) ++second;
                for (std::size_t t = 0; t < n_classes; ++t) {
                    line += ',';
                    line += (t == first || t == second) ? "1.0" : "0.0";
                }
            }
            line += ",synthetic\n";
            writer.write(line);
        }
        writer.close();
    }

    const std::string manifest_path =
        (std::filesystem::path(dir) / "manifest.txt").string();
    std::ofstream manifest(manifest_path, std::ios::binary);
    if (!manifest) throw IoError("cannot write '" + manifest_path + "'");
    manifest << "# synthetic mini-dataset, " << plan.size() << " rows over "
             << spec.users << " user files\n";
    for (const auto& name : file_names) manifest << name << '\n';
    return manifest_path;
}

}  // namespace hharnet::synth
