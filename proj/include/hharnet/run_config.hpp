#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hharnet/baselines.hpp"
#include "hharnet/ingest.hpp"
#include "hharnet/labels.hpp"
#include "hharnet/nn.hpp"

namespace hharnet {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// Synthetic-dataset knobs (the bundled 6-class Gaussian mini-dataset).
struct SyntheticSpec {
    std::size_t samples_per_class = 1000;
    std::size_t users = 3;  // rows are spread over this many per-user files
    double center_scale = 6.0;
    double noise_std = 1.0;
    double missing_feature_rate = 0.01;
    double no_label_rate = 0.01;   // extra rows with no relevant target
    double conflict_rate = 0.005;  // extra rows with two relevant targets
    std::uint64_t seed = 7;
};

/// Everything a run needs, parsed from a flat `key = value` config file with
/// `#` comments. Unknown keys are rejected. All per-component seeds derive
/// from the single master seed (see rng.hpp seed tags).
struct RunConfig {
    std::string manifest;
    LabelConfig labels = LabelConfig::defaults();
    ingest::SplitSpec split;
    bool standardize = true;
    std::uint64_t master_seed = 42;

    nn::MlpConfig flat;
    nn::MlpConfig root;
    std::vector<nn::MlpConfig> children;  // one per parent group
    nn::MlpConfig mlp64;

    std::size_t knn_k = 10;
    std::size_t knn_threads = 0;  // 0 = hardware concurrency
    std::size_t tree_max_depth = 20;
    baselines::ForestConfig forest;

    std::size_t bootstrap_resamples = 1000;
    bool gridsearch_exhaustive = false;

    SyntheticSpec synth;

    std::string output_dir = "out";
    std::uint64_t config_hash = 0;  // FNV-1a of the config file bytes

    static RunConfig defaults();
    static RunConfig from_text(const std::string& text);
    static RunConfig load(const std::string& path);

    /// Fills every per-component seed from master_seed. Called by the
    /// parsers; call again after changing master_seed programmatically.
    void derive_seeds();
};

}  // namespace hharnet
