#pragma once

#include <string>
#include <vector>

#include "hharnet/labels.hpp"
#include "hharnet/matrix.hpp"
#include "hharnet/run_config.hpp"

namespace hharnet::synth {

struct BlobData {
    Matrix x;
    std::vector<int> labels;
};

/// Six well-separated Gaussian classes (class centers drawn once, then
/// isotropic noise). Deterministic given spec.seed; rows arrive shuffled.
BlobData make_gaussian_classes(const SyntheticSpec& spec, std::size_t feature_count,
                               std::size_t n_classes = 6);

/// Writes the mini-dataset in the per-user file format the loader consumes:
/// gzipped CSV per user (timestamp first, feature columns, `label:` columns,
/// trailing label_source), plus a manifest. Also injects rows the cleaning
/// rules must drop (no relevant target, conflicting targets) and pokes
/// missing feature cells, at the configured rates. Returns the manifest path.
std::string write_dataset(const SyntheticSpec& spec, const LabelConfig& config,
                          const std::string& dir);

}  // namespace hharnet::synth
