#pragma once

#include <string>
#include <vector>

#include "hharnet/run_config.hpp"

namespace hharnet::cli {

/// Model names accepted by `train` (and produced by `compare`).
const std::vector<std::string>& model_names();

/// Generates the bundled synthetic mini-dataset under <output_dir>/data and
/// prints the manifest path.
void cmd_synth(const RunConfig& config);

/// Ingests the manifest, cleans, splits, imputes, standardizes, and writes the
/// prepared train/val/test artifacts plus the preprocessor.
void cmd_prepare(const RunConfig& config);

/// Trains one model on the prepared artifacts and persists it (plus a
/// training report).
void cmd_train(const RunConfig& config, const std::string& model_name);

/// Evaluates a persisted model on the prepared test split; writes the
/// machine-readable report and the plain-text tables.
void cmd_evaluate(const RunConfig& config, const std::string& model_file);

/// Accuracy / balanced-accuracy table over all trained models, published
/// reference numbers alongside.
void cmd_compare(const RunConfig& config);

/// Trains the flat architecture over the layer-count/width grid and ranks by
/// validation accuracy.
void cmd_gridsearch(const RunConfig& config);

}  // namespace hharnet::cli
