#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hharnet/commands.hpp"
#include "hharnet/error.hpp"
#include "hharnet/run_config.hpp"

namespace {

hharnet::RunConfig load_config(const std::string& config_path, const std::string& out) {
    hharnet::RunConfig config = config_path.empty()
                                    ? hharnet::RunConfig::defaults()
                                    : hharnet::RunConfig::load(config_path);
    if (!out.empty()) config.output_dir = out;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hharnet: hierarchical (stationary / non-stationary) activity "
                 "recognition over ExtraSensory-style featurized sensor data"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    app.add_option("--config", config_path, "run configuration file (key = value)")
        ->envname("HHARNET_CONFIG");
    app.add_option("--out", out_dir, "output directory (overrides the config)");

    auto* synth = app.add_subcommand("synth", "generate the synthetic mini-dataset");
    auto* prepare = app.add_subcommand("prepare", "ingest, clean, split, standardize");
    auto* train = app.add_subcommand("train", "train one model on prepared artifacts");
    std::string model_name;
    train->add_option("model", model_name, "dt | knn | rf | mlp64 | flat | hhar")
        ->required();
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a persisted model");
    std::string model_file;
    evaluate->add_option("model-file", model_file, "path to a .model file")->required();
    auto* compare = app.add_subcommand("compare", "benchmark table over all models");
    auto* gridsearch =
        app.add_subcommand("gridsearch", "architecture search for the flat model");

    CLI11_PARSE(app, argc, argv);

    try {
        const hharnet::RunConfig config = load_config(config_path, out_dir);
        if (synth->parsed())
            hharnet::cli::cmd_synth(config);
        else if (prepare->parsed())
            hharnet::cli::cmd_prepare(config);
        else if (train->parsed())
            hharnet::cli::cmd_train(config, model_name);
        else if (evaluate->parsed())
            hharnet::cli::cmd_evaluate(config, model_file);
        else if (compare->parsed())
            hharnet::cli::cmd_compare(config);
        else if (gridsearch->parsed())
            hharnet::cli::cmd_gridsearch(config);
    } catch (const hharnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
