#include <doctest.h>

#include <filesystem>

#include "hharnet/commands.hpp"
#include "hharnet/model_io.hpp"
#include "hharnet/run_config.hpp"
#include "hharnet/synthetic.hpp"
#include "test_util.hpp"

using namespace hharnet;
namespace fs = std::filesystem;

TEST_CASE("run config parsing") {
    SUBCASE("defaults match the published setup") {
        const auto config = RunConfig::defaults();
        CHECK(config.flat.hidden_dims == std::vector<std::size_t>{256, 512, 128});
        CHECK(config.root.hidden_dims == std::vector<std::size_t>{256, 512, 128});
        CHECK(config.mlp64.hidden_dims == std::vector<std::size_t>{64});
        CHECK(config.knn_k == 10);
        CHECK(config.tree_max_depth == 20);
        CHECK(config.forest.n_trees == 10);
        CHECK(config.forest.max_depth == 10);
        CHECK(config.labels.feature_count == 225);
        CHECK(config.split.train_fraction == 0.80);
        CHECK(config.split.val_fraction_of_train == 0.05);
        CHECK(config.labels.leaf_labels[2].source_column == "label:OR_standing");
    }

    SUBCASE("overrides and comments") {
        const auto config = RunConfig::from_text(
            "# comment\n"
            "seed = 7\n"
            "manifest = /data/manifest.txt\n"
            "flat.hidden_dims = 64, 32\n"
            "flat.optimizer = sgd\n"
            "knn.k = 3\n"
            "labels.leaf2 = standing | label:CUSTOM_standing\n"
            "standardize = false\n");
        CHECK(config.master_seed == 7);
        CHECK(config.manifest == "/data/manifest.txt");
        CHECK(config.flat.hidden_dims == std::vector<std::size_t>{64, 32});
        CHECK(config.flat.optimizer == nn::Optimizer::Sgd);
        CHECK(config.knn_k == 3);
        CHECK(config.labels.leaf_labels[2].display_name == "standing");
        CHECK(config.labels.leaf_labels[2].source_column == "label:CUSTOM_standing");
        CHECK_FALSE(config.standardize);
    }

    SUBCASE("seeds derive from the master seed per component") {
        const auto a = RunConfig::from_text("seed = 1\n");
        const auto b = RunConfig::from_text("seed = 2\n");
        CHECK(a.flat.seed != a.root.seed);
        CHECK(a.children[0].seed != a.children[1].seed);
        CHECK(a.flat.seed != b.flat.seed);
        CHECK(a.split.seed == derive_seed(1, seed_tag::kSplit));
    }

    SUBCASE("errors") {
        CHECK_THROWS_WITH_AS(RunConfig::from_text("nonsense.key = 1\n"),
                             doctest::Contains("nonsense.key"), ConfigError);
        CHECK_THROWS_AS(RunConfig::from_text("seed = 1\nseed = 2\n"), ConfigError);
        CHECK_THROWS_AS(RunConfig::from_text("knn.k = soon\n"), ConfigError);
        CHECK_THROWS_AS(RunConfig::from_text("flat.optimizer = newton\n"), ConfigError);
        CHECK_THROWS_AS(RunConfig::from_text("just a line\n"), ConfigError);
    }

    SUBCASE("config hash tracks the text") {
        const auto a = RunConfig::from_text("seed = 1\n");
        const auto b = RunConfig::from_text("seed = 1\n");
        const auto c = RunConfig::from_text("seed = 2\n");
        CHECK(a.config_hash == b.config_hash);
        CHECK(a.config_hash != c.config_hash);
    }
}

namespace {

// tiny synthetic run that keeps CLI tests fast
RunConfig tiny_config(const testutil::TempDir& dir, const std::string& out_name) {
    RunConfig config = RunConfig::from_text(
        "seed = 5\n"
        "synth.samples_per_class = 40\n"
        "synth.users = 2\n"
        "flat.hidden_dims = 16\n"
        "flat.max_epochs = 6\n"
        "flat.patience = 2\n"
        "flat.batch_size = 32\n"
        "root.hidden_dims = 16\n"
        "root.max_epochs = 6\n"
        "root.patience = 2\n"
        "root.batch_size = 32\n"
        "child0.hidden_dims = 16\n"
        "child0.max_epochs = 6\n"
        "child0.batch_size = 32\n"
        "child1.hidden_dims = 16\n"
        "child1.max_epochs = 6\n"
        "child1.batch_size = 32\n"
        "mlp64.hidden_dims = 16\n"
        "mlp64.max_epochs = 6\n"
        "mlp64.batch_size = 32\n"
        "knn.k = 5\n"
        "tree.max_depth = 12\n"
        "forest.n_trees = 4\n"
        "forest.max_depth = 8\n"
        "bootstrap.resamples = 150\n");
    config.output_dir = dir.file(out_name);
    config.manifest = (fs::path(config.output_dir) / "data" / "manifest.txt").string();
    return config;
}

}  // namespace

TEST_CASE("cli pipeline end to end on the synthetic mini-dataset") {
    testutil::TempDir dir("cli");
    RunConfig config = tiny_config(dir, "out");

    cli::cmd_synth(config);
    REQUIRE(fs::exists(config.manifest));
    cli::cmd_prepare(config);
    for (const char* name : {"train.kv", "val.kv", "test.kv", "preprocessor.kv",
                             "prepare.summary.txt"})
        CHECK(fs::exists(fs::path(config.output_dir) / name));

    for (const auto& model : cli::model_names()) cli::cmd_train(config, model);
    for (const auto& model : cli::model_names())
        CHECK(fs::exists(fs::path(config.output_dir) / (model + ".model")));
    CHECK(fs::exists(fs::path(config.output_dir) / "hhar_root.model"));
    CHECK(fs::exists(fs::path(config.output_dir) / "hhar_stationary.model"));
    CHECK(fs::exists(fs::path(config.output_dir) / "hhar_non-stationary.model"));

    cli::cmd_evaluate(config, (fs::path(config.output_dir) / "hhar.model").string());
    cli::cmd_evaluate(config, (fs::path(config.output_dir) / "flat.model").string());
    const auto eval =
        KvDocument::load((fs::path(config.output_dir) / "hhar.eval.kv").string());
    CHECK(eval.get_string("model_kind") == "lcpn");
    CHECK(eval.get_f64("accuracy") >= 0.95);
    CHECK(eval.get_f64("level0_accuracy") >= 0.95);
    CHECK(eval.has("class0.precision"));
    CHECK(eval.get_u64("block.total") ==
          eval.get_u64("block.within_first") + eval.get_u64("block.first_to_second") +
              eval.get_u64("block.second_to_first") +
              eval.get_u64("block.within_second"));

    cli::cmd_compare(config);
    const auto compare =
        KvDocument::load((fs::path(config.output_dir) / "compare.kv").string());
    CHECK(compare.get_u64("rows") == 7);
    CHECK(compare.get_string("row2.status") == "out of scope");  // SVM row
    CHECK(compare.get_f64("row6.published_accuracy") == 92.8);
    for (const std::size_t row : {0, 1, 3, 4, 5, 6})
        CHECK(compare.get_string("row" + std::to_string(row) + ".status") == "ok");
}

TEST_CASE("cli error paths") {
    testutil::TempDir dir("cli_err");
    RunConfig config = tiny_config(dir, "out");

    SUBCASE("missing manifest") {
        config.manifest = dir.file("does_not_exist.txt");
        CHECK_THROWS_AS(cli::cmd_prepare(config), IoError);
    }

    SUBCASE("empty manifest") {
        config.manifest = dir.file("empty.txt");
        testutil::write_file(config.manifest, "# no files\n");
        CHECK_THROWS_WITH_AS(cli::cmd_prepare(config),
                             doctest::Contains("no input files"), Error);
    }

    SUBCASE("unknown model name lists the valid ones") {
        CHECK_THROWS_WITH_AS(cli::cmd_train(config, "svm"), doctest::Contains("hhar"),
                             ConfigError);
    }

    SUBCASE("training before preparing is instructive") {
        CHECK_THROWS_WITH_AS(cli::cmd_train(config, "flat"),
                             doctest::Contains("prepare"), IoError);
    }

    SUBCASE("evaluating a node model file points at the combined model") {
        cli::cmd_synth(config);
        cli::cmd_prepare(config);
        cli::cmd_train(config, "hhar");
        CHECK_THROWS_WITH_AS(
            cli::cmd_evaluate(
                config, (fs::path(config.output_dir) / "hhar_root.model").string()),
            doctest::Contains("combined"), SchemaError);
    }

    SUBCASE("compare reports missing models and still writes the table") {
        cli::cmd_synth(config);
        cli::cmd_prepare(config);
        cli::cmd_train(config, "dt");
        cli::cmd_compare(config);
        const auto compare =
            KvDocument::load((fs::path(config.output_dir) / "compare.kv").string());
        CHECK(compare.get_string("row0.status") == "ok");
        CHECK(compare.get_string("row5.status").find("missing") != std::string::npos);
        CHECK(fs::exists(fs::path(config.output_dir) / "compare.txt"));
    }
}

TEST_CASE("gridsearch ranks the uniform-width grid deterministically") {
    testutil::TempDir dir("grid");
    RunConfig config = tiny_config(dir, "out");
    // smaller synthetic set and epochs keep the 8 runs quick
    config.synth.samples_per_class = 25;
    config.flat.max_epochs = 2;
    config.flat.patience = 1;
    cli::cmd_synth(config);
    cli::cmd_prepare(config);

    cli::cmd_gridsearch(config);
    const auto report =
        KvDocument::load((fs::path(config.output_dir) / "gridsearch.kv").string());
    CHECK(report.get_u64("runs") == 8);  // layer counts {2,3} x widths {64..512}
    double previous = 2.0;
    for (std::size_t r = 0; r < 8; ++r) {
        const double acc =
            report.get_f64("rank" + std::to_string(r) + ".val_accuracy");
        CHECK(acc <= previous);
        previous = acc;
    }
    const std::string text = testutil::read_file(
        (fs::path(config.output_dir) / "gridsearch.txt").string());

    cli::cmd_gridsearch(config);
    CHECK(testutil::read_file((fs::path(config.output_dir) / "gridsearch.txt").string()) ==
          text);
}

TEST_CASE("reruns with an identical config hash are byte-identical") {
    testutil::TempDir dir("determinism");
    RunConfig config_a = tiny_config(dir, "out_a");
    RunConfig config_b = tiny_config(dir, "out_b");
    // share one dataset: point b's manifest at a's synthetic data
    cli::cmd_synth(config_a);
    config_b.manifest = config_a.manifest;
    config_a.config_hash = config_b.config_hash;

    for (auto* config : {&config_a, &config_b}) {
        cli::cmd_prepare(*config);
        cli::cmd_train(*config, "flat");
        cli::cmd_train(*config, "dt");
        cli::cmd_evaluate(*config,
                          (fs::path(config->output_dir) / "flat.model").string());
    }
    for (const char* name : {"train.kv", "test.kv", "preprocessor.kv", "flat.model",
                             "dt.model", "flat.train_report.kv", "flat.eval.kv"}) {
        CHECK(testutil::read_file((fs::path(config_a.output_dir) / name).string()) ==
              testutil::read_file((fs::path(config_b.output_dir) / name).string()));
    }
}

TEST_CASE("synthetic generator is separable and deterministic") {
    SyntheticSpec spec;
    spec.samples_per_class = 30;
    spec.seed = 3;
    const auto a = synth::make_gaussian_classes(spec, 12);
    const auto b = synth::make_gaussian_classes(spec, 12);
    CHECK(a.x == b.x);
    CHECK(a.labels == b.labels);
    CHECK(a.x.rows() == 180);
    // labels arrive shuffled, not grouped by class
    bool mixed = false;
    for (std::size_t i = 1; i < a.labels.size(); ++i) {
        if (a.labels[i] != a.labels[0]) mixed = true;
    }
    CHECK(mixed);
}
