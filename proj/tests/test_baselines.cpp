#include <doctest.h>

#include <algorithm>

#include "hharnet/baselines.hpp"
#include "hharnet/rng.hpp"

using namespace hharnet;
using namespace hharnet::baselines;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    return m;
}

double train_accuracy(const TreeModel& model, const Matrix& x,
                      const std::vector<int>& y) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (tree_predict(model, x.row(i)) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("knn prediction") {
    KnnModel model;
    model.train_x = from_rows({{0.0}, {1.0}, {2.0}, {10.0}, {11.0}});
    model.train_y = {2, 2, 5, 1, 1};
    model.n_classes = 6;

    SUBCASE("k=1 on an exact training point returns its label") {
        model.k = 1;
        CHECK(knn_predict(model, std::vector<double>{10.0}) == 1);
        CHECK(knn_predict(model, std::vector<double>{0.0}) == 2);
    }

    SUBCASE("k=3 majority vote") {
        model.k = 3;
        // neighbors of 0.9: labels {2, 2, 5} -> 2
        CHECK(knn_predict(model, std::vector<double>{0.9}) == 2);
    }

    SUBCASE("k equal to the training size predicts the global majority") {
        model.k = model.train_y.size();
        Rng rng(2);
        for (int i = 0; i < 10; ++i) {
            const std::vector<double> q = {rng.next_uniform(-100.0, 100.0)};
            CHECK(knn_predict(model, q) == 2);  // 2 appears twice, ties go low
        }
    }

    SUBCASE("vote ties break toward the lowest class id") {
        model.k = 4;
        // labels {2,2,1,1} among the 4 nearest of 5.0... distances decide
        KnnModel tie;
        tie.train_x = from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
        tie.train_y = {3, 3, 1, 1};
        tie.n_classes = 6;
        tie.k = 4;
        CHECK(knn_predict(tie, std::vector<double>{1.5}) == 1);
    }

    SUBCASE("distance ties break toward the lower training index") {
        KnnModel tie;
        tie.train_x = from_rows({{-1.0}, {1.0}, {3.0}});
        tie.train_y = {4, 0, 4};
        tie.n_classes = 6;
        tie.k = 1;
        // query 0 is equidistant from rows 0 and 1; row 0 wins
        CHECK(knn_predict(tie, std::vector<double>{0.0}) == 4);
    }

    SUBCASE("validation") {
        model.k = 0;
        CHECK_THROWS_AS(knn_predict(model, std::vector<double>{0.0}), ConfigError);
        model.k = 99;
        CHECK_THROWS_AS(knn_predict(model, std::vector<double>{0.0}), ConfigError);
        model.k = 2;
        CHECK_THROWS_AS(knn_predict(model, std::vector<double>{0.0, 1.0}),
                        DimensionError);
    }

    SUBCASE("batch prediction matches the scalar path across thread counts") {
        model.k = 3;
        Rng rng(8);
        Matrix queries(23, 1);
        for (double& v : queries.data()) v = rng.next_uniform(-5.0, 15.0);
        const auto serial = knn_predict_batch(model, queries, 1);
        const auto parallel = knn_predict_batch(model, queries, 4);
        CHECK(serial == parallel);
        for (std::size_t i = 0; i < queries.rows(); ++i)
            CHECK(serial[i] == knn_predict(model, queries.row(i)));
    }
}

TEST_CASE("decision tree") {
    SUBCASE("single-class data gives a single leaf") {
        const Matrix x = from_rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
        const std::vector<int> y = {3, 3, 3};
        const auto model = tree_fit(x, y, 6, 20);
        REQUIRE(model.nodes.size() == 1);
        CHECK(model.nodes[0].is_leaf);
        CHECK(model.nodes[0].leaf_class == 3);
    }

    SUBCASE("one threshold separates 1-D two-class data at depth 1") {
        const Matrix x = from_rows({{-2.0}, {-1.0}, {-0.5}, {0.0}, {0.5}, {1.0}});
        const std::vector<int> y = {0, 0, 0, 1, 1, 1};
        const auto model = tree_fit(x, y, 2, 20);
        REQUIRE(model.nodes.size() == 3);  // root split + two leaves
        CHECK_FALSE(model.nodes[0].is_leaf);
        CHECK(train_accuracy(model, x, y) == 1.0);
        // x = 0 was labeled class 1 and must stay class 1
        CHECK(tree_predict(model, std::vector<double>{0.0}) == 1);
        CHECK(tree_predict(model, std::vector<double>{-100.0}) == 0);
    }

    SUBCASE("max_depth 0 yields a majority-class stump") {
        const Matrix x = from_rows({{0.0}, {1.0}, {2.0}});
        const std::vector<int> y = {1, 1, 0};
        const auto model = tree_fit(x, y, 2, 0);
        REQUIRE(model.nodes.size() == 1);
        CHECK(model.nodes[0].leaf_class == 1);
        CHECK(model.nodes[0].class_counts == std::vector<std::size_t>{1, 2});
    }

    SUBCASE("training accuracy is non-decreasing in max_depth") {
        Rng rng(77);
        Matrix x(120, 3);
        std::vector<int> y(120);
        for (std::size_t i = 0; i < 120; ++i) {
            for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.next_uniform(-1, 1);
            y[i] = static_cast<int>(rng.next_below(3));
        }
        double previous = 0.0;
        for (std::size_t depth = 0; depth <= 8; ++depth) {
            const auto model = tree_fit(x, y, 3, depth);
            const double acc = train_accuracy(model, x, y);
            CHECK(acc >= previous);
            previous = acc;
        }
    }
}

TEST_CASE("random forest") {
    Rng rng(15);
    Matrix x(90, 4);
    std::vector<int> y(90);
    for (std::size_t i = 0; i < 90; ++i) {
        y[i] = static_cast<int>(i % 3);
        for (std::size_t j = 0; j < 4; ++j)
            x(i, j) = static_cast<double>(y[i]) * 2.0 + rng.next_uniform(-0.5, 0.5);
    }

    SUBCASE("degenerate forest equals the plain tree") {
        ForestConfig config;
        config.n_trees = 1;
        config.bootstrap = false;
        config.mtry = x.cols();  // full feature set, no subsampling
        config.max_depth = 10;
        const auto forest = forest_fit(x, y, 3, config);
        const auto tree = tree_fit(x, y, 3, 10);
        CHECK(forest.trees[0] == tree);
    }

    SUBCASE("deterministic under a fixed seed, sensitive to it") {
        ForestConfig config;
        config.n_trees = 5;
        config.max_depth = 6;
        config.seed = 4;
        const auto a = forest_fit(x, y, 3, config);
        const auto b = forest_fit(x, y, 3, config);
        REQUIRE(a.trees.size() == b.trees.size());
        for (std::size_t t = 0; t < a.trees.size(); ++t) CHECK(a.trees[t] == b.trees[t]);

        config.seed = 5;
        const auto c = forest_fit(x, y, 3, config);
        bool any_different = false;
        for (std::size_t t = 0; t < a.trees.size(); ++t) {
            if (!(a.trees[t] == c.trees[t])) any_different = true;
        }
        CHECK(any_different);
    }

    SUBCASE("separable data is classified correctly") {
        ForestConfig config;
        config.n_trees = 10;
        config.max_depth = 10;
        config.seed = 9;
        const auto forest = forest_fit(x, y, 3, config);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (forest_predict(forest, x.row(i)) == y[i]) ++correct;
        }
        CHECK(correct == x.rows());
        CHECK(forest.config.mtry == 2);  // ceil(sqrt(4))
    }
}
