#include <catch2/catch.hpp>

#include <sstream>

#include "ganids/forest.hpp"
#include "oracles.hpp"

using namespace ganids;

namespace {

// two well-separated Gaussian blobs, one per class
void separable_blobs(std::size_t n_per, double gap_sigmas, std::uint64_t seed, Matrix& x,
                     std::vector<std::uint32_t>& y) {
    Rng rng(seed);
    x = Matrix(2 * n_per, 3);
    y.resize(2 * n_per);
    for (std::size_t i = 0; i < 2 * n_per; ++i) {
        std::uint32_t cls = i < n_per ? 0 : 1;
        double mu = cls == 0 ? 0.0 : gap_sigmas;
        for (std::size_t c = 0; c < 3; ++c) x(i, c) = mu + rng.normal();
        y[i] = cls;
    }
}

}  // namespace

TEST_CASE("single-class data yields a pure depth-0 leaf") {
    Matrix x(4, 2, 1.0);
    std::vector<std::uint32_t> y{1, 1, 1, 1};
    auto root = fit_tree(x, y, 2, TreeConfig{});
    REQUIRE(root->is_leaf);
    CHECK(root->probs[1] == 1.0);
    CHECK(root->predicted_class() == 1);
}

TEST_CASE("perfectly separable 1-D data splits between the classes") {
    Matrix x(6, 1);
    std::vector<std::uint32_t> y(6);
    for (std::size_t i = 0; i < 6; ++i) {
        x(i, 0) = static_cast<double>(i) * 2.0;  // 0 2 4 6 8 10
        y[i] = x(i, 0) > 5.0 ? 1 : 0;
    }
    auto root = fit_tree(x, y, 2, TreeConfig{});
    REQUIRE_FALSE(root->is_leaf);
    CHECK(root->threshold > 4.0);
    CHECK(root->threshold < 6.0);
    CHECK(root->left->is_leaf);
    CHECK(root->right->is_leaf);
    auto pred = predict(*root, x);
    CHECK(pred == y);
}

TEST_CASE("root split matches exhaustive Gini search on random 6-row problems") {
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix x(6, 3);
        for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
        std::vector<std::uint32_t> y(6);
        bool mixed = false;
        for (auto& l : y) l = static_cast<std::uint32_t>(rng.index(3));
        for (std::size_t i = 1; i < y.size(); ++i) mixed |= y[i] != y[0];
        if (!mixed) continue;

        auto root = fit_tree(x, y, 3, TreeConfig{});
        auto want = oracles::best_split_bruteforce(x, y, 3);
        REQUIRE(want.found);
        REQUIRE_FALSE(root->is_leaf);
        CHECK(root->feature == want.feature);
        CHECK(root->threshold == Approx(want.threshold));
    }
}

TEST_CASE("degenerate forest equals a single tree") {
    Matrix x(40, 4);
    std::vector<std::uint32_t> y(40);
    Rng rng(9);
    for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x(i, 0) + x(i, 2) > 1.0 ? 1 : 0;

    ForestConfig fc;
    fc.n_trees = 1;
    fc.bootstrap = false;
    fc.sqrt_features = false;
    fc.seed = 4;
    Forest f = fit_forest(x, y, 2, fc);
    auto tree = fit_tree(x, y, 2, TreeConfig{});
    CHECK(predict(f, x) == predict(*tree, x));
}

TEST_CASE("forest reaches 0.99 accuracy on 3-sigma separable blobs") {
    Matrix xtr, xte;
    std::vector<std::uint32_t> ytr, yte;
    separable_blobs(300, 6.0, 11, xtr, ytr);  // means 6 sigma apart -> 3 sigma to midpoint
    separable_blobs(200, 6.0, 12, xte, yte);
    ForestConfig fc;
    fc.n_trees = 50;
    fc.seed = 21;
    Forest f = fit_forest(xtr, ytr, 2, fc);
    auto pred = predict(f, xte);
    MetricsReport m = metrics(pred, yte, {"a", "b"});
    CHECK(m.accuracy >= 0.99);
}

TEST_CASE("forest predictions are deterministic per seed and thread count") {
    Matrix x(120, 5);
    std::vector<std::uint32_t> y(120);
    Rng rng(77);
    for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = static_cast<std::uint32_t>((x(i, 1) > 0.5) + (x(i, 3) > 0.5));

    ForestConfig fc;
    fc.n_trees = 16;
    fc.seed = 5;
    fc.n_threads = 1;
    Forest a = fit_forest(x, y, 3, fc);
    fc.n_threads = 4;
    Forest b = fit_forest(x, y, 3, fc);
    CHECK(predict(a, x) == predict(b, x));

    fc.seed = 6;
    Forest c = fit_forest(x, y, 3, fc);
    auto dump = [](const Forest& f) {
        std::stringstream ss;
        write_forest(ss, f);
        return ss.str();
    };
    CHECK(dump(a) == dump(b));   // same seed, different schedule: identical model
    CHECK(dump(a) != dump(c));   // different seed: different bootstraps/subsets
}

TEST_CASE("fit is invariant to feature permutation up to relabeled splits") {
    Matrix x(60, 4);
    std::vector<std::uint32_t> y(60);
    Rng rng(3);
    for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = (0.7 * x(i, 0) + 0.3 * x(i, 3) > 0.5) ? 1 : 0;

    std::vector<std::size_t> perm{2, 0, 3, 1};
    Matrix xp = take_cols(x, perm);
    auto t = fit_tree(x, y, 2, TreeConfig{});
    auto tp = fit_tree(xp, y, 2, TreeConfig{});
    CHECK(predict(*t, x) == predict(*tp, xp));
}

TEST_CASE("forest beats or ties a single tree on the separable benchmark, most seeds") {
    int forest_wins_or_ties = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix xtr, xte;
        std::vector<std::uint32_t> ytr, yte;
        separable_blobs(150, 5.0, 100 + seed, xtr, ytr);
        separable_blobs(150, 5.0, 200 + seed, xte, yte);
        ForestConfig fc;
        fc.n_trees = 30;
        fc.seed = seed;
        Forest f = fit_forest(xtr, ytr, 2, fc);
        TreeConfig tc;
        tc.seed = seed;
        auto tree = fit_tree(xtr, ytr, 2, tc);
        double acc_f = metrics(predict(f, xte), yte, {"a", "b"}).accuracy;
        double acc_t = metrics(predict(*tree, xte), yte, {"a", "b"}).accuracy;
        if (acc_f >= acc_t) ++forest_wins_or_ties;
    }
    CHECK(forest_wins_or_ties >= 6);
}

TEST_CASE("metrics: perfect predictions score 1.0 everywhere") {
    std::vector<std::uint32_t> truth{0, 1, 2, 1, 0};
    MetricsReport m = metrics(truth, truth, {"a", "b", "c"});
    CHECK(m.accuracy == 1.0);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(m.precision[c] == 1.0);
        CHECK(m.recall[c] == 1.0);
        CHECK(m.f1[c] == 1.0);
    }
}

TEST_CASE("metrics: direct formula evaluation TP=3 FP=1 FN=2") {
    // class 1: 3 true positives, 1 false positive, 2 false negatives
    std::vector<std::uint32_t> truth{1, 1, 1, 1, 1, 0, 0};
    std::vector<std::uint32_t> pred{1, 1, 1, 0, 0, 1, 0};
    MetricsReport m = metrics(pred, truth, {"neg", "pos"});
    CHECK(m.precision[1] == Approx(0.75));
    CHECK(m.recall[1] == Approx(0.6));
    CHECK(m.f1[1] == Approx(2.0 * 0.75 * 0.6 / (0.75 + 0.6)));
    CHECK(m.support[1] == 5);
}

TEST_CASE("metrics matches an independent recount on random vectors") {
    Rng rng(88);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 30 + rng.index(50);
        std::uint32_t k = 2 + static_cast<std::uint32_t>(rng.index(4));
        std::vector<std::uint32_t> truth(n), pred(n);
        for (auto& v : truth) v = static_cast<std::uint32_t>(rng.index(k));
        for (auto& v : pred) v = static_cast<std::uint32_t>(rng.index(k));
        std::vector<std::string> names;
        for (std::uint32_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
        MetricsReport m = metrics(pred, truth, names);
        auto want = oracles::recount(pred, truth, k);
        CHECK(m.accuracy == want.accuracy);
        for (std::uint32_t c = 0; c < k; ++c) {
            CHECK(m.precision[c] == want.precision[c]);
            CHECK(m.recall[c] == want.recall[c]);
            CHECK(m.f1[c] == want.f1[c]);
        }
        // confusion entries sum to n
        double total = 0.0;
        for (double v : m.confusion.data) total += v;
        CHECK(total == static_cast<double>(n));
    }
}

TEST_CASE("metrics: zero-division cells report zero, and F1 is zero when P+R is") {
    std::vector<std::uint32_t> truth{0, 0};
    std::vector<std::uint32_t> pred{1, 1};
    MetricsReport m = metrics(pred, truth, {"a", "b"});
    CHECK(m.recall[0] == 0.0);
    CHECK(m.precision[0] == 0.0);
    CHECK(m.f1[0] == 0.0);
    CHECK(m.precision[1] == 0.0);  // 0 TP, 2 FP
    CHECK(m.recall[1] == 0.0);     // no true b at all
    CHECK(m.f1[1] == 0.0);
}

TEST_CASE("metrics rejects classes missing from the order") {
    std::vector<std::uint32_t> truth{0, 2};
    std::vector<std::uint32_t> pred{0, 0};
    CHECK_THROWS_AS(metrics(pred, truth, {"a", "b"}), DataError);
}

TEST_CASE("write_metrics emits one row per class plus accuracy") {
    std::vector<std::uint32_t> truth{0, 1};
    MetricsReport m = metrics(truth, truth, {"Benign", "Botnet"});
    std::ostringstream os;
    write_metrics(os, m);
    std::string s = os.str();
    CHECK(s.find("Benign") != std::string::npos);
    CHECK(s.find("Botnet") != std::string::npos);
    CHECK(s.find("accuracy 1.0") != std::string::npos);
}

TEST_CASE("forest serialization round-trips predictions") {
    Matrix x(50, 3);
    std::vector<std::uint32_t> y(50);
    Rng rng(13);
    for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x(i, 2) > 0.4 ? 1 : 0;
    ForestConfig fc;
    fc.n_trees = 7;
    fc.seed = 3;
    Forest f = fit_forest(x, y, 2, fc);

    std::stringstream ss;
    write_forest(ss, f);
    Forest back = read_forest(ss);
    CHECK(back.n_classes == 2);
    REQUIRE(back.trees.size() == f.trees.size());
    CHECK(predict(back, x) == predict(f, x));
}

TEST_CASE("empty data is rejected") {
    Matrix x(0, 3);
    std::vector<std::uint32_t> y;
    CHECK_THROWS_AS(fit_tree(x, y, 2, TreeConfig{}), DataError);
    CHECK_THROWS_AS(fit_forest(x, y, 2, ForestConfig{}), DataError);
}
