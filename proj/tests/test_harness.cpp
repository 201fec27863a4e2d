#include <catch2/catch.hpp>

#include <set>

#include "ganids/demo.hpp"
#include "ganids/harness.hpp"
#include "testutil.hpp"

using namespace ganids;

namespace {

// three classes in disjoint feature boxes: a known-separability oracle
CleanDataset separable_dataset(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    auto emit = [&](double lo, const char* name, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({lo + 0.1 * rng.uniform(), lo + 0.1 * rng.uniform(),
                            rng.uniform()});
            labels.push_back(name);
        }
    };
    emit(0.0, "alpha", 200);
    emit(0.4, "beta", 150);
    emit(0.8, "gamma", 100);
    return make_dataset(rows, labels, {"x", "y", "noise"});
}

HarnessConfig tiny_cfg() {
    HarnessConfig cfg;
    cfg.top_k = 3;
    cfg.target_class = "alpha";
    cfg.port_column = "x";
    cfg.forest.n_trees = 20;
    return cfg;
}

}  // namespace

TEST_CASE("baseline reaches 0.99 on the separable oracle dataset") {
    CleanDataset ds = separable_dataset(7);
    BaselineResult base = run_baseline(ds, tiny_cfg(), 11, 12);
    CHECK(base.report.accuracy >= 0.99);
    for (std::size_t c = 0; c < base.report.class_order.size(); ++c) {
        CHECK(base.report.precision[c] >= 0.99);
        CHECK(base.report.recall[c] >= 0.99);
        CHECK(base.report.f1[c] >= 0.99);
    }
    CHECK(base.selection.selected.size() == 3);
}

TEST_CASE("baseline is reproducible from its seeds") {
    CleanDataset ds = separable_dataset(9);
    BaselineResult a = run_baseline(ds, tiny_cfg(), 3, 4);
    BaselineResult b = run_baseline(ds, tiny_cfg(), 3, 4);
    CHECK(a.report.confusion == b.report.confusion);
}

TEST_CASE("stability_check: identical reports all pass; a 0.10 move fails with its delta") {
    CleanDataset ds = separable_dataset(13);
    BaselineResult base = run_baseline(ds, tiny_cfg(), 1, 2);
    auto rows = stability_check(base.report, base.report, 0.04, "alpha");
    REQUIRE(rows.size() == 2);  // non-target classes only
    for (const auto& r : rows) {
        CHECK(r.pass);
        CHECK(r.d_f1 == 0.0);
    }

    MetricsReport moved = base.report;
    std::size_t beta = moved.class_id("beta");
    moved.recall[beta] -= 0.10;
    auto rows2 = stability_check(base.report, moved, 0.04, "alpha");
    bool beta_flagged = false;
    for (const auto& r : rows2)
        if (r.class_name == "beta") {
            beta_flagged = true;
            CHECK_FALSE(r.pass);
            CHECK(r.d_recall == Approx(-0.10));
        }
    CHECK(beta_flagged);

    MetricsReport other = base.report;
    other.class_order[0] += "_renamed";
    CHECK_THROWS_AS(stability_check(base.report, other, 0.04, "alpha"), DataError);
}

TEST_CASE("replace mode leaves no original target rows in the training corpus") {
    CleanDataset ds = make_mini_dataset(21, 600, 120, 80);
    HarnessConfig cfg = mini_harness_config();
    cfg.min_segment_size = 10;  // scaled-down dataset
    cfg.forest.n_trees = 10;
    GanSpec gan = mini_gan_spec(GanKind::wgan);
    gan.epochs = 4;  // wiring test, not a convergence test

    ExperimentSpec espec;
    espec.gan_kind = GanKind::wgan;
    espec.multiplier = 1.0;
    espec.mode = AugmentMode::replace;

    // reproduce the corpus assembly the harness performs and audit row identity
    ExperimentResult res = run_augmentation(ds, espec, cfg, gan);
    CHECK(res.synthetic_rows == 80);

    // row-identity audit: rebuild the corpus the same way and confirm that no
    // original target row appears in it. Synthetic rows re-inject constants,
    // so compare full feature vectors of the selected space.
    FeatureSelection sel = select_top_k(chi2_scores(ds), cfg.top_k);
    Matrix x_sel = take_cols(ds.features, sel.selected);
    std::uint32_t target = ds.class_index("Botnet");
    std::set<std::string> target_rows;
    for (std::size_t r : ds.rows_of_class(target)) {
        auto row = x_sel.row(r);
        target_rows.emplace(reinterpret_cast<const char*>(row.data()),
                            row.size() * sizeof(double));
    }
    SegmentationPlan plan = build_plan(ds, "Botnet", cfg.port_column,
                                       cfg.cardinality_threshold, cfg.min_segment_size,
                                       cfg.port_value);
    GanSpec resolved = gan;
    resolved.kind = espec.gan_kind;
    resolved.seed = espec.gan_seed;
    auto gens = train_per_segment(plan, ds, resolved, sel.selected);
    std::vector<std::string> sel_names;
    for (auto i : sel.selected) sel_names.push_back(ds.feature_names[i]);
    SyntheticRows synth = generate_proportional(plan, gens, 1.0, sel_names);
    for (std::size_t r = 0; r < synth.rows.rows; ++r) {
        auto row = synth.rows.row(r);
        std::string key(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
        CHECK(target_rows.count(key) == 0);
    }
}

TEST_CASE("experiment results are exactly reproducible from recorded seeds") {
    CleanDataset ds = make_mini_dataset(33, 500, 100, 70);
    HarnessConfig cfg = mini_harness_config();
    cfg.min_segment_size = 10;  // scaled-down dataset
    cfg.forest.n_trees = 8;
    GanSpec gan = mini_gan_spec(GanKind::vanilla);
    gan.epochs = 3;

    ExperimentSpec espec;
    espec.gan_kind = GanKind::vanilla;
    espec.multiplier = 2.0;
    espec.gan_seed = 41;
    espec.split_seed = 42;
    espec.forest_seed = 43;

    ExperimentResult a = run_augmentation(ds, espec, cfg, gan);
    ExperimentResult b = run_augmentation(ds, espec, cfg, gan);
    CHECK(a.augmented_test.confusion == b.augmented_test.confusion);
    CHECK(a.original_target.confusion == b.original_target.confusion);
    CHECK(a.synthetic_rows == b.synthetic_rows);
}

TEST_CASE("append mode keeps original target rows and adds synthetic ones") {
    CleanDataset ds = make_mini_dataset(55, 400, 80, 60);
    HarnessConfig cfg = mini_harness_config();
    cfg.min_segment_size = 10;  // scaled-down dataset
    cfg.forest.n_trees = 8;
    GanSpec gan = mini_gan_spec(GanKind::wgan);
    gan.epochs = 3;

    ExperimentSpec espec;
    espec.gan_kind = GanKind::wgan;
    espec.multiplier = 2.0;
    espec.mode = AugmentMode::append;
    ExperimentResult res = run_augmentation(ds, espec, cfg, gan);
    CHECK(res.synthetic_rows == 120);
    // support of the target class in the corpus-side report reflects originals
    // plus synthetic rows: 20% of (60 + 120) = 36
    std::size_t t = res.augmented_test.class_id("Botnet");
    CHECK(res.augmented_test.support[t] == 36);
    // the transfer evaluation always covers every original target row
    std::size_t tt = res.original_target.class_id("Botnet");
    CHECK(res.original_target.support[tt] == 60);
}

TEST_CASE("result JSON carries spec, seeds, and both reports") {
    CleanDataset ds = make_mini_dataset(66, 400, 80, 60);
    HarnessConfig cfg = mini_harness_config();
    cfg.min_segment_size = 10;  // scaled-down dataset
    cfg.forest.n_trees = 6;
    GanSpec gan = mini_gan_spec(GanKind::wgan);
    gan.epochs = 2;
    ExperimentSpec espec;
    espec.gan_kind = GanKind::wgan;
    espec.multiplier = 1.5;
    ExperimentResult res = run_augmentation(ds, espec, cfg, gan);

    nlohmann::json j = result_to_json(res);
    CHECK(j["gan_kind"] == "wgan");
    CHECK(j["multiplier"] == Approx(1.5));
    CHECK(j["mode"] == "replace");
    CHECK(j["seeds"]["split"] == 2);
    CHECK(j["augmented_test"]["classes"].size() == 5);
    CHECK(j["original_target"]["accuracy"].is_number());

    TempDir td;
    write_result_json(td.file("r.json"), res);
    auto parsed = nlohmann::json::parse(slurp(td.file("r.json")));
    CHECK(parsed["synthetic_rows"] == res.synthetic_rows);
}
