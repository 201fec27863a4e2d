#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganids/dataio.hpp"
#include "ganids/error.hpp"
#include "ganids/forest.hpp"
#include "ganids/gan.hpp"
#include "ganids/preprocess.hpp"
#include "ganids/segment.hpp"

namespace ganids {

enum class AugmentMode : std::uint8_t { replace = 0, append = 1 };

inline const char* augment_mode_name(AugmentMode m) {
    return m == AugmentMode::replace ? "replace" : "append";
}

inline AugmentMode augment_mode_from_name(const std::string& s) {
    if (s == "replace") return AugmentMode::replace;
    if (s == "append") return AugmentMode::append;
    throw ConfigError("unknown augmentation mode: " + s);
}

// Settings shared by the baseline and every experiment cell.
struct HarnessConfig {
    std::size_t top_k = 32;
    double split_ratio = 0.8;
    std::string target_class = "Botnet";
    std::string benign_class = "Benign";
    std::string port_column = "Destination Port";
    double port_value = 8080.0;
    std::size_t cardinality_threshold = 3;
    std::size_t min_segment_size = 30;
    std::size_t benign_pool_size = 10000;
    ForestConfig forest;  // seed is overridden per run
};

struct ExperimentSpec {
    GanKind gan_kind = GanKind::wgan;
    double multiplier = 4.0;
    AugmentMode mode = AugmentMode::replace;
    std::uint64_t gan_seed = 1;
    std::uint64_t split_seed = 2;
    std::uint64_t forest_seed = 3;
};

struct ExperimentResult {
    ExperimentSpec spec;
    HarnessConfig harness;
    GanSpec gan_spec;                // resolved base spec (per-segment seeds derive from it)
    std::size_t synthetic_rows = 0;
    std::size_t segments = 0;
    MetricsReport augmented_test;    // full per-class report on the corpus's held-out 20%
    MetricsReport original_target;   // original target rows + held-out benign context
};

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

struct BaselineResult {
    FeatureSelection selection;
    MetricsReport report;
};

namespace detail {

inline std::vector<std::uint32_t> labels_at(const std::vector<std::uint32_t>& labels,
                                            const std::vector<std::size_t>& idx) {
    std::vector<std::uint32_t> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(labels[i]);
    return out;
}

}  // namespace detail

// chi2 top-k selection, stratified split, forest fit, per-class report
inline BaselineResult run_baseline(const CleanDataset& ds, const HarnessConfig& cfg,
                                   std::uint64_t split_seed, std::uint64_t forest_seed) {
    BaselineResult out;
    out.selection = select_top_k(chi2_scores(ds), std::min(cfg.top_k, ds.n_features()));
    Matrix x = take_cols(ds.features, out.selection.selected);
    SplitSpec sp = split(ds, cfg.split_ratio, split_seed);

    Matrix xtr = take_rows(x, sp.train_indices);
    Matrix xte = take_rows(x, sp.test_indices);
    auto ytr = detail::labels_at(ds.labels, sp.train_indices);
    auto yte = detail::labels_at(ds.labels, sp.test_indices);

    ForestConfig fc = cfg.forest;
    fc.seed = forest_seed;
    Forest forest = fit_forest(xtr, ytr, static_cast<std::uint32_t>(ds.class_names.size()), fc);
    out.report = metrics(predict(forest, xte), yte, ds.class_names);
    return out;
}

// ---------------------------------------------------------------------------
// augmentation experiment
// ---------------------------------------------------------------------------

// One grid cell: train per-segment generators, synthesize round(k * |class|)
// rows, rebuild the corpus (replace or append), refit the forest, and
// evaluate on the corpus's held-out slice and on the original class rows.
inline ExperimentResult run_augmentation(const CleanDataset& ds, const ExperimentSpec& espec,
                                         const HarnessConfig& cfg, GanSpec base_gan) {
    ExperimentResult res;
    res.spec = espec;
    res.harness = cfg;

    FeatureSelection selection = select_top_k(chi2_scores(ds), std::min(cfg.top_k, ds.n_features()));
    std::vector<std::string> sel_names;
    for (auto i : selection.selected) sel_names.push_back(ds.feature_names[i]);
    Matrix x_sel = take_cols(ds.features, selection.selected);

    SegmentationPlan plan = build_plan(ds, cfg.target_class, cfg.port_column,
                                       cfg.cardinality_threshold, cfg.min_segment_size,
                                       cfg.port_value);
    check_minimum_sizes(plan, cfg.min_segment_size);
    res.segments = plan.segments.size();

    base_gan.kind = espec.gan_kind;
    base_gan.seed = espec.gan_seed;
    if (base_gan.kind == GanKind::ctgan) base_gan.label_dim = 1;
    else base_gan.label_dim = 0;
    res.gan_spec = base_gan;

    std::vector<TrainedGenerator> gens =
        train_per_segment(plan, ds, base_gan, selection.selected);
    SyntheticRows synth = generate_proportional(plan, gens, espec.multiplier, sel_names);
    res.synthetic_rows = synth.rows.rows;

    // assemble the augmented corpus in the selected feature space
    std::uint32_t target_id = ds.class_index(cfg.target_class);
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
        if (espec.mode == AugmentMode::append || ds.labels[r] != target_id) kept.push_back(r);

    Matrix corpus_x = vconcat(take_rows(x_sel, kept), synth.rows);
    std::vector<std::uint32_t> corpus_y = detail::labels_at(ds.labels, kept);
    corpus_y.insert(corpus_y.end(), synth.rows.rows, target_id);

    CleanDataset corpus;
    corpus.feature_names = sel_names;
    corpus.features = std::move(corpus_x);
    corpus.labels = std::move(corpus_y);
    corpus.class_names = ds.class_names;
    corpus.class_counts.assign(ds.class_names.size(), 0);
    for (auto l : corpus.labels) ++corpus.class_counts[l];

    SplitSpec sp = split(corpus, cfg.split_ratio, espec.split_seed);
    Matrix xtr = take_rows(corpus.features, sp.train_indices);
    Matrix xte = take_rows(corpus.features, sp.test_indices);
    auto ytr = detail::labels_at(corpus.labels, sp.train_indices);
    auto yte = detail::labels_at(corpus.labels, sp.test_indices);

    ForestConfig fc = cfg.forest;
    fc.seed = espec.forest_seed;
    Forest forest = fit_forest(xtr, ytr, static_cast<std::uint32_t>(ds.class_names.size()), fc);
    res.augmented_test = metrics(predict(forest, xte), yte, ds.class_names);

    // transfer evaluation: the full set of original target rows plus a
    // held-out benign sample disjoint from the training partition
    std::uint32_t benign_id = ds.class_index(cfg.benign_class);
    std::vector<std::size_t> benign_test;
    for (auto i : sp.test_indices)
        if (corpus.labels[i] == benign_id) benign_test.push_back(i);
    Rng pool_rng(derive_seed(espec.split_seed, "benign-pool"));
    pool_rng.shuffle(benign_test);
    if (benign_test.size() > cfg.benign_pool_size) benign_test.resize(cfg.benign_pool_size);

    std::vector<std::size_t> target_rows = ds.rows_of_class(target_id);
    Matrix eval_x = vconcat(take_rows(x_sel, target_rows), take_rows(corpus.features, benign_test));
    std::vector<std::uint32_t> eval_y(eval_x.rows, benign_id);
    for (std::size_t r = 0; r < target_rows.size(); ++r) eval_y[r] = target_id;
    res.original_target = metrics(predict(forest, eval_x), eval_y, ds.class_names);
    return res;
}

// ---------------------------------------------------------------------------
// stability check
// ---------------------------------------------------------------------------

struct StabilityRow {
    std::string class_name;
    double d_precision = 0.0;
    double d_recall = 0.0;
    double d_f1 = 0.0;
    bool pass = true;
};

// Compare every non-target class between two per-class reports; fail a class
// whose precision, recall, or F1 moved by more than the tolerance.
inline std::vector<StabilityRow> stability_check(const MetricsReport& baseline,
                                                 const MetricsReport& augmented,
                                                 double tolerance,
                                                 const std::string& target_class) {
    if (baseline.class_order != augmented.class_order)
        throw DataError("stability check: reports cover different class sets");
    std::vector<StabilityRow> rows;
    for (std::size_t c = 0; c < baseline.class_order.size(); ++c) {
        if (baseline.class_order[c] == target_class) continue;
        StabilityRow row;
        row.class_name = baseline.class_order[c];
        row.d_precision = augmented.precision[c] - baseline.precision[c];
        row.d_recall = augmented.recall[c] - baseline.recall[c];
        row.d_f1 = augmented.f1[c] - baseline.f1[c];
        row.pass = std::abs(row.d_precision) <= tolerance &&
                   std::abs(row.d_recall) <= tolerance && std::abs(row.d_f1) <= tolerance;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// machine-readable results
// ---------------------------------------------------------------------------

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
    nlohmann::json j;
    j["accuracy"] = m.accuracy;
    j["classes"] = nlohmann::json::array();
    for (std::size_t c = 0; c < m.class_order.size(); ++c) {
        j["classes"].push_back({{"class", m.class_order[c]},
                                {"precision", m.precision[c]},
                                {"recall", m.recall[c]},
                                {"f1", m.f1[c]},
                                {"support", m.support[c]}});
    }
    std::vector<std::vector<double>> confusion(m.class_order.size());
    for (std::size_t r = 0; r < m.confusion.rows; ++r)
        confusion[r].assign(m.confusion.row(r).begin(), m.confusion.row(r).end());
    j["confusion"] = confusion;
    return j;
}

inline nlohmann::json result_to_json(const ExperimentResult& r) {
    nlohmann::json j;
    j["gan_kind"] = gan_kind_name(r.spec.gan_kind);
    j["multiplier"] = r.spec.multiplier;
    j["mode"] = augment_mode_name(r.spec.mode);
    j["seeds"] = {{"gan", r.spec.gan_seed},
                  {"split", r.spec.split_seed},
                  {"forest", r.spec.forest_seed}};
    j["gan_spec"] = {{"noise_dim", r.gan_spec.noise_dim},
                     {"epochs", r.gan_spec.epochs},
                     {"batch_size", r.gan_spec.batch_size},
                     {"learning_rate", r.gan_spec.learning_rate},
                     {"n_critic", r.gan_spec.n_critic},
                     {"clip_value", r.gan_spec.clip_value},
                     {"gp_lambda", r.gan_spec.gp_lambda},
                     {"mmd_bandwidth", r.gan_spec.mmd_bandwidth}};
    j["target_class"] = r.harness.target_class;
    j["synthetic_rows"] = r.synthetic_rows;
    j["segments"] = r.segments;
    j["augmented_test"] = metrics_to_json(r.augmented_test);
    j["original_target"] = metrics_to_json(r.original_target);
    return j;
}

inline void write_result_json(const std::filesystem::path& path, const ExperimentResult& r) {
    atomic_write(path, [&](std::ostream& os) { os << result_to_json(r).dump(2) << "\n"; });
}

}  // namespace ganids
