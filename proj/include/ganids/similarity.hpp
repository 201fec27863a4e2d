#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "ganids/error.hpp"
#include "ganids/forest.hpp"
#include "ganids/io.hpp"
#include "ganids/matrix.hpp"
#include "ganids/preprocess.hpp"

namespace ganids {

// ---------------------------------------------------------------------------
// per-feature cosine similarity
// ---------------------------------------------------------------------------

namespace detail {

// linear-interpolation resample of a sorted column to a target length
inline std::vector<double> resample_sorted(const std::vector<double>& v, std::size_t n) {
    if (v.size() == n) return v;
    std::vector<double> out(n);
    if (n == 1) {
        double pos = static_cast<double>(v.size() - 1) / 2.0;
        std::size_t lo = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(lo);
        out[0] = lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double pos = static_cast<double>(i) * static_cast<double>(v.size() - 1) /
                     static_cast<double>(n - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(lo);
        out[i] = lo + 1 < v.size() ? v[lo] * (1.0 - frac) + v[lo + 1] * frac : v[lo];
    }
    return out;
}

}  // namespace detail

// Columns are sorted ascending, the longer one resampled down to the shorter
// length, then compared as vectors. Sorting makes this a comparison of
// distributions, not of arbitrary row pairings.
inline double cosine_feature(std::vector<double> orig_col, std::vector<double> gen_col) {
    if (orig_col.empty() || gen_col.empty())
        throw DataError("cosine similarity needs non-empty columns");
    auto all_zero = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    if (all_zero(orig_col) || all_zero(gen_col))
        throw DataError("cosine similarity is undefined for an all-zero column");

    std::sort(orig_col.begin(), orig_col.end());
    std::sort(gen_col.begin(), gen_col.end());
    std::size_t n = std::min(orig_col.size(), gen_col.size());
    std::vector<double> a = detail::resample_sorted(orig_col, n);
    std::vector<double> b = detail::resample_sorted(gen_col, n);

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// cumulative sums
// ---------------------------------------------------------------------------

struct CumulativeSeries {
    std::vector<double> index;  // normalized to [0,1]
    std::vector<double> sums;   // running sums of the sorted column
};

inline CumulativeSeries cumulative_series(std::vector<double> col) {
    if (col.empty()) throw DataError("cumulative series needs a non-empty column");
    std::sort(col.begin(), col.end());
    CumulativeSeries s;
    s.index.resize(col.size());
    s.sums.resize(col.size());
    double run = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) {
        run += col[i];
        s.sums[i] = run;
        s.index[i] = col.size() > 1
                         ? static_cast<double>(i) / static_cast<double>(col.size() - 1)
                         : 0.0;
    }
    return s;
}

namespace detail {

// value of the series' sum curve at a normalized position, by interpolation
inline double series_at(const CumulativeSeries& s, double pos) {
    if (s.sums.size() == 1) return s.sums[0];
    double fidx = pos * static_cast<double>(s.sums.size() - 1);
    std::size_t lo = std::min(static_cast<std::size_t>(fidx), s.sums.size() - 2);
    double frac = fidx - static_cast<double>(lo);
    return s.sums[lo] * (1.0 - frac) + s.sums[lo + 1] * frac;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// classifier-based validation
// ---------------------------------------------------------------------------

struct MlValidationConfig {
    double split_ratio = 0.8;
    std::uint64_t seed = 0;
    ForestConfig forest;     // n_trees etc.; seed is derived from the config seed
};

struct MlValidation {
    std::vector<std::string> class_order;  // {benign-like, target} in sorted order
    MetricsReport forest_self;      // on the held-out 20% of the generated mix
    MetricsReport forest_transfer;  // on original rows + the second benign pool
    MetricsReport tree_self;
    MetricsReport tree_transfer;
};

namespace detail {

inline std::unordered_set<std::string> row_identity_set(const Matrix& m) {
    std::unordered_set<std::string> set;
    set.reserve(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        auto row = m.row(r);
        set.emplace(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
    }
    return set;
}

}  // namespace detail

// Train on a generated-plus-benign mix, report on its own held-out slice and
// on the original rows with a disjoint benign pool, for both the forest and a
// single decision tree.
inline MlValidation ml_validation(const Matrix& generated, const Matrix& original,
                                  const Matrix& benign_pool_a, const Matrix& benign_pool_b,
                                  const std::string& target_class,
                                  const std::string& benign_class,
                                  const MlValidationConfig& cfg) {
    if (generated.cols != original.cols || generated.cols != benign_pool_a.cols ||
        generated.cols != benign_pool_b.cols)
        throw DataError("ml_validation inputs must share one feature space");

    auto ids_a = detail::row_identity_set(benign_pool_a);
    for (std::size_t r = 0; r < benign_pool_b.rows; ++r) {
        auto row = benign_pool_b.row(r);
        std::string key(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
        if (ids_a.count(key))
            throw DataError("benign pools overlap (row identity); draw disjoint pools");
    }

    std::vector<std::string> class_order{benign_class, target_class};
    std::sort(class_order.begin(), class_order.end());
    std::uint32_t target_id = class_order[0] == target_class ? 0 : 1;
    std::uint32_t benign_id = 1 - target_id;

    // dataset 1: generated + benign pool A
    Matrix x1 = vconcat(generated, benign_pool_a);
    std::vector<std::uint32_t> y1(x1.rows, benign_id);
    for (std::size_t r = 0; r < generated.rows; ++r) y1[r] = target_id;

    // stratified split via a throwaway dataset wrapper
    CleanDataset wrap;
    wrap.feature_names.assign(x1.cols, "");
    wrap.features = x1;
    wrap.labels = y1;
    wrap.class_names = class_order;
    wrap.class_counts.assign(2, 0);
    for (auto l : y1) ++wrap.class_counts[l];
    SplitSpec sp = split(wrap, cfg.split_ratio, derive_seed(cfg.seed, "mlval-split"));

    Matrix xtr = take_rows(x1, sp.train_indices);
    Matrix xte = take_rows(x1, sp.test_indices);
    std::vector<std::uint32_t> ytr, yte;
    for (auto i : sp.train_indices) ytr.push_back(y1[i]);
    for (auto i : sp.test_indices) yte.push_back(y1[i]);

    ForestConfig fc = cfg.forest;
    fc.seed = derive_seed(cfg.seed, "mlval-forest");
    Forest forest = fit_forest(xtr, ytr, 2, fc);
    TreeConfig tc;
    tc.seed = derive_seed(cfg.seed, "mlval-tree");
    auto tree = fit_tree(xtr, ytr, 2, tc);

    // testing set: original rows + benign pool B
    Matrix xt = vconcat(original, benign_pool_b);
    std::vector<std::uint32_t> yt(xt.rows, benign_id);
    for (std::size_t r = 0; r < original.rows; ++r) yt[r] = target_id;

    MlValidation out;
    out.class_order = class_order;
    out.forest_self = metrics(predict(forest, xte), yte, class_order);
    out.forest_transfer = metrics(predict(forest, xt), yt, class_order);
    out.tree_self = metrics(predict(*tree, xte), yte, class_order);
    out.tree_transfer = metrics(predict(*tree, xt), yt, class_order);
    return out;
}

// ---------------------------------------------------------------------------
// report assembly and emission
// ---------------------------------------------------------------------------

struct FeatureSimilarity {
    std::string feature;
    double cosine = 0.0;
    CumulativeSeries original;
    CumulativeSeries generated;
};

struct SimilarityReport {
    std::vector<FeatureSimilarity> features;
    std::vector<std::string> skipped;  // requested features absent from the generated space
};

inline SimilarityReport compare_features(const Matrix& original, const Matrix& generated,
                                         const std::vector<std::string>& space,
                                         const std::vector<std::string>& requested) {
    if (original.cols != space.size() || generated.cols != space.size())
        throw DataError("feature space does not match the provided matrices");
    SimilarityReport rep;
    for (const auto& name : requested) {
        auto it = std::find(space.begin(), space.end(), name);
        if (it == space.end()) {
            rep.skipped.push_back(name);
            continue;
        }
        std::size_t c = static_cast<std::size_t>(it - space.begin());
        std::vector<double> oc(original.rows), gc(generated.rows);
        for (std::size_t r = 0; r < original.rows; ++r) oc[r] = original(r, c);
        for (std::size_t r = 0; r < generated.rows; ++r) gc[r] = generated(r, c);
        FeatureSimilarity fs;
        fs.feature = name;
        fs.cosine = cosine_feature(oc, gc);
        fs.original = cumulative_series(oc);
        fs.generated = cumulative_series(std::move(gc));
        rep.features.push_back(std::move(fs));
    }
    return rep;
}

namespace detail {

inline std::string sanitize_filename(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

}  // namespace detail

// One CSV per feature (overlaid on the longer series' index grid), one CSV of
// cosine values, one text report for the classifier validation.
inline void emit_similarity_report(const SimilarityReport& rep, const MlValidation* ml,
                                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    atomic_write(dir / "cosine.csv", [&](std::ostream& os) {
        os << "feature,cosine\n";
        for (const auto& f : rep.features)
            os << f.feature << "," << fmt_double(f.cosine) << "\n";
    });
    for (const auto& f : rep.features) {
        atomic_write(dir / ("cumsum_" + detail::sanitize_filename(f.feature) + ".csv"),
                     [&](std::ostream& os) {
                         os << "normalized_index,original_sum,generated_sum\n";
                         const CumulativeSeries& longer =
                             f.original.index.size() >= f.generated.index.size() ? f.original
                                                                                 : f.generated;
                         for (double pos : longer.index)
                             os << fmt_double(pos) << "," << fmt_double(detail::series_at(f.original, pos))
                                << "," << fmt_double(detail::series_at(f.generated, pos)) << "\n";
                     });
    }
    if (ml) {
        atomic_write(dir / "ml_validation.txt", [&](std::ostream& os) {
            os << "forest, held-out generated mix\n";
            write_metrics(os, ml->forest_self);
            os << "\nforest, original rows + disjoint benign pool\n";
            write_metrics(os, ml->forest_transfer);
            os << "\ndecision tree, held-out generated mix\n";
            write_metrics(os, ml->tree_self);
            os << "\ndecision tree, original rows + disjoint benign pool\n";
            write_metrics(os, ml->tree_transfer);
        });
    }
}

}  // namespace ganids
