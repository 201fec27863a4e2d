#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ganids/dataio.hpp"
#include "ganids/error.hpp"
#include "ganids/io.hpp"
#include "ganids/matrix.hpp"
#include "ganids/rng.hpp"

namespace ganids {

struct FeatureSelection {
    std::vector<double> scores;        // per feature, >= 0
    std::vector<std::size_t> selected; // k indices, descending score, ties to lower index
};

struct ScalerParams {
    std::vector<double> min;
    std::vector<double> max;
};

struct SplitSpec {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    double ratio = 0.8;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;  // classes too small to stratify cleanly
};

// ---------------------------------------------------------------------------
// chi-squared feature scoring
// ---------------------------------------------------------------------------

namespace detail {

// score = sum over classes of (observed - expected)^2 / expected, with
// observed the per-class sum of the feature and expected = prior * total sum.
inline double chi2_one_feature(const CleanDataset& ds, std::size_t f,
                               const std::vector<double>& priors, double shift) {
    const std::size_t k = ds.class_names.size();
    std::vector<double> observed(k, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        double v = ds.features(r, f) + shift;
        if (v < 0.0)
            throw NumericError("chi2 requires nonnegative values; feature '" +
                               ds.feature_names[f] + "' is negative after shift");
        observed[ds.labels[r]] += v;
        total += v;
    }
    if (total == 0.0) return 0.0;
    double score = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double expected = priors[c] * total;
        double d = observed[c] - expected;
        score += d * d / expected;
    }
    return score;
}

}  // namespace detail

// Features holding negative values are shifted by their own minimum before
// scoring; the shift is used for scoring only.
inline std::vector<double> chi2_scores(const CleanDataset& ds) {
    if (ds.class_names.size() < 2) throw DataError("chi2 needs at least 2 classes");
    std::vector<double> priors(ds.class_names.size());
    for (std::size_t c = 0; c < priors.size(); ++c)
        priors[c] = static_cast<double>(ds.class_counts[c]) / static_cast<double>(ds.n_rows());

    std::vector<double> scores(ds.n_features());
    for (std::size_t f = 0; f < ds.n_features(); ++f) {
        double mn = 0.0;
        for (std::size_t r = 0; r < ds.n_rows(); ++r) mn = std::min(mn, ds.features(r, f));
        double shift = mn < 0.0 ? -mn : 0.0;
        scores[f] = detail::chi2_one_feature(ds, f, priors, shift);
    }
    return scores;
}

inline FeatureSelection select_top_k(std::vector<double> scores, std::size_t k) {
    if (k > scores.size())
        throw DataError("k=" + std::to_string(k) + " exceeds feature count " +
                        std::to_string(scores.size()));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(k);
    return FeatureSelection{std::move(scores), std::move(order)};
}

// ---------------------------------------------------------------------------
// min-max scaling onto [0,1]
// ---------------------------------------------------------------------------

inline ScalerParams fit_scaler(const Matrix& x) {
    ScalerParams p;
    p.min.assign(x.cols, std::numeric_limits<double>::infinity());
    p.max.assign(x.cols, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < x.cols; ++c) {
            p.min[c] = std::min(p.min[c], x(r, c));
            p.max[c] = std::max(p.max[c], x(r, c));
        }
    return p;
}

// (x - min) / (max - min), constant features map to 0, out-of-range inputs
// clamp to [0,1].
inline Matrix apply_scaler(const Matrix& x, const ScalerParams& p) {
    Matrix out(x.rows, x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) {
        double span = p.max[c] - p.min[c];
        for (std::size_t r = 0; r < x.rows; ++r) {
            double v = span == 0.0 ? 0.0 : (x(r, c) - p.min[c]) / span;
            out(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

inline Matrix invert_scaler(const Matrix& x, const ScalerParams& p) {
    Matrix out(x.rows, x.cols);
    for (std::size_t c = 0; c < x.cols; ++c) {
        double span = p.max[c] - p.min[c];
        for (std::size_t r = 0; r < x.rows; ++r)
            out(r, c) = p.min[c] + x(r, c) * span;
    }
    return out;
}

// ---------------------------------------------------------------------------
// stratified train/test split
// ---------------------------------------------------------------------------

// Per class: seeded shuffle, floor(ratio * count) rows to train, remainder to
// test. Index lists come out sorted ascending, so the split is a canonical
// function of (dataset, ratio, seed).
inline SplitSpec split(const CleanDataset& ds, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0,1)");
    SplitSpec s;
    s.ratio = ratio;
    s.seed = seed;
    for (std::uint32_t c = 0; c < ds.class_names.size(); ++c) {
        auto rows = ds.rows_of_class(c);
        if (rows.size() < 2)
            s.warnings.push_back("class '" + ds.class_names[c] + "' has fewer than 2 rows");
        Rng rng(derive_seed(seed, "split:" + ds.class_names[c]));
        rng.shuffle(rows);
        std::size_t n_train = static_cast<std::size_t>(
            std::floor(ratio * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_train ? s.train_indices : s.test_indices).push_back(rows[i]);
    }
    std::sort(s.train_indices.begin(), s.train_indices.end());
    std::sort(s.test_indices.begin(), s.test_indices.end());
    return s;
}

// ---------------------------------------------------------------------------
// human-readable serialization, stored beside trained models
// ---------------------------------------------------------------------------

inline void write_selection(std::ostream& os, const FeatureSelection& sel,
                            const std::vector<std::string>& feature_names) {
    os << "ganids.selection v1\n";
    os << "k " << sel.selected.size() << "\n";
    for (std::size_t idx : sel.selected)
        os << "feature " << idx << " " << fmt_double(sel.scores[idx]) << " "
           << feature_names[idx] << "\n";
}

inline void write_scaler(std::ostream& os, const ScalerParams& p) {
    os << "ganids.scaler v1\n";
    os << "n_features " << p.min.size() << "\n";
    for (std::size_t i = 0; i < p.min.size(); ++i)
        os << "feature " << i << " " << fmt_double(p.min[i]) << " " << fmt_double(p.max[i]) << "\n";
}

// inverse of write_selection; returns the selection plus the feature names
inline FeatureSelection read_selection(std::istream& is, std::vector<std::string>* names = nullptr) {
    std::string line;
    if (!std::getline(is, line) || line != "ganids.selection v1")
        throw DataError("not a selection document");
    if (!std::getline(is, line) || line.rfind("k ", 0) != 0)
        throw DataError("malformed selection document");
    std::size_t k = std::stoull(line.substr(2));
    FeatureSelection sel;
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::getline(is, line) || line.rfind("feature ", 0) != 0)
            throw DataError("malformed selection document");
        std::istringstream ls(line.substr(8));
        std::size_t idx;
        double score;
        ls >> idx >> score;
        std::string name;
        std::getline(ls, name);
        if (!name.empty() && name.front() == ' ') name.erase(name.begin());
        sel.selected.push_back(idx);
        if (sel.scores.size() <= idx) sel.scores.resize(idx + 1, 0.0);
        sel.scores[idx] = score;
        if (names) names->push_back(name);
    }
    return sel;
}

inline ScalerParams read_scaler(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "ganids.scaler v1")
        throw DataError("not a scaler document");
    std::string word;
    std::size_t n = 0;
    is >> word >> n;
    if (word != "n_features") throw DataError("malformed scaler document");
    ScalerParams p;
    p.min.resize(n);
    p.max.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t idx;
        is >> word >> idx >> p.min[idx] >> p.max[idx];
        if (!is || word != "feature" || idx >= n) throw DataError("malformed scaler document");
    }
    return p;
}

}  // namespace ganids
