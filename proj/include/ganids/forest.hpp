#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numeric>
#include <thread>
#include <vector>

#include "ganids/error.hpp"
#include "ganids/io.hpp"
#include "ganids/matrix.hpp"
#include "ganids/rng.hpp"

namespace ganids {

// Internal node or leaf. Left branch takes x[feature] <= threshold.
struct TreeNode {
    bool is_leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left, right;
    std::vector<double> probs;  // leaf class probabilities, sum to 1

    std::uint32_t predicted_class() const {
        std::uint32_t best = 0;
        for (std::uint32_t c = 1; c < probs.size(); ++c)
            if (probs[c] > probs[best]) best = c;  // ties keep the lower index
        return best;
    }
};

struct TreeConfig {
    std::size_t max_depth = 0;      // 0 = unlimited
    std::size_t min_split = 2;
    bool sqrt_features = false;     // per-node subset of floor(sqrt(d)) features
    std::uint64_t seed = 0;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_depth = 0;
    std::size_t min_split = 2;
    bool sqrt_features = true;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::size_t n_threads = 0;      // 0 = hardware concurrency
};

struct Forest {
    std::vector<std::unique_ptr<TreeNode>> trees;
    std::uint32_t n_classes = 0;
    ForestConfig config;
};

struct MetricsReport {
    std::vector<std::string> class_order;
    Matrix confusion;  // true class x predicted class counts
    std::vector<double> precision, recall, f1;
    std::vector<std::size_t> support;
    double accuracy = 0.0;

    std::size_t class_id(const std::string& name) const {
        for (std::size_t i = 0; i < class_order.size(); ++i)
            if (class_order[i] == name) return i;
        throw DataError("class not in report: " + name);
    }
};

// ---------------------------------------------------------------------------
// CART induction
// ---------------------------------------------------------------------------

namespace detail {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

inline double gini_from_counts(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double g = 1.0;
    for (double c : counts) {
        double p = c / total;
        g -= p * p;
    }
    return g;
}

// Greedy Gini search over candidate thresholds at midpoints of consecutive
// distinct sorted values, restricted to the given feature subset. First best
// wins on ties (features in subset order, thresholds ascending).
inline SplitChoice best_split(const Matrix& x, const std::vector<std::uint32_t>& y,
                              const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& features,
                              std::uint32_t n_classes) {
    SplitChoice best;
    const double n = static_cast<double>(rows.size());
    std::vector<std::pair<double, std::uint32_t>> vals(rows.size());
    std::vector<double> left_cnt(n_classes), right_cnt(n_classes);

    for (std::size_t f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            vals[i] = {x(rows[i], f), y[rows[i]]};
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (vals.front().first == vals.back().first) continue;

        std::fill(left_cnt.begin(), left_cnt.end(), 0.0);
        std::fill(right_cnt.begin(), right_cnt.end(), 0.0);
        for (const auto& [v, c] : vals) right_cnt[c] += 1.0;

        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left_cnt[vals[i].second] += 1.0;
            right_cnt[vals[i].second] -= 1.0;
            if (vals[i].first == vals[i + 1].first) continue;
            double nl = static_cast<double>(i + 1), nr = n - nl;
            double w = (nl * gini_from_counts(left_cnt, nl) +
                        nr * gini_from_counts(right_cnt, nr)) / n;
            if (w < best.impurity - 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                best.impurity = w;
            }
        }
    }
    return best;
}

inline std::unique_ptr<TreeNode> make_leaf(const std::vector<std::uint32_t>& y,
                                           const std::vector<std::size_t>& rows,
                                           std::uint32_t n_classes) {
    auto node = std::make_unique<TreeNode>();
    node->probs.assign(n_classes, 0.0);
    for (std::size_t r : rows) node->probs[y[r]] += 1.0;
    for (auto& p : node->probs) p /= static_cast<double>(rows.size());
    return node;
}

inline std::unique_ptr<TreeNode> grow(const Matrix& x, const std::vector<std::uint32_t>& y,
                                      std::vector<std::size_t>& rows, std::uint32_t n_classes,
                                      const TreeConfig& cfg, Rng& rng, std::size_t depth) {
    bool pure = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (y[rows[i]] != y[rows[0]]) {
            pure = false;
            break;
        }
    if (pure || rows.size() < cfg.min_split ||
        (cfg.max_depth > 0 && depth >= cfg.max_depth))
        return make_leaf(y, rows, n_classes);

    std::vector<std::size_t> features;
    if (cfg.sqrt_features) {
        std::size_t k = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols)))));
        features = rng.sample_without_replacement(x.cols, k);
        std::sort(features.begin(), features.end());
    } else {
        features.resize(x.cols);
        std::iota(features.begin(), features.end(), 0);
    }

    SplitChoice s = best_split(x, y, rows, features, n_classes);
    if (!s.found) {
        // subset had no usable split; fall back to the full feature set so a
        // mixed node cannot dead-end on an unlucky draw
        if (cfg.sqrt_features) {
            std::vector<std::size_t> all(x.cols);
            std::iota(all.begin(), all.end(), 0);
            s = best_split(x, y, rows, all, n_classes);
        }
        if (!s.found) return make_leaf(y, rows, n_classes);
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
        (x(r, s.feature) <= s.threshold ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) return make_leaf(y, rows, n_classes);

    auto node = std::make_unique<TreeNode>();
    node->is_leaf = false;
    node->feature = s.feature;
    node->threshold = s.threshold;
    node->left = grow(x, y, left_rows, n_classes, cfg, rng, depth + 1);
    node->right = grow(x, y, right_rows, n_classes, cfg, rng, depth + 1);
    return node;
}

}  // namespace detail

inline std::unique_ptr<TreeNode> fit_tree(const Matrix& x, const std::vector<std::uint32_t>& y,
                                          std::uint32_t n_classes, const TreeConfig& cfg) {
    if (x.rows == 0 || x.rows != y.size()) throw DataError("fit_tree: empty or mismatched data");
    std::vector<std::size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(cfg.seed);
    return detail::grow(x, y, rows, n_classes, cfg, rng, 0);
}

inline std::uint32_t predict_tree(const TreeNode& root, std::span<const double> row) {
    const TreeNode* node = &root;
    while (!node->is_leaf) node = row[node->feature] <= node->threshold
                                      ? node->left.get()
                                      : node->right.get();
    return node->predicted_class();
}

// Bootstrap-resampled trees with per-node sqrt(d) feature subsets, each tree
// seeded from (seed, tree index) so the ensemble is schedule-independent.
inline Forest fit_forest(const Matrix& x, const std::vector<std::uint32_t>& y,
                         std::uint32_t n_classes, const ForestConfig& cfg) {
    if (x.rows == 0 || x.rows != y.size()) throw DataError("fit_forest: empty or mismatched data");
    Forest forest;
    forest.n_classes = n_classes;
    forest.config = cfg;
    forest.trees.resize(cfg.n_trees);

    auto build_one = [&](std::size_t t) {
        std::uint64_t tree_seed = derive_seed(cfg.seed, "tree:" + std::to_string(t));
        Rng boot(derive_seed(tree_seed, "bootstrap"));
        Matrix xs;
        std::vector<std::uint32_t> ys;
        const Matrix* px = &x;
        const std::vector<std::uint32_t>* py = &y;
        if (cfg.bootstrap) {
            std::vector<std::size_t> idx(x.rows);
            for (auto& i : idx) i = boot.index(x.rows);
            xs = take_rows(x, idx);
            ys.resize(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) ys[i] = y[idx[i]];
            px = &xs;
            py = &ys;
        }
        TreeConfig tc;
        tc.max_depth = cfg.max_depth;
        tc.min_split = cfg.min_split;
        tc.sqrt_features = cfg.sqrt_features;
        tc.seed = derive_seed(tree_seed, "splits");
        forest.trees[t] = fit_tree(*px, *py, n_classes, tc);
    };

    std::size_t workers = cfg.n_threads ? cfg.n_threads : std::thread::hardware_concurrency();
    workers = std::max<std::size_t>(1, std::min(workers, cfg.n_trees));
    if (workers == 1) {
        for (std::size_t t = 0; t < cfg.n_trees; ++t) build_one(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t t = next.fetch_add(1);
                    if (t >= cfg.n_trees) return;
                    build_one(t);
                }
            });
        for (auto& th : pool) th.join();
    }
    return forest;
}

// majority vote over tree predictions; ties go to the lower class index
inline std::uint32_t predict_forest(const Forest& f, std::span<const double> row) {
    std::vector<std::size_t> votes(f.n_classes, 0);
    for (const auto& t : f.trees) ++votes[predict_tree(*t, row)];
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < f.n_classes; ++c)
        if (votes[c] > votes[best]) best = c;
    return best;
}

inline std::vector<std::uint32_t> predict(const Forest& f, const Matrix& x) {
    std::vector<std::uint32_t> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_forest(f, x.row(r));
    return out;
}

inline std::vector<std::uint32_t> predict(const TreeNode& root, const Matrix& x) {
    std::vector<std::uint32_t> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_tree(root, x.row(r));
    return out;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

inline MetricsReport metrics(const std::vector<std::uint32_t>& pred,
                             const std::vector<std::uint32_t>& truth,
                             const std::vector<std::string>& class_order) {
    if (pred.size() != truth.size()) throw DataError("metrics: prediction/truth length mismatch");
    const std::size_t k = class_order.size();
    MetricsReport m;
    m.class_order = class_order;
    m.confusion = Matrix(k, k, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] >= k) throw DataError("metrics: truth class missing from class order");
        if (pred[i] >= k) throw DataError("metrics: predicted class missing from class order");
        m.confusion(truth[i], pred[i]) += 1.0;
    }
    m.precision.assign(k, 0.0);
    m.recall.assign(k, 0.0);
    m.f1.assign(k, 0.0);
    m.support.assign(k, 0);
    double trace = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double tp = m.confusion(c, c);
        double fp = 0.0, fn = 0.0;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c) continue;
            fp += m.confusion(o, c);
            fn += m.confusion(c, o);
        }
        m.support[c] = static_cast<std::size_t>(tp + fn);
        m.precision[c] = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
        m.recall[c] = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
        m.f1[c] = (m.precision[c] + m.recall[c]) > 0.0
                      ? 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c])
                      : 0.0;
        trace += tp;
    }
    m.accuracy = pred.empty() ? 0.0 : trace / static_cast<double>(pred.size());
    return m;
}

// one row per class, mirroring the result-table layout
inline void write_metrics(std::ostream& os, const MetricsReport& m) {
    std::size_t width = 5;
    for (const auto& c : m.class_order) width = std::max(width, c.size());
    os << std::left << std::setw(static_cast<int>(width + 2)) << "class"
       << "precision  recall  f1-score  support\n";
    os << std::fixed << std::setprecision(4);
    for (std::size_t c = 0; c < m.class_order.size(); ++c) {
        os << std::left << std::setw(static_cast<int>(width + 2)) << m.class_order[c]
           << std::setw(11) << m.precision[c] << std::setw(8) << m.recall[c]
           << std::setw(10) << m.f1[c] << m.support[c] << "\n";
    }
    os << "accuracy " << std::setprecision(6) << m.accuracy << "\n";
}

// ---------------------------------------------------------------------------
// forest serialization: flattened node arrays
// ---------------------------------------------------------------------------

inline constexpr char kForestMagic[8] = {'G', 'I', 'D', 'S', 'R', 'F', '1', '\n'};

namespace detail {

inline void flatten(const TreeNode& node, std::vector<const TreeNode*>& out) {
    out.push_back(&node);
    if (!node.is_leaf) {
        flatten(*node.left, out);
        flatten(*node.right, out);
    }
}

}  // namespace detail

inline void write_forest(std::ostream& os, const Forest& f) {
    os.write(kForestMagic, 8);
    detail::write_pod<std::uint32_t>(os, 1);  // version
    detail::write_pod<std::uint32_t>(os, f.n_classes);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.trees.size()));
    for (const auto& t : f.trees) {
        std::vector<const TreeNode*> nodes;
        detail::flatten(*t, nodes);
        detail::write_pod<std::uint64_t>(os, nodes.size());
        for (const TreeNode* n : nodes) {
            detail::write_pod<std::uint8_t>(os, n->is_leaf ? 1 : 0);
            if (n->is_leaf) {
                detail::write_doubles(os, n->probs.data(), n->probs.size());
            } else {
                detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(n->feature));
                detail::write_pod<double>(os, n->threshold);
            }
        }
    }
}

namespace detail {

inline std::unique_ptr<TreeNode> read_node(std::istream& is, std::uint32_t n_classes) {
    auto node = std::make_unique<TreeNode>();
    node->is_leaf = read_pod<std::uint8_t>(is) != 0;
    if (node->is_leaf) {
        node->probs.resize(n_classes);
        read_doubles(is, node->probs.data(), n_classes);
    } else {
        node->feature = read_pod<std::uint32_t>(is);
        node->threshold = read_pod<double>(is);
        node->left = read_node(is, n_classes);
        node->right = read_node(is, n_classes);
    }
    return node;
}

}  // namespace detail

inline Forest read_forest(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kForestMagic, 8) != 0) throw DataError("not a forest file");
    auto version = detail::read_pod<std::uint32_t>(is);
    if (version != 1) throw DataError("unsupported forest version");
    Forest f;
    f.n_classes = detail::read_pod<std::uint32_t>(is);
    auto n_trees = detail::read_pod<std::uint32_t>(is);
    for (std::uint32_t t = 0; t < n_trees; ++t) {
        detail::read_pod<std::uint64_t>(is);  // node count, informative only
        f.trees.push_back(detail::read_node(is, f.n_classes));
    }
    return f;
}

}  // namespace ganids
