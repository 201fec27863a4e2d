#pragma once

// Independent test oracles. Everything here recomputes expected values by a
// route different from the library implementation it checks: central finite
// differences for gradients, exhaustive enumeration for transport plans and
// Gini splits, direct double loops for kernel statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "ganids/matrix.hpp"
#include "ganids/neuralnet.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// finite differences
// ---------------------------------------------------------------------------

// Central finite differences of an arbitrary scalar functional of the net,
// over every parameter.
inline ganids::Gradients finite_diff_grads(
    const ganids::Mlp& net, const std::function<double(const ganids::Mlp&)>& loss,
    double h = 1e-5) {
    ganids::Mlp work = net;
    ganids::Gradients fd = ganids::Gradients::zeros_like(net);
    for (std::size_t li = 0; li < work.layers.size(); ++li) {
        auto& w = work.layers[li].w.data;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double keep = w[i];
            w[i] = keep + h;
            double up = loss(work);
            w[i] = keep - h;
            double dn = loss(work);
            w[i] = keep;
            fd.dw[li].data[i] = (up - dn) / (2.0 * h);
        }
        auto& b = work.layers[li].b;
        for (std::size_t i = 0; i < b.size(); ++i) {
            double keep = b[i];
            b[i] = keep + h;
            double up = loss(work);
            b[i] = keep - h;
            double dn = loss(work);
            b[i] = keep;
            fd.db[li][i] = (up - dn) / (2.0 * h);
        }
    }
    return fd;
}

// relative disagreement with an absolute floor so exactly-zero gradients
// (dead relu units) compare cleanly
inline double rel_err(double a, double b, double floor_ = 1e-5) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_});
}

inline double max_grad_rel_err(const ganids::Gradients& a, const ganids::Gradients& b,
                               bool include_bias = true, double floor_ = 1e-5) {
    double worst = 0.0;
    for (std::size_t li = 0; li < a.dw.size(); ++li) {
        for (std::size_t i = 0; i < a.dw[li].data.size(); ++i)
            worst = std::max(worst, rel_err(a.dw[li].data[i], b.dw[li].data[i], floor_));
        if (include_bias)
            for (std::size_t i = 0; i < a.db[li].size(); ++i)
                worst = std::max(worst, rel_err(a.db[li][i], b.db[li][i], floor_));
    }
    return worst;
}

// smallest |preactivation| across a forward pass; used to re-draw probe
// points that sit on a relu kink
inline double min_abs_preactivation(const ganids::Mlp& net, const ganids::Matrix& batch) {
    ganids::ForwardCache c = ganids::forward(net, batch, false);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : c.preacts)
        for (double v : z.data) m = std::min(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------------------
// exact transport cost by exhaustive enumeration (integer masses)
// ---------------------------------------------------------------------------

// Enumerates every integer-valued transport plan between integer supplies and
// demands and returns the minimum cost plan's cost, summing costs in row-major
// order. Feasible only for tiny instances.
inline double emd_enumerate(const std::vector<long>& supply, const std::vector<long>& demand,
                            const ganids::Matrix& dist) {
    const std::size_t m = supply.size(), n = demand.size();
    std::vector<long> plan(m * n, 0);
    std::vector<long> rem_d = demand;
    double best = std::numeric_limits<double>::infinity();

    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == m) {
            for (long r : rem_d)
                if (r != 0) return;
            double cost = 0.0;
            for (std::size_t a = 0; a < m; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    cost += dist(a, b) * static_cast<double>(plan[a * n + b]);
            best = std::min(best, cost);
            return;
        }
        // distribute supply[i] over the n demand bins
        std::function<void(std::size_t, long)> fill = [&](std::size_t j, long left) {
            if (j == n - 1) {
                if (left <= rem_d[j]) {
                    plan[i * n + j] = left;
                    rem_d[j] -= left;
                    rec(i + 1);
                    rem_d[j] += left;
                    plan[i * n + j] = 0;
                }
                return;
            }
            long cap = std::min(left, rem_d[j]);
            for (long take = 0; take <= cap; ++take) {
                plan[i * n + j] = take;
                rem_d[j] -= take;
                fill(j + 1, left - take);
                rem_d[j] += take;
                plan[i * n + j] = 0;
            }
        };
        fill(0, supply[i]);
    };
    rec(0);
    return best;
}

// ---------------------------------------------------------------------------
// quadratic-loop kernel statistic
// ---------------------------------------------------------------------------

inline double mmd_double_loop(const ganids::Matrix& a, const ganids::Matrix& b, double bandwidth) {
    auto k = [&](std::size_t i, const ganids::Matrix& x, std::size_t j, const ganids::Matrix& y) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < x.cols; ++c) {
            double d = x(i, c) - y(j, c);
            d2 += d * d;
        }
        return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    };
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.rows; ++j) t1 += k(i, a, j, a);
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) t2 += k(i, b, j, b);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.rows; ++j) t3 += k(i, a, j, b);
    double m = static_cast<double>(a.rows), n = static_cast<double>(b.rows);
    return t1 / (m * m) + t2 / (n * n) - 2.0 * t3 / (m * n);
}

// ---------------------------------------------------------------------------
// exhaustive Gini root-split search
// ---------------------------------------------------------------------------

struct GiniSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

inline double gini_of(const std::vector<std::uint32_t>& labels, std::uint32_t n_classes) {
    if (labels.empty()) return 0.0;
    std::vector<double> cnt(n_classes, 0.0);
    for (auto l : labels) cnt[l] += 1.0;
    double g = 1.0;
    for (double c : cnt) {
        double p = c / static_cast<double>(labels.size());
        g -= p * p;
    }
    return g;
}

// every feature, every midpoint between consecutive distinct sorted values;
// first-best kept on ties scanning features ascending, thresholds ascending
inline GiniSplit best_split_bruteforce(const ganids::Matrix& x,
                                       const std::vector<std::uint32_t>& y,
                                       std::uint32_t n_classes) {
    GiniSplit best;
    const double tol = 1e-12;
    for (std::size_t f = 0; f < x.cols; ++f) {
        std::vector<double> vals;
        for (std::size_t r = 0; r < x.rows; ++r) vals.push_back(x(r, f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            double thr = (vals[i] + vals[i + 1]) / 2.0;
            std::vector<std::uint32_t> left, right;
            for (std::size_t r = 0; r < x.rows; ++r)
                (x(r, f) <= thr ? left : right).push_back(y[r]);
            double w = (static_cast<double>(left.size()) * gini_of(left, n_classes) +
                        static_cast<double>(right.size()) * gini_of(right, n_classes)) /
                       static_cast<double>(x.rows);
            if (w < best.impurity - tol) {
                best.found = true;
                best.feature = f;
                best.threshold = thr;
                best.impurity = w;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// largest-remainder apportionment property check
// ---------------------------------------------------------------------------

// Verifies counts against the largest-remainder characterization: sum equals
// the independently computed target, every count is floor or floor+1 of its
// quota, and no segment with a strictly larger remainder (or equal remainder
// and lower index) was denied an extra unit that a smaller one received.
inline bool check_largest_remainder(const std::vector<std::size_t>& sizes, double k,
                                    const std::vector<std::size_t>& counts) {
    if (sizes.size() != counts.size()) return false;
    long double total = 0.0L;
    for (auto s : sizes) total += static_cast<long double>(s);
    long long target = std::llround(static_cast<double>(total) * k);
    long long got = 0;
    for (auto c : counts) got += static_cast<long long>(c);
    if (got != target) return false;

    std::vector<double> quota(sizes.size()), rem(sizes.size());
    std::vector<long long> base(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        quota[i] = k * static_cast<double>(sizes[i]);
        base[i] = static_cast<long long>(std::floor(quota[i]));
        rem[i] = quota[i] - static_cast<double>(base[i]);
    }
    std::vector<int> extra(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        long long c = static_cast<long long>(counts[i]);
        if (c != base[i] && c != base[i] + 1) return false;
        extra[i] = static_cast<int>(c - base[i]);
    }
    for (std::size_t i = 0; i < sizes.size(); ++i)
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            if (extra[i] == 0 && extra[j] == 1) {
                if (rem[i] > rem[j]) return false;
                if (rem[i] == rem[j] && i < j) return false;
            }
        }
    return true;
}

// ---------------------------------------------------------------------------
// independent confusion recount
// ---------------------------------------------------------------------------

struct RecountMetrics {
    std::vector<double> precision, recall, f1;
    double accuracy = 0.0;
};

inline RecountMetrics recount(const std::vector<std::uint32_t>& pred,
                              const std::vector<std::uint32_t>& truth, std::uint32_t n_classes) {
    RecountMetrics m;
    m.precision.assign(n_classes, 0.0);
    m.recall.assign(n_classes, 0.0);
    m.f1.assign(n_classes, 0.0);
    std::size_t correct = 0;
    for (std::uint32_t c = 0; c < n_classes; ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (pred[i] == c && truth[i] == c) ++tp;
            if (pred[i] == c && truth[i] != c) ++fp;
            if (pred[i] != c && truth[i] == c) ++fn;
        }
        m.precision[c] = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall[c] = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.f1[c] = (m.precision[c] + m.recall[c]) > 0.0
                      ? 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c])
                      : 0.0;
    }
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    m.accuracy = pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
    return m;
}

}  // namespace oracles
