#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ganids/dataio.hpp"
#include "ganids/error.hpp"
#include "ganids/gan.hpp"
#include "ganids/preprocess.hpp"

namespace ganids {

// One predicate condition: column value in (or not in) a value set.
struct SegmentCondition {
    std::string column;
    std::vector<double> values;
    bool negated = false;

    bool matches(double v) const {
        bool in = std::find(values.begin(), values.end(), v) != values.end();
        return negated ? !in : in;
    }
};

struct Segment {
    std::string id;
    std::vector<SegmentCondition> predicate;
    std::vector<std::size_t> row_indices;            // empty on plans loaded from disk
    std::size_t rows_count = 0;
    std::map<std::string, double> constant_columns;  // single-valued within the segment
};

struct SegmentationPlan {
    std::string source_class;
    std::string port_column;
    double port_value = 8080.0;
    std::size_t total_rows = 0;
    std::vector<Segment> segments;
};

// ---------------------------------------------------------------------------
// plan construction
// ---------------------------------------------------------------------------

namespace detail {

struct SubSplit {
    std::size_t column = 0;
    std::vector<double> values;              // distinct values ascending
    std::vector<std::vector<std::size_t>> parts;
};

// Candidate sub-split columns hold between 2 and cardinality_threshold
// distinct values inside the segment and never cut a part below min_size.
// Preference order: fewer distinct values, then the most balanced partition
// (largest smallest-part), then column index.
inline bool find_sub_split(const CleanDataset& ds, const std::vector<std::size_t>& rows,
                           std::size_t cardinality_threshold, std::size_t min_size,
                           SubSplit& out) {
    bool found = false;
    std::size_t best_distinct = 0, best_min_part = 0;
    for (std::size_t col = 0; col < ds.n_features(); ++col) {
        std::map<double, std::vector<std::size_t>> groups;
        for (std::size_t r : rows) groups[ds.features(r, col)].push_back(r);
        if (groups.size() < 2 || groups.size() > cardinality_threshold) continue;
        std::size_t min_part = rows.size();
        for (const auto& [v, g] : groups) min_part = std::min(min_part, g.size());
        if (min_part < min_size) continue;
        bool better = !found || groups.size() < best_distinct ||
                      (groups.size() == best_distinct && min_part > best_min_part);
        if (better) {
            found = true;
            best_distinct = groups.size();
            best_min_part = min_part;
            out.column = col;
            out.values.clear();
            out.parts.clear();
            for (auto& [v, g] : groups) {
                out.values.push_back(v);
                out.parts.push_back(std::move(g));
            }
        }
    }
    return found;
}

inline void record_constants(const CleanDataset& ds, Segment& seg) {
    for (std::size_t col = 0; col < ds.n_features(); ++col) {
        double first = ds.features(seg.row_indices.front(), col);
        bool constant = true;
        for (std::size_t r : seg.row_indices)
            if (ds.features(r, col) != first) {
                constant = false;
                break;
            }
        if (constant) seg.constant_columns.emplace(ds.feature_names[col], first);
    }
}

inline void split_recursive(const CleanDataset& ds, std::vector<std::size_t> rows,
                            std::vector<SegmentCondition> predicate,
                            std::size_t cardinality_threshold, std::size_t min_size,
                            std::vector<Segment>& out) {
    SubSplit sub;
    if (rows.size() >= 2 * min_size &&
        find_sub_split(ds, rows, cardinality_threshold, min_size, sub)) {
        for (std::size_t p = 0; p < sub.parts.size(); ++p) {
            auto pred = predicate;
            pred.push_back({ds.feature_names[sub.column], {sub.values[p]}, false});
            split_recursive(ds, std::move(sub.parts[p]), std::move(pred),
                            cardinality_threshold, min_size, out);
        }
        return;
    }
    Segment seg;
    seg.id = "s" + std::to_string(out.size());
    seg.predicate = std::move(predicate);
    seg.row_indices = std::move(rows);
    seg.rows_count = seg.row_indices.size();
    record_constants(ds, seg);
    out.push_back(std::move(seg));
}

}  // namespace detail

// Split the target class on the port column first (port_value side, then the
// rest), then greedily sub-split on low-cardinality columns. Deterministic.
inline SegmentationPlan build_plan(const CleanDataset& ds, const std::string& class_name,
                                   const std::string& port_column,
                                   std::size_t cardinality_threshold = 3,
                                   std::size_t min_segment_size = 30,
                                   double port_value = 8080.0) {
    SegmentationPlan plan;
    plan.source_class = class_name;
    plan.port_column = port_column;
    plan.port_value = port_value;

    auto cid = ds.find_class(class_name);
    if (!cid) throw DataError("class not present in dataset: " + class_name);
    std::vector<std::size_t> rows = ds.rows_of_class(*cid);
    if (rows.empty()) throw DataError("class is empty: " + class_name);
    plan.total_rows = rows.size();

    std::size_t port_idx = ds.feature_index(port_column);
    std::vector<std::size_t> port_side, other_side;
    for (std::size_t r : rows)
        (ds.features(r, port_idx) == port_value ? port_side : other_side).push_back(r);

    if (!port_side.empty())
        detail::split_recursive(ds, std::move(port_side),
                                {{port_column, {port_value}, false}},
                                cardinality_threshold, min_segment_size, plan.segments);
    if (!other_side.empty())
        detail::split_recursive(ds, std::move(other_side),
                                {{port_column, {port_value}, true}},
                                cardinality_threshold, min_segment_size, plan.segments);
    return plan;
}

// ---------------------------------------------------------------------------
// proportional apportionment (largest remainder)
// ---------------------------------------------------------------------------

// Integer counts per segment so that count_i is floor or ceil of k*size_i and
// the total equals round(k * sum(sizes)); leftovers go to the largest
// fractional remainders, ties to the lower index.
inline std::vector<std::size_t> proportional_counts(const std::vector<std::size_t>& sizes,
                                                    double k) {
    if (k <= 0.0) throw ConfigError("multiplier k must be positive");
    long double total = 0.0L;
    for (auto s : sizes) total += static_cast<long double>(s);
    long long target = std::llround(static_cast<double>(total) * k);

    std::vector<std::size_t> counts(sizes.size());
    std::vector<std::pair<double, std::size_t>> remainders(sizes.size());
    long long assigned = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        double quota = k * static_cast<double>(sizes[i]);
        double base = std::floor(quota);
        counts[i] = static_cast<std::size_t>(base);
        assigned += static_cast<long long>(base);
        remainders[i] = {quota - base, i};
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    long long leftover = target - assigned;
    for (std::size_t i = 0; leftover > 0 && i < remainders.size(); ++i, --leftover)
        ++counts[remainders[i].second];
    return counts;
}

// ---------------------------------------------------------------------------
// per-segment training and generation
// ---------------------------------------------------------------------------

struct SyntheticRows {
    std::vector<std::string> feature_names;
    Matrix rows;
    std::string class_name;
};

// Train one generator per segment over the selected feature subset. Constant
// columns are excluded from the learned dimensionality; scalers are fitted on
// the segment's own rows. Segments train independently, in parallel.
inline std::vector<TrainedGenerator> train_per_segment(
    const SegmentationPlan& plan, const CleanDataset& ds, const GanSpec& base_spec,
    const std::vector<std::size_t>& selected_features) {
    for (const auto& seg : plan.segments) {
        if (seg.row_indices.empty())
            throw DataError("plan has no row indices (loaded from disk?); rebuild it");
    }

    std::vector<std::future<TrainedGenerator>> jobs;
    for (std::size_t si = 0; si < plan.segments.size(); ++si) {
        jobs.push_back(std::async(std::launch::async, [&, si] {
            const Segment& seg = plan.segments[si];
            std::vector<std::size_t> varying;
            std::vector<std::string> names;
            for (std::size_t f : selected_features) {
                if (!seg.constant_columns.count(ds.feature_names[f])) {
                    varying.push_back(f);
                    names.push_back(ds.feature_names[f]);
                }
            }
            if (varying.empty())
                throw DataError("segment " + seg.id + " has no varying selected features");

            Matrix seg_rows = take_rows(ds.features, seg.row_indices);
            Matrix x = take_cols(seg_rows, varying);
            ScalerParams scaler = fit_scaler(x);
            Matrix scaled = apply_scaler(x, scaler);

            GanSpec spec = base_spec;
            spec.data_dim = varying.size();
            spec.seed = derive_seed(base_spec.seed, "segment:" + seg.id);
            if (spec.kind == GanKind::ctgan) spec.label_dim = 1;

            TrainedGenerator gen;
            if (spec.kind == GanKind::ctgan) {
                Matrix labels(scaled.rows, 1, 1.0);  // single class, degenerate one-hot
                gen = train(spec, scaled, &labels);
                gen.label_names = {plan.source_class};
            } else {
                gen = train(spec, scaled);
            }
            gen.scaler = std::move(scaler);
            gen.feature_names = std::move(names);
            gen.segment_id = seg.id;
            return gen;
        }));
    }
    std::vector<TrainedGenerator> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

// Segment sizes for training preconditions.
inline void check_minimum_sizes(const SegmentationPlan& plan, std::size_t min_size) {
    for (const auto& seg : plan.segments) {
        std::size_t n = seg.row_indices.empty() ? seg.rows_count : seg.row_indices.size();
        if (n < min_size)
            throw DataError("segment " + seg.id + " has " + std::to_string(n) +
                            " rows, below the minimum " + std::to_string(min_size) +
                            "; rebuild the plan with a larger minimum segment size "
                            "(or a smaller cardinality threshold) so segments stay trainable");
    }
}

// Sample round(k * |segment|) rows per segment (largest-remainder corrected),
// re-inject the segment's constant columns verbatim, and label everything
// with the source class.
inline SyntheticRows generate_proportional(const SegmentationPlan& plan,
                                           const std::vector<TrainedGenerator>& generators,
                                           double k,
                                           const std::vector<std::string>& output_features) {
    if (generators.size() != plan.segments.size())
        throw DataError("need one trained generator per segment: have " +
                        std::to_string(generators.size()) + " for " +
                        std::to_string(plan.segments.size()) + " segments");

    std::vector<std::size_t> sizes;
    for (const auto& seg : plan.segments)
        sizes.push_back(seg.row_indices.empty() ? seg.rows_count : seg.row_indices.size());
    std::vector<std::size_t> counts = proportional_counts(sizes, k);

    SyntheticRows out;
    out.feature_names = output_features;
    out.class_name = plan.source_class;
    std::size_t total = 0;
    for (auto c : counts) total += c;
    out.rows = Matrix(total, output_features.size());

    std::size_t row0 = 0;
    for (std::size_t si = 0; si < plan.segments.size(); ++si) {
        if (counts[si] == 0) continue;
        const Segment& seg = plan.segments[si];
        const TrainedGenerator& gen = generators[si];
        if (!gen.segment_id.empty() && gen.segment_id != seg.id)
            throw DataError("generator bound to segment " + gen.segment_id +
                            " used for segment " + seg.id);
        Matrix sampled =
            gen.spec.kind == GanKind::ctgan
                ? sample(gen, counts[si], plan.source_class)
                : sample(gen, counts[si]);

        for (std::size_t c = 0; c < output_features.size(); ++c) {
            const std::string& name = output_features[c];
            auto gen_it = std::find(gen.feature_names.begin(), gen.feature_names.end(), name);
            if (gen_it != gen.feature_names.end()) {
                std::size_t gc = static_cast<std::size_t>(gen_it - gen.feature_names.begin());
                for (std::size_t r = 0; r < counts[si]; ++r)
                    out.rows(row0 + r, c) = sampled(r, gc);
            } else {
                auto const_it = seg.constant_columns.find(name);
                if (const_it == seg.constant_columns.end())
                    throw DataError("feature '" + name + "' is neither generated nor constant in segment " + seg.id);
                for (std::size_t r = 0; r < counts[si]; ++r)
                    out.rows(row0 + r, c) = const_it->second;
            }
        }
        row0 += counts[si];
    }
    return out;
}

// ---------------------------------------------------------------------------
// plan document (human-readable, for audit and the generate command)
// ---------------------------------------------------------------------------

inline void write_plan(std::ostream& os, const SegmentationPlan& plan) {
    os << "ganids.plan v1\n";
    os << "class " << plan.source_class << "\n";
    os << "port_column " << plan.port_column << "\n";
    os << "port_value " << fmt_double(plan.port_value) << "\n";
    os << "total_rows " << plan.total_rows << "\n";
    os << "n_segments " << plan.segments.size() << "\n";
    for (const auto& seg : plan.segments) {
        os << "segment " << seg.id << "\n";
        os << "rows " << (seg.row_indices.empty() ? seg.rows_count : seg.row_indices.size())
           << "\n";
        os << "n_conditions " << seg.predicate.size() << "\n";
        for (const auto& cond : seg.predicate) {
            os << "condition " << (cond.negated ? "notin" : "in") << " " << cond.column << " |";
            for (double v : cond.values) os << " " << fmt_double(v);
            os << "\n";
        }
        os << "n_constants " << seg.constant_columns.size() << "\n";
        for (const auto& [col, v] : seg.constant_columns)
            os << "constant " << col << " | " << fmt_double(v) << "\n";
    }
}

namespace detail {

inline std::string plan_line(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("truncated plan document");
    if (line.rfind(key + " ", 0) != 0)
        throw DataError("plan document: expected '" + key + "', got '" + line + "'");
    return line.substr(key.size() + 1);
}

}  // namespace detail

inline SegmentationPlan read_plan(std::istream& is) {
    std::string header;
    std::getline(is, header);
    if (header != "ganids.plan v1") throw DataError("not a plan document");
    SegmentationPlan plan;
    plan.source_class = detail::plan_line(is, "class");
    plan.port_column = detail::plan_line(is, "port_column");
    plan.port_value = std::stod(detail::plan_line(is, "port_value"));
    plan.total_rows = std::stoull(detail::plan_line(is, "total_rows"));
    std::size_t n_segments = std::stoull(detail::plan_line(is, "n_segments"));
    for (std::size_t s = 0; s < n_segments; ++s) {
        Segment seg;
        seg.id = detail::plan_line(is, "segment");
        seg.rows_count = std::stoull(detail::plan_line(is, "rows"));
        std::size_t n_cond = std::stoull(detail::plan_line(is, "n_conditions"));
        for (std::size_t c = 0; c < n_cond; ++c) {
            std::string line = detail::plan_line(is, "condition");
            SegmentCondition cond;
            std::size_t sp = line.find(' ');
            cond.negated = line.substr(0, sp) == "notin";
            std::size_t bar = line.find(" |", sp);
            if (bar == std::string::npos) throw DataError("malformed condition line");
            cond.column = line.substr(sp + 1, bar - sp - 1);
            std::istringstream vals(line.substr(bar + 2));
            double v;
            while (vals >> v) cond.values.push_back(v);
            seg.predicate.push_back(std::move(cond));
        }
        std::size_t n_const = std::stoull(detail::plan_line(is, "n_constants"));
        for (std::size_t c = 0; c < n_const; ++c) {
            std::string line = detail::plan_line(is, "constant");
            std::size_t bar = line.find(" | ");
            if (bar == std::string::npos) throw DataError("malformed constant line");
            seg.constant_columns.emplace(line.substr(0, bar), std::stod(line.substr(bar + 3)));
        }
        plan.segments.push_back(std::move(seg));
    }
    return plan;
}

}  // namespace ganids
