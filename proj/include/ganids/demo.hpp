#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ganids/dataio.hpp"
#include "ganids/harness.hpp"
#include "ganids/matrix.hpp"
#include "ganids/rng.hpp"

namespace ganids {

// Synthetic desk-scale flow dataset: four well-populated classes plus one
// scarce class ("Botnet", 200 rows) whose structure mirrors the segmentation
// assumptions: a dominant port, a low-cardinality flag column, and narrow
// per-segment clusters. A slice of the benign class ("impostors") shares the
// scarce class's discrete signature and crowds its clusters at ~1.6x the
// spread, so the scarce region is only won once its training density beats
// the impostors'. That keeps the baseline weak on the scarce class and gives
// augmentation real headroom. No single column separates the class.
//
// Column layout:
//   dst_port     shared across classes (benign also uses 8080/6667)
//   proto_flag   {0,1,2}, segment marker within the scarce class
//   duration, fwd_len, bwd_len, iat_mean, pkt_rate   informative continuous
//   win_bytes    low-cardinality with shared values
//   noise_a..d   uninformative U[0,1]
namespace demo_detail {

// centers of the three scarce-class segments in the continuous columns
inline double segment_shift(int seg) { return seg == 0 ? 0.0 : seg == 1 ? 0.12 : 0.24; }

}  // namespace demo_detail

inline CleanDataset make_mini_dataset(std::uint64_t seed, std::size_t benign_rows = 3600,
                                      std::size_t mid_rows = 700,
                                      std::size_t scarce_rows = 200) {
    Rng rng(derive_seed(seed, "mini-dataset"));
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;

    auto noise4 = [&](std::vector<double>& r) {
        for (int i = 0; i < 4; ++i) r.push_back(rng.uniform());
    };
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

    auto cluster_row = [&](int seg, double sigma, double port, double flag,
                           double win) {
        double s = demo_detail::segment_shift(seg);
        std::vector<double> r{port,
                              flag,
                              clamp01(0.46 + s + sigma * rng.normal()),
                              clamp01(0.34 + s + sigma * rng.normal()),
                              clamp01(0.58 - s + sigma * rng.normal()),
                              clamp01(0.42 + s + sigma * rng.normal()),
                              clamp01(0.52 + 1.5 * sigma * rng.normal()),
                              win};
        noise4(r);
        return r;
    };
    auto segment_discrete = [&](int seg, double& port, double& flag, double& win) {
        if (seg == 2) {
            port = 6667.0;
            flag = 0.0;
            win = 128.0;
        } else {
            port = 8080.0;
            flag = seg == 0 ? 1.0 : 2.0;
            win = 256.0;
        }
    };

    // Benign: impostors crowd the scarce segments, the rest is background
    // covering every column value so nothing is a giveaway.
    std::size_t impostors = std::min(benign_rows * 15 / 100, benign_rows);
    for (std::size_t i = 0; i < impostors; ++i) {
        int seg = static_cast<int>(rng.index(3));
        double port, flag, win;
        segment_discrete(seg, port, flag, win);
        rows.push_back(cluster_row(seg, 0.056, port, flag, win));
        labels.push_back("Benign");
    }
    const double benign_ports[] = {80, 443, 53, 22, 8080, 6667};
    const double benign_port_w[] = {0.30, 0.25, 0.20, 0.10, 0.12, 0.03};
    for (std::size_t i = impostors; i < benign_rows; ++i) {
        double u = rng.uniform(), port = 80;
        double acc = 0.0;
        for (int p = 0; p < 6; ++p) {
            acc += benign_port_w[p];
            if (u < acc) {
                port = benign_ports[p];
                break;
            }
        }
        std::vector<double> r{port,
                              static_cast<double>(rng.index(3)),
                              clamp01(rng.uniform()),
                              clamp01(rng.uniform()),
                              clamp01(rng.uniform()),
                              clamp01(rng.uniform()),
                              clamp01(rng.uniform()),
                              static_cast<double>(64 << rng.index(4))};
        noise4(r);
        rows.push_back(std::move(r));
        labels.push_back("Benign");
    }

    // three mid-size attack classes with their own loose signatures
    for (std::size_t i = 0; i < mid_rows; ++i) {
        std::vector<double> r{rng.bernoulli(0.7) ? 80.0 : 443.0,
                              static_cast<double>(rng.index(2)),
                              clamp01(0.85 + 0.05 * rng.normal()),
                              clamp01(0.2 + 0.1 * rng.normal()),
                              clamp01(0.15 + 0.1 * rng.normal()),
                              clamp01(0.1 + 0.05 * rng.normal()),
                              clamp01(0.9 + 0.05 * rng.normal()),
                              static_cast<double>(64 << rng.index(2))};
        noise4(r);
        rows.push_back(std::move(r));
        labels.push_back("DoS");
    }
    for (std::size_t i = 0; i < mid_rows; ++i) {
        std::vector<double> r{static_cast<double>(1 + rng.index(1024)),
                              0.0,
                              clamp01(0.05 + 0.04 * rng.normal()),
                              clamp01(0.05 + 0.04 * rng.normal()),
                              clamp01(0.05 + 0.04 * rng.normal()),
                              clamp01(rng.uniform()),
                              clamp01(0.5 + 0.2 * rng.normal()),
                              static_cast<double>(64 << rng.index(4))};
        noise4(r);
        rows.push_back(std::move(r));
        labels.push_back("Probe");
    }
    for (std::size_t i = 0; i < mid_rows; ++i) {
        std::vector<double> r{rng.bernoulli(0.6) ? 22.0 : 21.0,
                              1.0,
                              clamp01(0.4 + 0.15 * rng.normal()),
                              clamp01(0.3 + 0.1 * rng.normal()),
                              clamp01(0.6 + 0.1 * rng.normal()),
                              clamp01(0.5 + 0.15 * rng.normal()),
                              clamp01(0.3 + 0.1 * rng.normal()),
                              static_cast<double>(64 << rng.index(3))};
        noise4(r);
        rows.push_back(std::move(r));
        labels.push_back("BruteForce");
    }

    // scarce class: two ports; the 8080 side splits again on proto_flag.
    // Narrow clusters at the same centers the impostors crowd.
    for (std::size_t i = 0; i < scarce_rows; ++i) {
        bool on_8080 = rng.bernoulli(0.65);
        int seg = on_8080 ? (rng.bernoulli(0.5) ? 0 : 1) : 2;
        double port, flag, win;
        segment_discrete(seg, port, flag, win);
        rows.push_back(cluster_row(seg, 0.035, port, flag, win));
        labels.push_back("Botnet");
    }

    std::vector<std::string> names{"dst_port", "proto_flag", "duration",  "fwd_len",
                                   "bwd_len",  "iat_mean",   "pkt_rate",  "win_bytes",
                                   "noise_a",  "noise_b",    "noise_c",   "noise_d"};

    // assemble a CleanDataset with the standard sorted class table
    CleanDataset ds;
    ds.feature_names = std::move(names);
    ds.features = Matrix(rows.size(), 12);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < 12; ++c) ds.features(r, c) = rows[r][c];
    std::map<std::string, std::uint32_t> ids;
    for (const auto& l : labels) ids.emplace(l, 0);
    for (auto& [name, id] : ids) {
        id = static_cast<std::uint32_t>(ds.class_names.size());
        ds.class_names.push_back(name);
    }
    ds.class_counts.assign(ds.class_names.size(), 0);
    for (const auto& l : labels) {
        ds.labels.push_back(ids[l]);
        ++ds.class_counts[ids[l]];
    }
    return ds;
}

// Harness/GAN settings sized for the mini dataset.
inline HarnessConfig mini_harness_config() {
    HarnessConfig cfg;
    cfg.top_k = 12;
    cfg.target_class = "Botnet";
    cfg.port_column = "dst_port";
    cfg.port_value = 8080.0;
    cfg.min_segment_size = 30;
    cfg.benign_pool_size = 2000;
    cfg.forest.n_trees = 60;
    return cfg;
}

inline GanSpec mini_gan_spec(GanKind kind) {
    GanSpec s;
    s.kind = kind;
    s.noise_dim = 16;
    s.epochs = 500;
    s.batch_size = 32;
    if (kind == GanKind::ctgan) s.label_dim = 1;
    return s;
}

}  // namespace ganids
