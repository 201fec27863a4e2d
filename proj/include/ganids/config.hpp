#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganids/dataio.hpp"
#include "ganids/error.hpp"
#include "ganids/gan.hpp"
#include "ganids/harness.hpp"
#include "ganids/io.hpp"

namespace ganids {

// Per-kind GAN hyperparameters as stored in the config file.
struct GanConfigBlock {
    std::size_t noise_dim = 32;
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    double learning_rate = 2e-4;
    std::size_t n_critic = 5;
    double clip_value = 0.01;
    double gp_lambda = 10.0;
    double mmd_bandwidth = 0.0;
};

// Flat two-level configuration for the whole pipeline. Every value has a
// default; a JSON config file overlays the defaults and command-line flags
// overlay the file.
struct PipelineConfig {
    std::string label_column = "Label";
    std::string target_class = "Botnet";
    std::string benign_class = "Benign";
    std::string port_column = "Destination Port";
    double port_value = 8080.0;
    std::size_t top_k_features = 32;
    double split_ratio = 0.8;
    std::size_t cardinality_threshold = 3;
    std::size_t min_segment_size = 30;
    std::size_t benign_pool_size = 10000;
    double stability_tolerance = 0.04;
    std::size_t n_trees = 100;

    std::uint64_t seed_gan = 1;
    std::uint64_t seed_split = 2;
    std::uint64_t seed_forest = 3;

    GanConfigBlock vanilla;
    GanConfigBlock wgan;
    GanConfigBlock ctgan;

    std::vector<std::string> similarity_features{
        "Flow Duration",      "Total Length of Fwd Packets",
        "Flow Packets/s",     "Fwd IAT Mean",
        "Bwd IAT Mean",       "Fwd Packets/s",
        "Packet Length Mean", "Init_Win_bytes_backward"};

    std::vector<std::string> experiment_kinds{"vanilla", "wgan", "ctgan"};
    std::vector<double> experiment_multipliers{4.0, 49.0, 99.0};
    std::string experiment_mode = "replace";

    std::vector<std::string> drop_columns;  // metadata columns to strip at ingest
    std::string grouping_file;  // optional JSON: original label -> general class
    std::filesystem::path out_dir = "out";

    GanSpec gan_for(GanKind kind) const {
        const GanConfigBlock& b = kind == GanKind::vanilla ? vanilla
                                  : kind == GanKind::wgan ? wgan
                                                          : ctgan;
        GanSpec s;
        s.kind = kind;
        s.noise_dim = b.noise_dim;
        s.data_dim = 1;  // placeholder; per-segment training sets the real width
        s.epochs = b.epochs;
        s.batch_size = b.batch_size;
        s.learning_rate = b.learning_rate;
        s.n_critic = b.n_critic;
        s.clip_value = b.clip_value;
        s.gp_lambda = b.gp_lambda;
        s.mmd_bandwidth = b.mmd_bandwidth;
        s.seed = seed_gan;
        if (kind == GanKind::ctgan) s.label_dim = 1;
        return s;
    }

    HarnessConfig harness() const {
        HarnessConfig h;
        h.top_k = top_k_features;
        h.split_ratio = split_ratio;
        h.target_class = target_class;
        h.benign_class = benign_class;
        h.port_column = port_column;
        h.port_value = port_value;
        h.cardinality_threshold = cardinality_threshold;
        h.min_segment_size = min_segment_size;
        h.benign_pool_size = benign_pool_size;
        h.forest.n_trees = n_trees;
        return h;
    }

    ClassGrouping grouping() const {
        if (grouping_file.empty()) return default_grouping();
        auto j = nlohmann::json::parse(slurp(grouping_file));
        if (!j.is_object()) throw ConfigError("grouping file must be a JSON object");
        ClassGrouping g;
        for (auto& [key, value] : j.items()) g.mapping[key] = value.get<std::string>();
        return g;
    }
};

namespace detail {

inline void overlay_gan_block(GanConfigBlock& b, const nlohmann::json& j) {
    if (j.contains("noise_dim")) b.noise_dim = j["noise_dim"].get<std::size_t>();
    if (j.contains("epochs")) b.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) b.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("learning_rate")) b.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("n_critic")) b.n_critic = j["n_critic"].get<std::size_t>();
    if (j.contains("clip_value")) b.clip_value = j["clip_value"].get<double>();
    if (j.contains("gp_lambda")) b.gp_lambda = j["gp_lambda"].get<double>();
    if (j.contains("mmd_bandwidth")) b.mmd_bandwidth = j["mmd_bandwidth"].get<double>();
}

}  // namespace detail

// "--set a.b=value" overrides, applied on top of the config file. Values are
// parsed as JSON when possible, otherwise taken as strings; paths nest at
// most two levels, matching the document shape.
inline nlohmann::json parse_overrides(const std::vector<std::string>& sets) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error&) {
            value = raw;  // bare string
        }
        auto dot = key.find('.');
        if (dot == std::string::npos) {
            j[key] = value;
        } else {
            std::string outer = key.substr(0, dot), inner = key.substr(dot + 1);
            if (inner.find('.') != std::string::npos)
                throw ConfigError("--set paths nest at most two levels: " + kv);
            j[outer][inner] = value;
        }
    }
    return j;
}

inline PipelineConfig load_config(const std::string& path,
                                  const std::vector<std::string>& overrides = {}) {
    PipelineConfig cfg;
    nlohmann::json file_doc;
    if (!path.empty()) {
        try {
            file_doc = nlohmann::json::parse(slurp(path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file " + path + ": " + e.what());
        }
    }
    nlohmann::json extra = parse_overrides(overrides);
    file_doc.merge_patch(extra.is_null() ? nlohmann::json::object() : extra);
    {
        const nlohmann::json& j = file_doc;
        auto str = [&](const char* key, std::string& field) {
            if (j.contains(key)) field = j[key].get<std::string>();
        };
        auto num = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
        };
        str("label_column", cfg.label_column);
        str("target_class", cfg.target_class);
        str("benign_class", cfg.benign_class);
        str("port_column", cfg.port_column);
        num("port_value", cfg.port_value);
        num("top_k_features", cfg.top_k_features);
        num("split_ratio", cfg.split_ratio);
        num("cardinality_threshold", cfg.cardinality_threshold);
        num("min_segment_size", cfg.min_segment_size);
        num("benign_pool_size", cfg.benign_pool_size);
        num("stability_tolerance", cfg.stability_tolerance);
        num("n_trees", cfg.n_trees);
        if (j.contains("seeds")) {
            const auto& s = j["seeds"];
            if (s.contains("gan")) cfg.seed_gan = s["gan"].get<std::uint64_t>();
            if (s.contains("split")) cfg.seed_split = s["split"].get<std::uint64_t>();
            if (s.contains("forest")) cfg.seed_forest = s["forest"].get<std::uint64_t>();
        }
        if (j.contains("vanilla")) detail::overlay_gan_block(cfg.vanilla, j["vanilla"]);
        if (j.contains("wgan")) detail::overlay_gan_block(cfg.wgan, j["wgan"]);
        if (j.contains("ctgan")) detail::overlay_gan_block(cfg.ctgan, j["ctgan"]);
        if (j.contains("similarity_features"))
            cfg.similarity_features = j["similarity_features"].get<std::vector<std::string>>();
        if (j.contains("experiment_kinds"))
            cfg.experiment_kinds = j["experiment_kinds"].get<std::vector<std::string>>();
        if (j.contains("experiment_multipliers"))
            cfg.experiment_multipliers = j["experiment_multipliers"].get<std::vector<double>>();
        str("experiment_mode", cfg.experiment_mode);
        if (j.contains("drop_columns"))
            cfg.drop_columns = j["drop_columns"].get<std::vector<std::string>>();
        str("grouping_file", cfg.grouping_file);
        if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    }
    if (const char* env = std::getenv("GANIDS_OUT_DIR"); env && *env) cfg.out_dir = env;
    return cfg;
}

// referenced paths must resolve before any work starts; "identity" is the
// built-in no-op grouping, not a path
inline void validate_paths(const PipelineConfig& cfg) {
    if (!cfg.grouping_file.empty() && cfg.grouping_file != "identity" &&
        !std::filesystem::exists(cfg.grouping_file))
        throw ConfigError("grouping file does not exist: " + cfg.grouping_file);
}

}  // namespace ganids
