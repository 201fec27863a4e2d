// Command-line front end for the flow-dataset augmentation pipeline:
// ingest -> baseline -> train-gan -> generate -> eval-similarity ->
// experiment -> report, plus synth-demo for a self-contained walkthrough.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ganids/ganids.hpp"

namespace fs = std::filesystem;
using namespace ganids;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string cache_path;
    std::string out_dir;  // flag override; empty means config value
    std::vector<std::string> sets;  // generic key=value config overrides
};

PipelineConfig resolve_config(const CommonOpts& o) {
    PipelineConfig cfg = load_config(o.config_path, o.sets);
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    validate_paths(cfg);
    return cfg;
}

fs::path cache_path(const CommonOpts& o, const PipelineConfig& cfg) {
    return o.cache_path.empty() ? cfg.out_dir / "cache.bin" : fs::path(o.cache_path);
}

// cache stores the cleaned, pre-grouping dataset; grouping is applied on load
CleanDataset load_grouped(const fs::path& cache, const PipelineConfig& cfg) {
    if (!fs::exists(cache))
        throw DataError("cache not found at " + cache.string() + "; run `ganids ingest` first");
    CleanDataset cleaned = load_cache(cache);
    if (cfg.grouping_file == "identity") return cleaned;
    return regroup_labels(cleaned, cfg.grouping());
}

void print_counts(const std::string& title, const CleanDataset& ds) {
    std::cout << title << "\n";
    std::size_t width = 5;
    for (const auto& c : ds.class_names) width = std::max(width, c.size());
    // descending by count, the way the class tables read
    std::vector<std::size_t> order(ds.class_names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.class_counts[a] > ds.class_counts[b];
    });
    for (std::size_t c : order)
        std::cout << "  " << std::left << std::setw(static_cast<int>(width + 2))
                  << ds.class_names[c] << ds.class_counts[c] << "\n";
    std::cout << "  total " << ds.n_rows() << " rows, " << ds.n_features() << " features\n";
}

fs::path gan_dir(const PipelineConfig& cfg, GanKind kind) {
    return cfg.out_dir / (std::string("gan_") + gan_kind_name(kind));
}

std::string multiplier_tag(double k) {
    std::ostringstream ss;
    ss << k;
    std::string s = ss.str();
    for (auto& c : s)
        if (c == '.') c = 'p';
    return s;
}

// selection + plan + per-segment generators as written by train-gan
struct GanArtifacts {
    FeatureSelection selection;
    std::vector<std::string> selected_names;
    SegmentationPlan plan;
    std::vector<TrainedGenerator> generators;
};

GanArtifacts load_gan_artifacts(const PipelineConfig& cfg, GanKind kind) {
    fs::path dir = gan_dir(cfg, kind);
    if (!fs::exists(dir / "plan.txt"))
        throw DataError("no trained generators under " + dir.string() +
                        "; run `ganids train-gan --kind " + gan_kind_name(kind) + "` first");
    GanArtifacts a;
    {
        std::ifstream is(dir / "selection.txt");
        if (!is) throw DataError("missing selection document in " + dir.string());
        a.selection = read_selection(is, &a.selected_names);
    }
    {
        std::ifstream is(dir / "plan.txt");
        a.plan = read_plan(is);
    }
    for (const auto& seg : a.plan.segments)
        a.generators.push_back(load_generator(dir / ("segment_" + seg.id)));
    return a;
}

int cmd_ingest(const CommonOpts& common, const std::string& input_dir,
               const std::string& label_flag, bool force) {
    PipelineConfig cfg = resolve_config(common);
    if (!label_flag.empty()) cfg.label_column = label_flag;
    fs::path cache = cache_path(common, cfg);

    CleanDataset cleaned;
    if (fs::exists(cache) && !force) {
        std::cout << "reusing cache " << cache << "\n";
        cleaned = load_cache(cache);
    } else {
        if (input_dir.empty()) throw ConfigError("--input is required when no cache exists");
        RawFlowTable raw = drop_columns(load_csv_dir(input_dir, cfg.label_column),
                                        cfg.drop_columns);
        std::cout << "parsed " << raw.n_rows() << " rows ("
                  << raw.feature_names.size() << " feature columns)\n";
        cleaned = clean(raw);
        save_cache(cleaned, cache);
        std::cout << "cache written to " << cache << "\n";
    }
    print_counts("class counts after cleaning:", cleaned);
    if (cfg.grouping_file != "identity") {
        CleanDataset grouped = regroup_labels(cleaned, cfg.grouping());
        print_counts("class counts after regrouping:", grouped);
    }
    return 0;
}

int cmd_baseline(const CommonOpts& common, bool save_model) {
    PipelineConfig cfg = resolve_config(common);
    CleanDataset ds = load_grouped(cache_path(common, cfg), cfg);
    BaselineResult base = run_baseline(ds, cfg.harness(), cfg.seed_split, cfg.seed_forest);

    fs::path dir = cfg.out_dir / "baseline";
    atomic_write(dir / "metrics.txt", [&](std::ostream& os) { write_metrics(os, base.report); });
    atomic_write(dir / "selection.txt",
                 [&](std::ostream& os) { write_selection(os, base.selection, ds.feature_names); });
    atomic_write(cfg.out_dir / "experiments" / "baseline.json", [&](std::ostream& os) {
        nlohmann::json j;
        j["report"] = metrics_to_json(base.report);
        j["seeds"] = {{"split", cfg.seed_split}, {"forest", cfg.seed_forest}};
        os << j.dump(2) << "\n";
    });
    if (save_model) {
        atomic_write(dir / "model.bin", [&](std::ostream& os) {
            ForestConfig fc = cfg.harness().forest;
            fc.seed = cfg.seed_forest;
            // refit on the same split for the saved artifact
            FeatureSelection sel = base.selection;
            Matrix x = take_cols(ds.features, sel.selected);
            SplitSpec sp = split(ds, cfg.split_ratio, cfg.seed_split);
            Matrix xtr = take_rows(x, sp.train_indices);
            std::vector<std::uint32_t> ytr;
            for (auto i : sp.train_indices) ytr.push_back(ds.labels[i]);
            Forest f = fit_forest(xtr, ytr, static_cast<std::uint32_t>(ds.class_names.size()), fc);
            write_forest(os, f);
        });
    }
    write_metrics(std::cout, base.report);
    std::cout << "artifacts under " << dir << "\n";
    return 0;
}

int cmd_train_gan(const CommonOpts& common, const std::string& kind_name,
                  const std::string& class_flag) {
    PipelineConfig cfg = resolve_config(common);
    if (!class_flag.empty()) cfg.target_class = class_flag;
    GanKind kind = gan_kind_from_name(kind_name);
    CleanDataset ds = load_grouped(cache_path(common, cfg), cfg);

    FeatureSelection sel = select_top_k(chi2_scores(ds),
                                        std::min(cfg.top_k_features, ds.n_features()));
    SegmentationPlan plan = build_plan(ds, cfg.target_class, cfg.port_column,
                                       cfg.cardinality_threshold, cfg.min_segment_size,
                                       cfg.port_value);
    check_minimum_sizes(plan, cfg.min_segment_size);
    std::cout << "plan: " << plan.segments.size() << " segments over " << plan.total_rows
              << " '" << cfg.target_class << "' rows\n";
    for (const auto& seg : plan.segments)
        std::cout << "  " << seg.id << ": " << seg.row_indices.size() << " rows, "
                  << seg.constant_columns.size() << " constant columns\n";

    std::vector<TrainedGenerator> gens = train_per_segment(plan, ds, cfg.gan_for(kind), sel.selected);

    fs::path dir = gan_dir(cfg, kind);
    atomic_write(dir / "plan.txt", [&](std::ostream& os) { write_plan(os, plan); });
    atomic_write(dir / "selection.txt",
                 [&](std::ostream& os) { write_selection(os, sel, ds.feature_names); });
    for (const auto& g : gens) {
        save_generator(g, dir / ("segment_" + g.segment_id));
        std::cout << "  trained " << g.segment_id << ": data_dim " << g.spec.data_dim
                  << ", final d_loss "
                  << (g.trace.steps() ? g.trace.d_loss.back() : 0.0) << "\n";
    }
    std::cout << "generators written under " << dir << "\n";
    return 0;
}

int cmd_generate(const CommonOpts& common, const std::string& kind_name, double k,
                 const std::string& out_flag) {
    PipelineConfig cfg = resolve_config(common);
    GanKind kind = gan_kind_from_name(kind_name);
    GanArtifacts art = load_gan_artifacts(cfg, kind);

    SyntheticRows synth = generate_proportional(art.plan, art.generators, k, art.selected_names);
    fs::path out = out_flag.empty()
                       ? cfg.out_dir / "synthetic" /
                             (std::string(gan_kind_name(kind)) + "_x" + multiplier_tag(k) + ".csv")
                       : fs::path(out_flag);
    std::vector<std::string> labels(synth.rows.rows, synth.class_name);
    write_csv(synth.feature_names, synth.rows, labels, out, cfg.label_column);
    std::cout << "wrote " << synth.rows.rows << " synthetic '" << synth.class_name
              << "' rows to " << out << "\n";
    return 0;
}

int cmd_eval_similarity(const CommonOpts& common, const std::string& kind_name) {
    PipelineConfig cfg = resolve_config(common);
    GanKind kind = gan_kind_from_name(kind_name);
    CleanDataset ds = load_grouped(cache_path(common, cfg), cfg);
    GanArtifacts art = load_gan_artifacts(cfg, kind);

    SyntheticRows synth = generate_proportional(art.plan, art.generators, 1.0, art.selected_names);
    std::uint32_t target = ds.class_index(cfg.target_class);
    Matrix orig = take_cols(take_rows(ds.features, ds.rows_of_class(target)),
                            art.selection.selected);

    SimilarityReport rep =
        compare_features(orig, synth.rows, art.selected_names, cfg.similarity_features);

    // two disjoint seeded benign pools
    std::vector<std::size_t> benign = ds.rows_of_class(ds.class_index(cfg.benign_class));
    Rng pool_rng(derive_seed(cfg.seed_split, "similarity-pools"));
    pool_rng.shuffle(benign);
    std::size_t pool = std::min(cfg.benign_pool_size, benign.size() / 2);
    if (pool == 0) throw DataError("not enough benign rows for the validation pools");
    std::vector<std::size_t> pa(benign.begin(), benign.begin() + pool);
    std::vector<std::size_t> pb(benign.begin() + pool, benign.begin() + 2 * pool);
    Matrix benign_a = take_cols(take_rows(ds.features, pa), art.selection.selected);
    Matrix benign_b = take_cols(take_rows(ds.features, pb), art.selection.selected);

    MlValidationConfig mcfg;
    mcfg.split_ratio = cfg.split_ratio;
    mcfg.seed = derive_seed(cfg.seed_forest, "similarity");
    mcfg.forest.n_trees = cfg.n_trees;
    MlValidation ml = ml_validation(synth.rows, orig, benign_a, benign_b, cfg.target_class,
                                    cfg.benign_class, mcfg);

    fs::path dir = cfg.out_dir / (std::string("similarity_") + gan_kind_name(kind));
    emit_similarity_report(rep, &ml, dir);

    std::cout << "cosine similarity (" << gan_kind_name(kind) << " vs original):\n";
    for (const auto& f : rep.features)
        std::cout << "  " << std::left << std::setw(30) << f.feature << std::fixed
                  << std::setprecision(4) << f.cosine << "\n";
    for (const auto& s : rep.skipped)
        std::cout << "  (skipped '" << s << "': not among the selected features)\n";
    std::size_t t = ml.forest_transfer.class_id(cfg.target_class);
    std::cout << "forest on original rows: precision " << std::setprecision(2)
              << ml.forest_transfer.precision[t] << ", recall " << ml.forest_transfer.recall[t]
              << ", f1 " << ml.forest_transfer.f1[t] << "\n";
    std::cout << "report under " << dir << "\n";
    return 0;
}

int cmd_experiment(const CommonOpts& common, const std::string& mode_flag, std::size_t jobs) {
    PipelineConfig cfg = resolve_config(common);
    if (!mode_flag.empty()) cfg.experiment_mode = mode_flag;
    CleanDataset ds = load_grouped(cache_path(common, cfg), cfg);
    AugmentMode mode = augment_mode_from_name(cfg.experiment_mode);

    BaselineResult base = run_baseline(ds, cfg.harness(), cfg.seed_split, cfg.seed_forest);
    atomic_write(cfg.out_dir / "experiments" / "baseline.json", [&](std::ostream& os) {
        nlohmann::json j;
        j["report"] = metrics_to_json(base.report);
        j["seeds"] = {{"split", cfg.seed_split}, {"forest", cfg.seed_forest}};
        os << j.dump(2) << "\n";
    });
    std::size_t tb = base.report.class_id(cfg.target_class);
    std::cout << "baseline '" << cfg.target_class << "': P " << std::fixed
              << std::setprecision(2) << base.report.precision[tb] << " R "
              << base.report.recall[tb] << " F1 " << base.report.f1[tb] << "\n";

    // grid cells are independent jobs; results and printing are assembled in
    // grid order regardless of the schedule
    struct Cell {
        std::string kind_name;
        GanKind kind;
        double k;
    };
    std::vector<Cell> cells;
    for (const auto& kind_name : cfg.experiment_kinds) {
        GanKind kind = gan_kind_from_name(kind_name);
        for (double k : cfg.experiment_multipliers) cells.push_back({kind_name, kind, k});
    }

    auto run_cell = [&](const Cell& cell) {
        ExperimentSpec espec;
        espec.gan_kind = cell.kind;
        espec.multiplier = cell.k;
        espec.mode = mode;
        espec.gan_seed = cfg.seed_gan;
        espec.split_seed = cfg.seed_split;
        espec.forest_seed = cfg.seed_forest;
        ExperimentResult res = run_augmentation(ds, espec, cfg.harness(), cfg.gan_for(cell.kind));

        nlohmann::json j = result_to_json(res);
        auto stab = stability_check(base.report, res.augmented_test,
                                    cfg.stability_tolerance, cfg.target_class);
        j["stability"] = nlohmann::json::array();
        for (const auto& row : stab)
            j["stability"].push_back({{"class", row.class_name},
                                      {"d_precision", row.d_precision},
                                      {"d_recall", row.d_recall},
                                      {"d_f1", row.d_f1},
                                      {"pass", row.pass}});
        fs::path out = cfg.out_dir / "experiments" /
                       (cell.kind_name + "_x" + multiplier_tag(cell.k) + ".json");
        atomic_write(out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });

        std::size_t tg = res.augmented_test.class_id(cfg.target_class);
        std::size_t to = res.original_target.class_id(cfg.target_class);
        std::ostringstream line;
        line << cell.kind_name << " x" << cell.k << " [" << augment_mode_name(mode)
             << "]: generated-eval P " << std::fixed << std::setprecision(2)
             << res.augmented_test.precision[tg] << " R " << res.augmented_test.recall[tg]
             << " F1 " << res.augmented_test.f1[tg] << " | original-eval P "
             << res.original_target.precision[to] << " R " << res.original_target.recall[to]
             << " F1 " << res.original_target.f1[to];
        return line.str();
    };

    jobs = std::max<std::size_t>(1, jobs);
    std::vector<std::string> lines(cells.size());
    for (std::size_t start = 0; start < cells.size(); start += jobs) {
        std::size_t stop = std::min(cells.size(), start + jobs);
        std::vector<std::future<std::string>> batch;
        for (std::size_t i = start; i < stop; ++i)
            batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async,
                                       run_cell, cells[i]));
        for (std::size_t i = start; i < stop; ++i) lines[i] = batch[i - start].get();
    }
    for (const auto& line : lines) std::cout << line << "\n";
    std::cout << "result documents under " << cfg.out_dir / "experiments" << "\n";
    return 0;
}

int cmd_report(const CommonOpts& common, const std::string& out_flag) {
    PipelineConfig cfg = resolve_config(common);
    fs::path exp_dir = cfg.out_dir / "experiments";
    if (!fs::exists(exp_dir / "baseline.json"))
        throw DataError("no results under " + exp_dir.string() +
                        "; run `ganids experiment` (or `ganids baseline`) first");
    fs::path out = out_flag.empty() ? cfg.out_dir / "report" : fs::path(out_flag);
    fs::create_directories(out);

    auto baseline = nlohmann::json::parse(slurp(exp_dir / "baseline.json"));
    atomic_write(out / "baseline.csv", [&](std::ostream& os) {
        os << "class,precision,recall,f1,support\n";
        for (const auto& row : baseline["report"]["classes"])
            os << row["class"].get<std::string>() << "," << row["precision"] << ","
               << row["recall"] << "," << row["f1"] << "," << row["support"] << "\n";
    });

    std::vector<nlohmann::json> runs;
    for (const auto& e : fs::directory_iterator(exp_dir)) {
        if (e.path().extension() != ".json" || e.path().filename() == "baseline.json") continue;
        runs.push_back(nlohmann::json::parse(slurp(e.path())));
    }
    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) {
        if (a["gan_kind"] != b["gan_kind"]) return a["gan_kind"] < b["gan_kind"];
        return a["multiplier"].template get<double>() < b["multiplier"].template get<double>();
    });

    auto target_row = [&](const nlohmann::json& report, const std::string& cls) {
        for (const auto& row : report["classes"])
            if (row["class"] == cls) return row;
        throw DataError("target class missing from a result document");
    };

    auto table = [&](const char* file, const char* which) {
        atomic_write(out / file, [&](std::ostream& os) {
            os << "gan_kind,multiplier,mode,precision,recall,f1\n";
            for (const auto& r : runs) {
                auto row = target_row(r[which], r["target_class"].get<std::string>());
                os << r["gan_kind"].get<std::string>() << "," << r["multiplier"] << ","
                   << r["mode"].get<std::string>() << "," << row["precision"] << ","
                   << row["recall"] << "," << row["f1"] << "\n";
            }
        });
    };
    table("generated_eval.csv", "augmented_test");
    table("original_eval.csv", "original_target");

    for (const auto& r : runs) {
        std::string tag = r["gan_kind"].get<std::string>() + "_x" +
                          multiplier_tag(r["multiplier"].get<double>());
        atomic_write(out / ("full_" + tag + ".csv"), [&](std::ostream& os) {
            os << "class,precision,recall,f1,support\n";
            for (const auto& row : r["augmented_test"]["classes"])
                os << row["class"].get<std::string>() << "," << row["precision"] << ","
                   << row["recall"] << "," << row["f1"] << "," << row["support"] << "\n";
        });
    }

    atomic_write(out / "stability.csv", [&](std::ostream& os) {
        os << "gan_kind,multiplier,class,d_precision,d_recall,d_f1,pass\n";
        for (const auto& r : runs) {
            if (!r.contains("stability")) continue;
            for (const auto& row : r["stability"])
                os << r["gan_kind"].get<std::string>() << "," << r["multiplier"] << ","
                   << row["class"].get<std::string>() << "," << row["d_precision"] << ","
                   << row["d_recall"] << "," << row["d_f1"] << ","
                   << (row["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
        }
    });

    std::cout << "report tables under " << out << " (" << runs.size() << " runs)\n";
    return 0;
}

int cmd_synth_demo(const std::string& out_flag, std::uint64_t seed) {
    fs::path dir = out_flag.empty() ? fs::path("demo") : fs::path(out_flag);
    CleanDataset ds = make_mini_dataset(seed);

    // two files to exercise the multi-file merge path
    std::size_t half = ds.n_rows() / 2;
    std::vector<std::size_t> first, second;
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        (i < half ? first : second).push_back(i);
    auto dump = [&](const std::vector<std::size_t>& idx, const fs::path& p) {
        Matrix rows = take_rows(ds.features, idx);
        std::vector<std::string> labels;
        for (auto i : idx) labels.push_back(ds.label_name(i));
        write_csv(ds.feature_names, rows, labels, p);
    };
    dump(first, dir / "data" / "mini_part1.csv");
    dump(second, dir / "data" / "mini_part2.csv");

    nlohmann::json j;
    j["grouping_file"] = "identity";
    j["target_class"] = "Botnet";
    j["port_column"] = "dst_port";
    j["port_value"] = 8080;
    j["top_k_features"] = 12;
    j["benign_pool_size"] = 2000;
    j["n_trees"] = 60;
    j["similarity_features"] = {"duration", "fwd_len", "bwd_len", "iat_mean", "pkt_rate"};
    j["experiment_kinds"] = {"wgan"};
    j["experiment_multipliers"] = {1, 4, 16};
    j["out_dir"] = (dir / "out").string();
    for (const char* kind : {"vanilla", "wgan", "ctgan"}) {
        j[kind] = {{"noise_dim", 16}, {"epochs", 500}, {"batch_size", 32}};
    }
    atomic_write(dir / "ganids.json", [&](std::ostream& os) { os << j.dump(2) << "\n"; });

    std::cout << "demo dataset (" << ds.n_rows() << " rows) under " << dir / "data" << "\n";
    std::cout << "next steps:\n"
              << "  ganids ingest --input " << (dir / "data") << " --config "
              << (dir / "ganids.json") << "\n"
              << "  ganids baseline --config " << (dir / "ganids.json") << "\n"
              << "  ganids train-gan --kind wgan --config " << (dir / "ganids.json") << "\n"
              << "  ganids generate --kind wgan --k 4 --config " << (dir / "ganids.json") << "\n"
              << "  ganids eval-similarity --kind wgan --config " << (dir / "ganids.json") << "\n"
              << "  ganids experiment --config " << (dir / "ganids.json") << "\n"
              << "  ganids report --config " << (dir / "ganids.json") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-based augmentation pipeline for flow-feature intrusion datasets"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string input_dir, label_flag, kind_name, class_flag, out_flag, mode_flag;
    double k_mult = 4.0;
    std::uint64_t demo_seed = 905;
    bool force = false, save_model = false;

    auto add_common = [&](CLI::App* cmd, bool with_cache = true) {
        cmd->add_option("--config", common.config_path, "JSON config file");
        cmd->add_option("--out-dir", common.out_dir, "output directory (overrides config)");
        cmd->add_option("--set", common.sets,
                        "override any config value, e.g. --set wgan.epochs=100")
            ->take_all();
        if (with_cache) cmd->add_option("--cache", common.cache_path, "dataset cache file");
    };

    auto* ingest = app.add_subcommand("ingest", "parse flow CSVs, clean, regroup, cache");
    ingest->add_option("--input", input_dir, "directory of input CSV files");
    ingest->add_option("--label-column", label_flag, "name of the label column");
    ingest->add_flag("--force", force, "re-parse even when a cache exists");
    add_common(ingest);
    ingest->callback([&] { cmd_ingest(common, input_dir, label_flag, force); });

    auto* baseline = app.add_subcommand("baseline", "train and score the baseline classifier");
    baseline->add_flag("--save-model", save_model, "serialize the fitted forest");
    add_common(baseline);
    baseline->callback([&] { cmd_baseline(common, save_model); });

    auto* train = app.add_subcommand("train-gan", "segment the target class and train generators");
    train->add_option("--kind", kind_name, "vanilla | wgan | ctgan")->required();
    train->add_option("--class", class_flag, "target class (overrides config)");
    add_common(train);
    train->callback([&] { cmd_train_gan(common, kind_name, class_flag); });

    auto* gen = app.add_subcommand("generate", "sample synthetic rows from trained generators");
    gen->add_option("--kind", kind_name, "vanilla | wgan | ctgan")->required();
    gen->add_option("--k", k_mult, "multiplier on the class size")->required();
    gen->add_option("--out", out_flag, "output CSV path");
    add_common(gen);
    gen->callback([&] { cmd_generate(common, kind_name, k_mult, out_flag); });

    auto* sim = app.add_subcommand("eval-similarity", "closeness of generated vs original rows");
    sim->add_option("--kind", kind_name, "vanilla | wgan | ctgan")->required();
    add_common(sim);
    sim->callback([&] { cmd_eval_similarity(common, kind_name); });

    auto* exp = app.add_subcommand("experiment", "run the augmentation grid from the config");
    exp->add_option("--mode", mode_flag, "replace | append (overrides config)");
    bool grid = true;
    std::size_t jobs = 1;
    exp->add_flag("--grid", grid, "run the full kinds x multipliers grid (default)");
    exp->add_option("--jobs", jobs, "grid cells to run in parallel (default 1)");
    add_common(exp);
    exp->callback([&] { cmd_experiment(common, mode_flag, jobs); });

    auto* rep = app.add_subcommand("report", "assemble result documents into flat CSV tables");
    rep->add_option("--out", out_flag, "report directory");
    add_common(rep);
    rep->callback([&] { cmd_report(common, out_flag); });

    auto* demo = app.add_subcommand("synth-demo", "write a desk-scale synthetic dataset + config");
    demo->add_option("--out", out_flag, "demo directory (default: demo)");
    demo->add_option("--seed", demo_seed, "dataset seed");
    demo->callback([&] { cmd_synth_demo(out_flag, demo_seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems exit 1; --help exits 0
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
