// Drives the installed CLI binary end to end on the synthetic demo dataset:
// every subcommand, the error paths with their exit codes, and artifact
// idempotence. Invoked as: cli_tests <path-to-ganids-binary>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "  ok: " << what << "\n";
    } else {
        std::cout << "  FAILED: " << what << "\n";
        ++g_failures;
    }
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& cmd, const fs::path& scratch) {
    fs::path out_file = scratch / "cmd_output.txt";
    std::string full = cmd + " > " + out_file.string() + " 2>&1";
    int status = std::system(full.c_str());
    RunResult r;
#ifdef _WIN32
    r.exit_code = status;
#else
    r.exit_code = WEXITSTATUS(status);
#endif
    std::ifstream is(out_file);
    std::stringstream ss;
    ss << is.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <ganids binary>\n";
        return 2;
    }
    std::string bin = argv[1];
    TempDir td;
    fs::path demo = td.path / "demo";
    std::string cfg = (demo / "test.json").string();

    // --help exits 0 and documents subcommands
    {
        RunResult r = run(bin + " --help", td.path);
        expect(r.exit_code == 0, "--help exits 0");
        expect(r.output.find("ingest") != std::string::npos &&
                   r.output.find("experiment") != std::string::npos,
               "--help lists subcommands");
    }
    // --help on every subcommand documents its flags
    for (const char* sub : {"ingest", "baseline", "train-gan", "generate", "eval-similarity",
                            "experiment", "report", "synth-demo"}) {
        RunResult r = run(bin + " " + sub + " --help", td.path);
        expect(r.exit_code == 0 && r.output.find("--") != std::string::npos,
               std::string(sub) + " --help exits 0 and lists flags");
    }
    // unknown flags are hard errors
    {
        RunResult r = run(bin + " ingest --no-such-flag", td.path);
        expect(r.exit_code == 1, "unknown flag exits 1");
    }
    // data errors exit 2
    {
        RunResult r = run(bin + " ingest --input " + (td.path / "empty").string() +
                              " --out-dir " + (td.path / "o").string(),
                          td.path);
        expect(r.exit_code == 2, "missing input dir exits 2");
        expect(r.output.find("no input files") != std::string::npos,
               "missing input names the problem");
    }

    // demo dataset + a fast test config
    {
        RunResult r = run(bin + " synth-demo --out " + demo.string(), td.path);
        expect(r.exit_code == 0, "synth-demo succeeds");
        expect(fs::exists(demo / "data" / "mini_part1.csv") &&
                   fs::exists(demo / "data" / "mini_part2.csv"),
               "demo CSVs written");
        expect(fs::exists(demo / "ganids.json"), "demo config written");
    }
    write_file(cfg, R"({
      "grouping_file": "identity",
      "target_class": "Botnet",
      "port_column": "dst_port",
      "port_value": 8080,
      "top_k_features": 12,
      "benign_pool_size": 500,
      "n_trees": 10,
      "similarity_features": ["duration", "iat_mean", "absent_feature"],
      "experiment_kinds": ["wgan"],
      "experiment_multipliers": [2],
      "wgan": {"noise_dim": 8, "epochs": 30, "batch_size": 32},
      "out_dir": ")" + (td.path / "out").string() + R"("
    })");

    // prerequisite ordering: generate before train-gan names the producer
    {
        RunResult r = run(bin + " ingest --input " + (demo / "data").string() + " --config " + cfg,
                          td.path);
        expect(r.exit_code == 0, "ingest succeeds");
        expect(fs::exists(td.path / "out" / "cache.bin"), "cache written");

        RunResult r2 = run(bin + " generate --kind wgan --k 2 --config " + cfg, td.path);
        expect(r2.exit_code == 2, "generate without generators exits 2");
        expect(r2.output.find("train-gan") != std::string::npos,
               "error names the producing command");
    }
    // ingest rerun reuses the cache and prints the identical table
    {
        RunResult a = run(bin + " ingest --input " + (demo / "data").string() + " --config " + cfg,
                          td.path);
        expect(a.exit_code == 0, "ingest rerun succeeds");
        expect(a.output.find("reusing cache") != std::string::npos, "cache reused on rerun");
        expect(a.output.find("Botnet") != std::string::npos &&
                   a.output.find("200") != std::string::npos,
               "rerun prints the class table");
    }
    // baseline
    {
        RunResult r = run(bin + " baseline --config " + cfg, td.path);
        expect(r.exit_code == 0, "baseline succeeds");
        expect(fs::exists(td.path / "out" / "baseline" / "metrics.txt"), "metrics written");
        expect(fs::exists(td.path / "out" / "baseline" / "selection.txt"), "selection written");
        expect(r.output.find("accuracy") != std::string::npos, "baseline prints a report");
    }
    // train-gan
    {
        RunResult r = run(bin + " train-gan --kind wgan --config " + cfg, td.path);
        expect(r.exit_code == 0, "train-gan succeeds");
        expect(fs::exists(td.path / "out" / "gan_wgan" / "plan.txt"), "plan written");
        expect(fs::exists(td.path / "out" / "gan_wgan" / "segment_s0.weights.bin"),
               "segment weights written");
        expect(fs::exists(td.path / "out" / "gan_wgan" / "segment_s0.losses.csv"),
               "loss trace written");
    }
    // generate: correct row count and byte-identical rerun
    {
        fs::path out_csv = td.path / "out" / "synthetic" / "wgan_x2.csv";
        RunResult r = run(bin + " generate --kind wgan --k 2 --config " + cfg, td.path);
        expect(r.exit_code == 0, "generate succeeds");
        std::string first = slurp_file(out_csv);
        std::size_t lines = static_cast<std::size_t>(std::count(first.begin(), first.end(), '\n'));
        expect(lines == 401, "2x200 synthetic rows plus header");

        RunResult r2 = run(bin + " generate --kind wgan --k 2 --config " + cfg, td.path);
        expect(r2.exit_code == 0, "generate rerun succeeds");
        expect(slurp_file(out_csv) == first, "rerun output is byte-identical");
    }
    // eval-similarity
    {
        RunResult r = run(bin + " eval-similarity --kind wgan --config " + cfg, td.path);
        expect(r.exit_code == 0, "eval-similarity succeeds");
        fs::path dir = td.path / "out" / "similarity_wgan";
        expect(fs::exists(dir / "cosine.csv"), "cosine table written");
        expect(fs::exists(dir / "cumsum_duration.csv"), "cumulative series written");
        expect(fs::exists(dir / "ml_validation.txt"), "ml validation written");
        expect(r.output.find("skipped 'absent_feature'") != std::string::npos,
               "absent similarity feature is reported, not fatal");
    }
    // the environment variable forces the output directory
    {
        fs::path env_out = td.path / "env_out";
        RunResult r = run("GANIDS_OUT_DIR=" + env_out.string() + " " + bin + " ingest --input " +
                              (demo / "data").string() + " --config " + cfg,
                          td.path);
        expect(r.exit_code == 0, "ingest honors GANIDS_OUT_DIR");
        expect(fs::exists(env_out / "cache.bin"), "cache lands in the env-provided directory");
    }
    // experiment + report
    {
        RunResult r = run(bin + " experiment --config " + cfg, td.path);
        expect(r.exit_code == 0, "experiment succeeds");
        expect(fs::exists(td.path / "out" / "experiments" / "wgan_x2.json"),
               "experiment result document written");
        expect(fs::exists(td.path / "out" / "experiments" / "baseline.json"),
               "baseline result document written");

        RunResult r2 = run(bin + " report --config " + cfg, td.path);
        expect(r2.exit_code == 0, "report succeeds");
        fs::path rep = td.path / "out" / "report";
        for (const char* f : {"baseline.csv", "generated_eval.csv", "original_eval.csv",
                              "stability.csv", "full_wgan_x2.csv"})
            expect(fs::exists(rep / f), std::string("report contains ") + f);
        std::string table = slurp_file(rep / "original_eval.csv");
        expect(table.find("wgan,2") != std::string::npos, "original-eval row present");
    }

    if (g_failures == 0) {
        std::cout << "cli tests passed\n";
        return 0;
    }
    std::cout << g_failures << " cli checks FAILED\n";
    return 1;
}
