// End-to-end exercises of the command-line harness. The binary path comes in
// through the FEWGRAPH_CLI environment variable (set by ctest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fewgraph/graph.hpp"

using namespace fewgraph;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* p = std::getenv("FEWGRAPH_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("fewgraph-cli-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("usage errors exit with code 1, data errors with 2") {
    TempDir tmp;
    CHECK(run("bogus-subcommand") == 1);
    CHECK(run("canon --data /nonexistent.txt --out-dir " + tmp.sub("x")) == 2);
    CHECK(run("synth --particles 1 --out-dir " + tmp.sub("y")) == 1);   // ConfigError
}

TEST_CASE("synth is byte-deterministic and self-describing") {
    TempDir tmp;
    REQUIRE(run("synth --particles 5 --count 100 --seed 7 --out-dir " + tmp.sub("a")) == 0);
    REQUIRE(run("synth --particles 5 --count 100 --seed 7 --out-dir " + tmp.sub("b")) == 0);
    CHECK(slurp(tmp.path / "a" / "dataset.txt") == slurp(tmp.path / "b" / "dataset.txt"));

    auto cfg = nlohmann::json::parse(slurp(tmp.path / "a" / "resolved_config.json"));
    CHECK(cfg["command"] == "synth");
    CHECK(cfg["seed"] == 7);
    CHECK(cfg["synth.particles"] == 5);
}

TEST_CASE("config file fills unset flags, explicit flags win, unknown keys fail") {
    TempDir tmp;
    {
        std::ofstream out(tmp.sub("cfg.json"));
        out << R"({"synth.particles": 4, "synth.count": 25, "seed": 11})";
    }
    REQUIRE(run("synth --config " + tmp.sub("cfg.json") + " --out-dir " + tmp.sub("c")) == 0);
    auto cfg = nlohmann::json::parse(slurp(tmp.path / "c" / "resolved_config.json"));
    CHECK(cfg["synth.particles"] == 4);
    CHECK(cfg["synth.count"] == 25);
    CHECK(cfg["seed"] == 11);

    // explicit flag beats the file value
    REQUIRE(run("synth --config " + tmp.sub("cfg.json") + " --particles 6 --out-dir " + tmp.sub("d")) == 0);
    auto cfg2 = nlohmann::json::parse(slurp(tmp.path / "d" / "resolved_config.json"));
    CHECK(cfg2["synth.particles"] == 6);

    {
        std::ofstream out(tmp.sub("bad.json"));
        out << R"({"synth.particle-count": 4})";
    }
    CHECK(run("synth --config " + tmp.sub("bad.json") + " --out-dir " + tmp.sub("e")) == 1);
}

TEST_CASE("a resolved-config snapshot replays to byte-identical output") {
    TempDir tmp;
    REQUIRE(run("synth --particles 5 --count 40 --seed 21 --out-dir " + tmp.sub("orig")) == 0);
    REQUIRE(run("synth --config " + tmp.sub("orig") + "/resolved_config.json --out-dir " +
                tmp.sub("replay")) == 0);
    CHECK(slurp(tmp.path / "orig" / "dataset.txt") == slurp(tmp.path / "replay" / "dataset.txt"));
}

TEST_CASE("canon dumps one parsable code per graph") {
    TempDir tmp;
    REQUIRE(run("synth --particles 4 --count 30 --seed 3 --out-dir " + tmp.sub("data")) == 0);
    REQUIRE(run("canon --data " + tmp.sub("data") + "/dataset.txt --out-dir " + tmp.sub("codes")) == 0);
    std::istringstream codes(slurp(tmp.path / "codes" / "codes.txt"));
    std::string line;
    int count = 0;
    while (std::getline(codes, line)) {
        CHECK(line.find("(0,1,") == 0);
        ++count;
    }
    CHECK(count == 30);
}

TEST_CASE("full pipeline: meta-train, fine-tune, generate, evaluate") {
    TempDir tmp;
    REQUIRE(run("synth --particles 4 --count 60 --seed 41 --out-dir " + tmp.sub("a4")) == 0);
    REQUIRE(run("synth --particles 6 --count 60 --seed 42 --out-dir " + tmp.sub("a6")) == 0);
    REQUIRE(run("synth --particles 5 --count 80 --seed 43 --out-dir " + tmp.sub("t5")) == 0);

    const std::string dims = " --embed-dim 10 --hidden-dim 14 --head-hidden 14 ";
    REQUIRE(run("meta-train --aux " + tmp.sub("a4") + "/dataset.txt " + tmp.sub("a6") +
                "/dataset.txt" + dims +
                "--k 2 --inner-batch 6 --budget 30 --val-every 10 --meta-patience 3 --seed 51 "
                "--out-dir " + tmp.sub("meta")) == 0);
    CHECK(fs::exists(tmp.path / "meta" / "model.ckpt"));
    CHECK(fs::exists(tmp.path / "meta" / "train_log.tsv"));

    REQUIRE(run("fine-tune --target " + tmp.sub("t5") + "/dataset.txt --init " + tmp.sub("meta") +
                "/model.ckpt --batch-size 6 --max-batches 40 --sp-val-every 10 --sp-patience 3 "
                "--train-cap 20 --split-seed 3 --seed 52 --out-dir " + tmp.sub("ft")) == 0);
    CHECK(fs::exists(tmp.path / "ft" / "model.ckpt"));
    CHECK(fs::exists(tmp.path / "ft" / "finetune_log.tsv"));

    REQUIRE(run("generate --init " + tmp.sub("ft") + "/model.ckpt --count 8 --repair lenient "
                "--seed 53 --out-dir " + tmp.sub("gen")) == 0);
    CHECK(fs::exists(tmp.path / "gen" / "generation_report.tsv"));
    REQUIRE(fs::exists(tmp.path / "gen" / "generated.txt"));

    REQUIRE(run("split --data " + tmp.sub("t5") + "/dataset.txt --split-seed 3 --out-dir " +
                tmp.sub("parts")) == 0);
    REQUIRE(run("evaluate --gen " + tmp.sub("gen") + "/generated.txt --test " + tmp.sub("parts") +
                "/test.txt --train " + tmp.sub("parts") + "/train.txt --out-dir " + tmp.sub("ev")) == 0);
    auto metrics = nlohmann::json::parse(slurp(tmp.path / "ev" / "metrics.json"));
    for (const char* key : {"degree_mmd", "clustering_mmd", "orbit_mmd", "nspdk_mmd",
                            "node_label_mmd", "joint_label_degree_mmd", "avg_nodes_gen",
                            "avg_edges_gen", "novelty_pct", "uniqueness_pct"})
        CHECK(metrics.contains(key));
    CHECK(metrics["edge_label_mmd"].is_null());   // spring data has no edge labels
}

TEST_CASE("scratch and vanilla modes run from a fresh initialization") {
    TempDir tmp;
    REQUIRE(run("synth --particles 4 --count 40 --seed 44 --out-dir " + tmp.sub("t")) == 0);
    REQUIRE(run("fine-tune --target " + tmp.sub("t") + "/dataset.txt --vanilla "
                "--embed-dim 8 --hidden-dim 10 --head-hidden 10 --batch-size 5 --max-batches 20 "
                "--sp-val-every 10 --sp-patience 2 --seed 54 --out-dir " + tmp.sub("scratch")) == 0);
    CHECK(fs::exists(tmp.path / "scratch" / "model.ckpt"));
}

TEST_CASE("single-threaded reruns reproduce artifacts byte for byte") {
    TempDir tmp;
    REQUIRE(run("synth --particles 4 --count 40 --seed 45 --out-dir " + tmp.sub("t")) == 0);
    const std::string train =
        "fine-tune --target " + tmp.sub("t") + "/dataset.txt --vanilla --threads 1 "
        "--embed-dim 8 --hidden-dim 10 --head-hidden 10 --batch-size 5 --max-batches 15 "
        "--sp-val-every 5 --sp-patience 2 --seed 55 --out-dir ";
    REQUIRE(run(train + tmp.sub("r1")) == 0);
    REQUIRE(run(train + tmp.sub("r2")) == 0);
    CHECK(slurp(tmp.path / "r1" / "model.ckpt") == slurp(tmp.path / "r2" / "model.ckpt"));
    CHECK(slurp(tmp.path / "r1" / "finetune_log.tsv") == slurp(tmp.path / "r2" / "finetune_log.tsv"));
}

TEST_CASE("GSHOT_THREADS is honored as the thread fallback") {
    TempDir tmp;
    const std::string cmd = "GSHOT_THREADS=2 " + cli() + " synth --particles 4 --count 10 --seed 1 "
                            "--out-dir " + tmp.sub("s") + " >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    auto cfg = nlohmann::json::parse(slurp(tmp.path / "s" / "resolved_config.json"));
    CHECK(cfg["threads"] == 2);
}
