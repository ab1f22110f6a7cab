#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fewgraph/checkpoint.hpp"
#include "fewgraph/errors.hpp"
#include "fewgraph/graph.hpp"
#include "fewgraph/meta.hpp"
#include "fewgraph/metrics.hpp"
#include "fewgraph/model.hpp"
#include "fewgraph/sampler.hpp"
#include "fewgraph/selfpaced.hpp"
#include "fewgraph/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fewgraph;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 0;                    // 0: take GSHOT_THREADS, else 1
    std::string label_order = "id";     // id | symbol
    bool unlabeled_edges = false;

    int embed_dim = 128;
    int hidden_dim = 256;
    int head_hidden = 512;

    double lr = 0.003;
    int batch_size = 32;
    double dropout = 0.2;
    double l2 = 1e-5;
    int patience = 10;
    int max_epochs = 400;
    double stop_rel_change = 5e-4;
    bool batch_sum = false;

    int meta_k = 15;
    double meta_epsilon = 0.8;
    double inner_lr = 0.003;
    int inner_batch = 32;
    double meta_dropout = 0.2;
    int meta_budget = 1000;
    int meta_val_every = 25;
    int meta_patience = 5;

    double lambda0 = 0.0;               // <= 0: auto percentile
    double gamma = 1.001;
    int sp_max_batches = 2000;
    int sp_val_every = 50;
    int sp_patience = 5;
    bool vanilla = false;

    int gen_count = 1024;
    int max_tuples = 0;                 // 0: ceil(1.5 x longest training code)
    double temperature = 1.0;
    std::string repair = "strict";

    double split_train = 0.4;
    double split_val = 0.3;
    double split_test = 0.3;
    std::uint64_t split_seed = 0;
    int train_cap = 0;                  // 0: no cap

    double sigma = 1.0;
    int clustering_bins = 100;
    int nspdk_radius = 2;
    int nspdk_distance = 3;

    int particles = 5;
    int synth_count = 100;
    int grid_side = 5;
    double edge_prob = 0.5;

    std::vector<std::string> aux_paths;
    std::vector<std::string> extra_vocab_paths;
    std::string data_path;
    std::string target_path;
    std::string init_ckpt;
    std::string gen_path;
    std::string test_path;
    std::string train_path;

    int resolved_threads() const {
        if (threads > 0) return threads;
        if (const char* env = std::getenv("GSHOT_THREADS")) {
            int t = std::atoi(env);
            if (t > 0) return t;
        }
        return 1;
    }
    LabelOrder resolved_label_order() const {
        if (label_order == "id") return LabelOrder::appearance;
        if (label_order == "symbol") return LabelOrder::symbol;
        throw ConfigError("label-order must be 'id' or 'symbol'");
    }
    RepairMode resolved_repair() const {
        if (repair == "strict") return RepairMode::strict;
        if (repair == "lenient") return RepairMode::lenient;
        throw ConfigError("repair must be 'strict' or 'lenient'");
    }
    TrainConfig train_config() const {
        TrainConfig t;
        t.lr = lr;
        t.batch_size = batch_size;
        t.dropout = dropout;
        t.l2 = l2;
        t.patience = patience;
        t.max_epochs = max_epochs;
        t.stop_rel_change = stop_rel_change;
        t.batch_mean = !batch_sum;
        t.threads = resolved_threads();
        t.seed = seed;
        return t;
    }
};

// Every key the tool understands across all subcommands, so a resolved-config
// snapshot of one command can be replayed into another without tripping the
// unknown-key check. Keys outside this list are errors.
const std::set<std::string>& global_key_schema() {
    static const std::set<std::string> schema{
        "command", "seed", "threads", "label-order", "out-dir",
        "model.embed-dim", "model.hidden-dim", "model.head-hidden",
        "train.lr", "train.batch-size", "train.dropout", "train.l2", "train.patience",
        "train.max-epochs", "train.stop-rel-change", "train.batch-sum",
        "meta.k", "meta.epsilon", "meta.inner-lr", "meta.inner-batch", "meta.dropout",
        "meta.budget", "meta.val-every", "meta.patience",
        "sp.lambda0", "sp.gamma", "sp.max-batches", "sp.val-every", "sp.patience", "sp.vanilla",
        "gen.count", "gen.max-tuples", "gen.temperature", "gen.repair",
        "split.train", "split.validation", "split.test", "split.seed", "split.train-cap",
        "eval.sigma", "eval.clustering-bins", "eval.nspdk-radius", "eval.nspdk-distance",
        "synth.particles", "synth.count", "synth.grid-side", "synth.edge-prob",
        "data.unlabeled-edges",
        "paths.aux", "paths.extra-vocab", "paths.data", "paths.target", "paths.init",
        "paths.gen", "paths.test", "paths.train"};
    return schema;
}

// One registered configuration key: its CLI option (to detect explicit flags)
// and a setter from a JSON value.
struct KeyTable {
    std::map<std::string, std::pair<CLI::Option*, std::function<void(const json&)>>> keys;

    void add(const std::string& key, CLI::Option* opt, std::function<void(const json&)> set) {
        keys[key] = {opt, std::move(set)};
    }

    // File values fill in everything the command line did not set explicitly.
    // Keys the current command does not use must still be globally known.
    void merge_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
        for (auto& [k, v] : j.items()) {
            auto it = keys.find(k);
            if (it == keys.end()) {
                if (!global_key_schema().count(k)) throw ConfigError("unknown config key '" + k + "'");
                continue;
            }
            if (it->second.first && it->second.first->count() > 0) continue;
            try {
                it->second.second(v);
            } catch (const json::exception& e) {
                throw ConfigError("bad value for config key '" + k + "': " + e.what());
            }
        }
    }
};

template <typename T>
std::function<void(const json&)> setter(T& field) {
    return [&field](const json& v) { field = v.get<T>(); };
}

struct CommandContext {
    CLI::App* cmd = nullptr;
    KeyTable table;
    Options* opt = nullptr;

    void shared_flags() {
        table.add("seed", cmd->add_option("--seed", opt->seed, "master RNG seed"), setter(opt->seed));
        table.add("threads",
                  cmd->add_option("--threads", opt->threads,
                                  "worker threads (1 = fully deterministic); GSHOT_THREADS is the fallback"),
                  setter(opt->threads));
        table.add("label-order",
                  cmd->add_option("--label-order", opt->label_order, "label id order: id | symbol"),
                  setter(opt->label_order));
        cmd->add_option("--config", opt->config_path, "JSON config file with flat dotted keys");
        table.add("out-dir", cmd->add_option("--out-dir", opt->out_dir, "artifact directory"),
                  setter(opt->out_dir));
    }
    void model_flags() {
        table.add("model.embed-dim", cmd->add_option("--embed-dim", opt->embed_dim), setter(opt->embed_dim));
        table.add("model.hidden-dim", cmd->add_option("--hidden-dim", opt->hidden_dim), setter(opt->hidden_dim));
        table.add("model.head-hidden", cmd->add_option("--head-hidden", opt->head_hidden), setter(opt->head_hidden));
    }
    void train_flags() {
        table.add("train.lr", cmd->add_option("--lr", opt->lr), setter(opt->lr));
        table.add("train.batch-size", cmd->add_option("--batch-size", opt->batch_size), setter(opt->batch_size));
        table.add("train.dropout", cmd->add_option("--dropout", opt->dropout), setter(opt->dropout));
        table.add("train.l2", cmd->add_option("--l2", opt->l2), setter(opt->l2));
        table.add("train.patience", cmd->add_option("--patience", opt->patience), setter(opt->patience));
        table.add("train.max-epochs", cmd->add_option("--max-epochs", opt->max_epochs), setter(opt->max_epochs));
        table.add("train.stop-rel-change", cmd->add_option("--stop-rel-change", opt->stop_rel_change),
                  setter(opt->stop_rel_change));
        table.add("train.batch-sum",
                  cmd->add_flag("--batch-sum", opt->batch_sum, "feed the optimizer the loss sum, not the mean"),
                  setter(opt->batch_sum));
    }
    void split_flags() {
        table.add("split.train", cmd->add_option("--split-train", opt->split_train), setter(opt->split_train));
        table.add("split.validation", cmd->add_option("--split-validation", opt->split_val), setter(opt->split_val));
        table.add("split.test", cmd->add_option("--split-test", opt->split_test), setter(opt->split_test));
        table.add("split.seed", cmd->add_option("--split-seed", opt->split_seed), setter(opt->split_seed));
        table.add("split.train-cap",
                  cmd->add_option("--train-cap", opt->train_cap, "cap on training samples (0 = no cap)"),
                  setter(opt->train_cap));
    }
    void finish(int argc, char** argv) {
        (void)argc;
        (void)argv;
        if (!opt->config_path.empty()) table.merge_file(opt->config_path);
    }
};

json resolved_json(const Options& o, const std::string& command) {
    json j;
    j["command"] = command;
    j["seed"] = o.seed;
    j["threads"] = o.resolved_threads();
    j["label-order"] = o.label_order;
    j["out-dir"] = o.out_dir;
    j["model.embed-dim"] = o.embed_dim;
    j["model.hidden-dim"] = o.hidden_dim;
    j["model.head-hidden"] = o.head_hidden;
    j["train.lr"] = o.lr;
    j["train.batch-size"] = o.batch_size;
    j["train.dropout"] = o.dropout;
    j["train.l2"] = o.l2;
    j["train.patience"] = o.patience;
    j["train.max-epochs"] = o.max_epochs;
    j["train.stop-rel-change"] = o.stop_rel_change;
    j["train.batch-sum"] = o.batch_sum;
    j["meta.k"] = o.meta_k;
    j["meta.epsilon"] = o.meta_epsilon;
    j["meta.inner-lr"] = o.inner_lr;
    j["meta.inner-batch"] = o.inner_batch;
    j["meta.dropout"] = o.meta_dropout;
    j["meta.budget"] = o.meta_budget;
    j["meta.val-every"] = o.meta_val_every;
    j["meta.patience"] = o.meta_patience;
    j["sp.lambda0"] = o.lambda0;
    j["sp.gamma"] = o.gamma;
    j["sp.max-batches"] = o.sp_max_batches;
    j["sp.val-every"] = o.sp_val_every;
    j["sp.patience"] = o.sp_patience;
    j["sp.vanilla"] = o.vanilla;
    j["gen.count"] = o.gen_count;
    j["gen.max-tuples"] = o.max_tuples;
    j["gen.temperature"] = o.temperature;
    j["gen.repair"] = o.repair;
    j["split.train"] = o.split_train;
    j["split.validation"] = o.split_val;
    j["split.test"] = o.split_test;
    j["split.seed"] = o.split_seed;
    j["split.train-cap"] = o.train_cap;
    j["eval.sigma"] = o.sigma;
    j["eval.clustering-bins"] = o.clustering_bins;
    j["eval.nspdk-radius"] = o.nspdk_radius;
    j["eval.nspdk-distance"] = o.nspdk_distance;
    j["synth.particles"] = o.particles;
    j["synth.count"] = o.synth_count;
    j["synth.grid-side"] = o.grid_side;
    j["synth.edge-prob"] = o.edge_prob;
    j["data.unlabeled-edges"] = o.unlabeled_edges;
    j["paths.aux"] = o.aux_paths;
    j["paths.extra-vocab"] = o.extra_vocab_paths;
    j["paths.data"] = o.data_path;
    j["paths.target"] = o.target_path;
    j["paths.init"] = o.init_ckpt;
    j["paths.gen"] = o.gen_path;
    j["paths.test"] = o.test_path;
    j["paths.train"] = o.train_path;
    return j;
}

void write_artifact_dir(const Options& o, const std::string& command) {
    fs::create_directories(o.out_dir);
    std::ofstream out(fs::path(o.out_dir) / "resolved_config.json");
    out << resolved_json(o, command).dump(2) << '\n';
    if (!out) throw DataError("cannot write resolved config in '" + o.out_dir + "'");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw DataError("cannot write '" + path.string() + "'");
}

struct PreparedTarget {
    Vocabulary vocab;
    std::vector<DfsCode> train_codes, val_codes, test_codes;
    GraphDataset train_set, val_set, test_set;
    int max_train_edges = 0;
};

PreparedTarget prepare_target(const Options& o, const GraphDataset& target, const Vocabulary& vocab) {
    PreparedTarget out;
    out.vocab = vocab;
    auto parts = split_dataset(target, SplitSpec{o.split_train, o.split_val, o.split_test, o.split_seed});
    if (o.train_cap > 0 && parts[0].size() > o.train_cap)
        parts[0].graphs.resize(static_cast<std::size_t>(o.train_cap));
    out.train_set = remap_dataset(parts[0], vocab);
    out.val_set = parts[1].graphs.empty() ? out.train_set : remap_dataset(parts[1], vocab);
    out.test_set = parts[2].graphs.empty() ? out.val_set : remap_dataset(parts[2], vocab);
    out.train_codes = canonize_dataset(out.train_set);
    out.val_codes = canonize_dataset(out.val_set);
    out.test_codes = canonize_dataset(out.test_set);
    for (const DfsCode& c : out.train_codes)
        out.max_train_edges = std::max(out.max_train_edges, static_cast<int>(c.size()));
    return out;
}

// ---------------------------------------------------------------- commands

int cmd_synth(const Options& o) {
    GraphDataset d = synth_spring(o.particles, o.synth_count, o.grid_side, o.edge_prob, o.seed);
    write_artifact_dir(o, "synth");
    save_dataset_file(d, (fs::path(o.out_dir) / "dataset.txt").string());
    std::cout << "wrote " << d.size() << " graphs to " << o.out_dir << "/dataset.txt\n";
    return 0;
}

int cmd_canon(const Options& o) {
    GraphDataset d = load_dataset_file(o.data_path, o.unlabeled_edges);
    Vocabulary v = build_vocabulary(std::span(&d, 1), o.resolved_label_order());
    GraphDataset r = remap_dataset(d, v);
    std::ostringstream body;
    for (const LabeledGraph& g : r.graphs) body << code_to_string(min_dfs_code(g)) << '\n';
    write_artifact_dir(o, "canon");
    write_text(fs::path(o.out_dir) / "codes.txt", body.str());
    std::cout << "wrote " << r.size() << " codes to " << o.out_dir << "/codes.txt\n";
    return 0;
}

int cmd_split(const Options& o) {
    GraphDataset d = load_dataset_file(o.data_path, o.unlabeled_edges);
    auto parts = split_dataset(d, SplitSpec{o.split_train, o.split_val, o.split_test, o.split_seed});
    write_artifact_dir(o, "split");
    const char* names[3] = {"train.txt", "validation.txt", "test.txt"};
    for (int i = 0; i < 3; ++i) {
        if (parts[static_cast<std::size_t>(i)].graphs.empty()) continue;
        save_dataset_file(parts[static_cast<std::size_t>(i)], (fs::path(o.out_dir) / names[i]).string());
    }
    std::cout << "split " << d.size() << " graphs into " << parts[0].size() << "/"
              << parts[1].size() << "/" << parts[2].size() << '\n';
    return 0;
}

std::vector<GraphDataset> load_many(const std::vector<std::string>& paths, bool unlabeled) {
    std::vector<GraphDataset> out;
    for (const std::string& p : paths) out.push_back(load_dataset_file(p, unlabeled));
    return out;
}

// Shared by meta-train and pretrain: vocabulary over all inputs, 50/50
// train/validation split per auxiliary dataset, canonization.
struct PreparedAux {
    Vocabulary vocab;
    std::vector<CodeSet> sets;
    int max_train_edges = 0;
};

PreparedAux prepare_aux(const Options& o) {
    if (o.aux_paths.empty()) throw ConfigError("need at least one --aux dataset");
    std::vector<GraphDataset> aux = load_many(o.aux_paths, o.unlabeled_edges);
    std::vector<GraphDataset> vocab_inputs = aux;
    for (auto& d : load_many(o.extra_vocab_paths, o.unlabeled_edges)) vocab_inputs.push_back(d);
    PreparedAux out;
    out.vocab = build_vocabulary(vocab_inputs, o.resolved_label_order());
    for (std::size_t i = 0; i < aux.size(); ++i) {
        auto parts = split_dataset(aux[i], SplitSpec{0.5, 0.5, 0.0, mix_seed(o.seed, i)});
        CodeSet cs;
        cs.name = aux[i].name;
        cs.train = canonize_dataset(remap_dataset(parts[0], out.vocab));
        cs.validation = canonize_dataset(remap_dataset(parts[1], out.vocab));
        for (const DfsCode& c : cs.train)
            out.max_train_edges = std::max(out.max_train_edges, static_cast<int>(c.size()));
        out.sets.push_back(std::move(cs));
    }
    return out;
}

void save_model_artifacts(const Options& o, const ModelParams& params, const Vocabulary& vocab,
                          int max_train_edges, long step) {
    Checkpoint ckpt;
    ckpt.params = params;
    ckpt.vocab = vocab;
    ckpt.seed = o.seed;
    ckpt.step = step;
    ckpt.max_train_edges = max_train_edges;
    save_checkpoint(ckpt, (fs::path(o.out_dir) / "model.ckpt").string());
}

int cmd_meta_train(const Options& o) {
    PreparedAux aux = prepare_aux(o);
    MetaConfig mc;
    mc.k = o.meta_k;
    mc.epsilon = o.meta_epsilon;
    mc.inner_lr = o.inner_lr;
    mc.inner_batch = o.inner_batch;
    mc.dropout = o.meta_dropout;
    mc.budget = o.meta_budget;
    mc.val_every = o.meta_val_every;
    mc.patience = o.meta_patience;
    mc.threads = o.resolved_threads();
    mc.seed = o.seed;

    ModelParams theta0 = ModelParams::init_random(
        aux.vocab, ModelDims{o.embed_dim, o.hidden_dim, o.head_hidden}, o.seed);
    std::vector<MetaLogEntry> log;
    ModelParams theta = meta_train(std::move(theta0), aux.sets, mc, aux.vocab, &log);

    write_artifact_dir(o, "meta-train");
    save_model_artifacts(o, theta, aux.vocab, aux.max_train_edges, mc.budget);
    write_text(fs::path(o.out_dir) / "train_log.tsv", format_meta_log(log));
    std::cout << "meta-trained on " << aux.sets.size() << " auxiliary datasets ("
              << log.size() << " iterations logged)\n";
    return 0;
}

int cmd_pretrain(const Options& o) {
    PreparedAux aux = prepare_aux(o);
    std::vector<DfsCode> pooled_train, pooled_val;
    for (const CodeSet& cs : aux.sets) {
        pooled_train.insert(pooled_train.end(), cs.train.begin(), cs.train.end());
        pooled_val.insert(pooled_val.end(), cs.validation.begin(), cs.validation.end());
    }
    ModelParams theta0 = ModelParams::init_random(
        aux.vocab, ModelDims{o.embed_dim, o.hidden_dim, o.head_hidden}, o.seed);
    std::vector<EpochLogEntry> log;
    ModelParams theta = train_epochs(std::move(theta0), pooled_train, o.train_config(), pooled_val,
                                     aux.vocab, &log);

    write_artifact_dir(o, "pretrain");
    save_model_artifacts(o, theta, aux.vocab, aux.max_train_edges, static_cast<long>(log.size()));
    std::ostringstream body;
    body << "epoch\ttrain_loss\tval_loss\n";
    for (const EpochLogEntry& e : log)
        body << e.epoch << '\t' << e.train_loss << '\t' << e.val_loss << '\n';
    write_text(fs::path(o.out_dir) / "train_log.tsv", body.str());
    std::cout << "pretrained on " << pooled_train.size() << " pooled codes for " << log.size()
              << " epochs\n";
    return 0;
}

int cmd_fine_tune(const Options& o) {
    GraphDataset target = load_dataset_file(o.target_path, o.unlabeled_edges);

    Vocabulary vocab;
    ModelParams theta0;
    if (!o.init_ckpt.empty()) {
        Checkpoint ckpt = load_checkpoint(o.init_ckpt);
        vocab = ckpt.vocab;
        theta0 = std::move(ckpt.params);
        for (const LabeledGraph& g : target.graphs)
            if (g.node_count() > vocab.max_timestamp)
                throw DataError("target graph exceeds the checkpoint's timestamp range");
    } else {
        vocab = build_vocabulary(std::span(&target, 1), o.resolved_label_order());
        theta0 = ModelParams::init_random(
            vocab, ModelDims{o.embed_dim, o.hidden_dim, o.head_hidden}, o.seed);
    }

    PreparedTarget prep = prepare_target(o, target, vocab);
    SelfPacedConfig cfg;
    cfg.lambda0 = o.lambda0;
    cfg.gamma = o.gamma;
    cfg.train = o.train_config();
    cfg.max_batches = o.sp_max_batches;
    cfg.val_every = o.sp_val_every;
    cfg.patience = o.sp_patience;

    FineTuneResult res = o.vanilla ? vanilla_fine_tune(theta0, prep.train_codes, cfg, prep.val_codes, vocab)
                                   : fine_tune(theta0, prep.train_codes, cfg, prep.val_codes, vocab);

    write_artifact_dir(o, "fine-tune");
    save_model_artifacts(o, res.params, vocab, prep.max_train_edges,
                         static_cast<long>(res.log.size()));
    write_text(fs::path(o.out_dir) / "finetune_log.tsv", format_fine_tune_log(res.log));
    std::cout << (o.vanilla ? "vanilla" : "self-paced") << " fine-tuning "
              << (o.init_ckpt.empty() ? "from scratch" : "from checkpoint") << ": best validation loss "
              << res.best_val_loss << '\n';
    return 0;
}

int cmd_generate(const Options& o) {
    Checkpoint ckpt = load_checkpoint(o.init_ckpt);
    GenerationConfig gc;
    gc.count = o.gen_count;
    gc.temperature = o.temperature;
    gc.repair = o.resolved_repair();
    gc.seed = o.seed;
    gc.max_tuples = o.max_tuples > 0
                        ? o.max_tuples
                        : std::max(1, static_cast<int>(std::ceil(1.5 * ckpt.max_train_edges)));
    auto [ds, report] = generate_graphs(ckpt.params, ckpt.vocab, gc);

    write_artifact_dir(o, "generate");
    if (!ds.graphs.empty())
        save_dataset_file(ds, (fs::path(o.out_dir) / "generated.txt").string());
    write_text(fs::path(o.out_dir) / "generation_report.tsv", report.to_text());
    std::cout << "emitted " << report.emitted << "/" << report.requested << " graphs in "
              << report.attempts << " attempts\n";
    if (report.budget_exhausted) {
        std::cerr << "warning: attempt budget exhausted before reaching the requested count\n";
    }
    return 0;
}

int cmd_evaluate(const Options& o) {
    GraphDataset gen = load_dataset_file(o.gen_path, o.unlabeled_edges);
    GraphDataset test = load_dataset_file(o.test_path, o.unlabeled_edges);
    GraphDataset train = load_dataset_file(o.train_path, o.unlabeled_edges);
    EvalConfig cfg;
    cfg.sigma = o.sigma;
    cfg.clustering_bins = o.clustering_bins;
    cfg.nspdk_radius = o.nspdk_radius;
    cfg.nspdk_distance = o.nspdk_distance;
    MetricReport r = evaluate(gen, test, train, cfg);

    write_artifact_dir(o, "evaluate");
    write_text(fs::path(o.out_dir) / "metrics.txt", report_text(r));
    write_text(fs::path(o.out_dir) / "metrics.json", report_json(r) + "\n");
    std::cout << report_text(r);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot labeled-graph generative modeling"};
    app.require_subcommand(1);
    Options o;

    CommandContext synth{app.add_subcommand("synth", "generate an N-body spring dataset"), {}, &o};
    synth.shared_flags();
    synth.table.add("synth.particles", synth.cmd->add_option("--particles", o.particles), setter(o.particles));
    synth.table.add("synth.count", synth.cmd->add_option("--count", o.synth_count), setter(o.synth_count));
    synth.table.add("synth.grid-side", synth.cmd->add_option("--grid-side", o.grid_side), setter(o.grid_side));
    synth.table.add("synth.edge-prob", synth.cmd->add_option("--edge-prob", o.edge_prob), setter(o.edge_prob));

    CommandContext canon{app.add_subcommand("canon", "dump minimum DFS codes for a dataset"), {}, &o};
    canon.shared_flags();
    canon.cmd->add_option("--data", o.data_path, "transaction-format dataset")->required();
    canon.table.add("data.unlabeled-edges", canon.cmd->add_flag("--unlabeled-edges", o.unlabeled_edges),
                    setter(o.unlabeled_edges));

    CommandContext split{app.add_subcommand("split", "split a dataset into train/validation/test"), {}, &o};
    split.shared_flags();
    split.split_flags();
    split.cmd->add_option("--data", o.data_path)->required();
    split.table.add("data.unlabeled-edges", split.cmd->add_flag("--unlabeled-edges", o.unlabeled_edges),
                    setter(o.unlabeled_edges));

    CommandContext meta{app.add_subcommand("meta-train", "meta-train on auxiliary datasets"), {}, &o};
    meta.shared_flags();
    meta.model_flags();
    meta.cmd->add_option("--aux", o.aux_paths, "auxiliary dataset files")->required();
    meta.cmd->add_option("--extra-vocab", o.extra_vocab_paths,
                         "extra datasets included when building the shared vocabulary");
    meta.table.add("data.unlabeled-edges", meta.cmd->add_flag("--unlabeled-edges", o.unlabeled_edges),
                   setter(o.unlabeled_edges));
    meta.table.add("meta.k", meta.cmd->add_option("--k", o.meta_k), setter(o.meta_k));
    meta.table.add("meta.epsilon", meta.cmd->add_option("--epsilon", o.meta_epsilon), setter(o.meta_epsilon));
    meta.table.add("meta.inner-lr", meta.cmd->add_option("--inner-lr", o.inner_lr), setter(o.inner_lr));
    meta.table.add("meta.inner-batch", meta.cmd->add_option("--inner-batch", o.inner_batch), setter(o.inner_batch));
    meta.table.add("meta.dropout", meta.cmd->add_option("--meta-dropout", o.meta_dropout), setter(o.meta_dropout));
    meta.table.add("meta.budget", meta.cmd->add_option("--budget", o.meta_budget), setter(o.meta_budget));
    meta.table.add("meta.val-every", meta.cmd->add_option("--val-every", o.meta_val_every), setter(o.meta_val_every));
    meta.table.add("meta.patience", meta.cmd->add_option("--meta-patience", o.meta_patience), setter(o.meta_patience));

    CommandContext pre{app.add_subcommand("pretrain", "plain pooled training on auxiliary datasets"), {}, &o};
    pre.shared_flags();
    pre.model_flags();
    pre.train_flags();
    pre.cmd->add_option("--aux", o.aux_paths)->required();
    pre.cmd->add_option("--extra-vocab", o.extra_vocab_paths);
    pre.table.add("data.unlabeled-edges", pre.cmd->add_flag("--unlabeled-edges", o.unlabeled_edges),
                  setter(o.unlabeled_edges));

    CommandContext ft{app.add_subcommand("fine-tune",
                                         "adapt a checkpoint to a target dataset "
                                         "(no --init = train from scratch)"),
                      {},
                      &o};
    ft.shared_flags();
    ft.model_flags();
    ft.train_flags();
    ft.split_flags();
    ft.cmd->add_option("--target", o.target_path)->required();
    ft.cmd->add_option("--init", o.init_ckpt, "checkpoint to start from");
    ft.table.add("data.unlabeled-edges", ft.cmd->add_flag("--unlabeled-edges", o.unlabeled_edges),
                 setter(o.unlabeled_edges));
    ft.table.add("sp.vanilla", ft.cmd->add_flag("--vanilla", o.vanilla, "plain fine-tuning ablation"),
                 setter(o.vanilla));
    ft.table.add("sp.lambda0", ft.cmd->add_option("--lambda0", o.lambda0), setter(o.lambda0));
    ft.table.add("sp.gamma", ft.cmd->add_option("--gamma", o.gamma), setter(o.gamma));
    ft.table.add("sp.max-batches", ft.cmd->add_option("--max-batches", o.sp_max_batches), setter(o.sp_max_batches));
    ft.table.add("sp.val-every", ft.cmd->add_option("--sp-val-every", o.sp_val_every), setter(o.sp_val_every));
    ft.table.add("sp.patience", ft.cmd->add_option("--sp-patience", o.sp_patience), setter(o.sp_patience));

    CommandContext gen{app.add_subcommand("generate", "sample graphs from a checkpoint"), {}, &o};
    gen.shared_flags();
    gen.cmd->add_option("--init", o.init_ckpt)->required();
    gen.table.add("gen.count", gen.cmd->add_option("--count", o.gen_count), setter(o.gen_count));
    gen.table.add("gen.max-tuples", gen.cmd->add_option("--max-tuples", o.max_tuples), setter(o.max_tuples));
    gen.table.add("gen.temperature", gen.cmd->add_option("--temperature", o.temperature), setter(o.temperature));
    gen.table.add("gen.repair", gen.cmd->add_option("--repair", o.repair, "strict | lenient"), setter(o.repair));

    CommandContext ev{app.add_subcommand("evaluate", "metric suite: generated vs test vs train"), {}, &o};
    ev.shared_flags();
    ev.cmd->add_option("--gen", o.gen_path)->required();
    ev.cmd->add_option("--test", o.test_path)->required();
    ev.cmd->add_option("--train", o.train_path)->required();
    ev.table.add("data.unlabeled-edges", ev.cmd->add_flag("--unlabeled-edges", o.unlabeled_edges),
                 setter(o.unlabeled_edges));
    ev.table.add("eval.sigma", ev.cmd->add_option("--sigma", o.sigma), setter(o.sigma));
    ev.table.add("eval.clustering-bins", ev.cmd->add_option("--clustering-bins", o.clustering_bins),
                 setter(o.clustering_bins));
    ev.table.add("eval.nspdk-radius", ev.cmd->add_option("--nspdk-radius", o.nspdk_radius),
                 setter(o.nspdk_radius));
    ev.table.add("eval.nspdk-distance", ev.cmd->add_option("--nspdk-distance", o.nspdk_distance),
                 setter(o.nspdk_distance));

    try {
        app.parse(argc, argv);
        for (CommandContext* ctx : {&synth, &canon, &split, &meta, &pre, &ft, &gen, &ev})
            if (ctx->cmd->parsed()) ctx->finish(argc, argv);

        if (synth.cmd->parsed()) return cmd_synth(o);
        if (canon.cmd->parsed()) return cmd_canon(o);
        if (split.cmd->parsed()) return cmd_split(o);
        if (meta.cmd->parsed()) return cmd_meta_train(o);
        if (pre.cmd->parsed()) return cmd_pretrain(o);
        if (ft.cmd->parsed()) return cmd_fine_tune(o);
        if (gen.cmd->parsed()) return cmd_generate(o);
        if (ev.cmd->parsed()) return cmd_evaluate(o);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
