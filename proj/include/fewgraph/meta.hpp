#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fewgraph/model.hpp"

namespace fewgraph {

struct MetaConfig {
    int k = 15;                 // inner gradient steps per sampled dataset
    double epsilon = 0.8;       // meta step size
    double inner_lr = 0.003;
    int inner_batch = 32;
    double dropout = 0.2;
    bool batch_mean = true;
    int budget = 1000;          // meta-iteration cap
    int val_every = 25;         // meta-iterations between validation points
    int patience = 5;           // validation points without improvement
    double stop_rel_change = 5e-4;
    int threads = 1;
    std::uint64_t seed = 0;
};

struct CodeSet {
    std::string name;
    std::vector<DfsCode> train;
    std::vector<DfsCode> validation;
};

// The batch schedule shared by the inner loop and its tests: step `step`
// draws batch_size uniform indices (with replacement) out of count.
std::vector<int> sample_batch_indices(std::uint64_t seed, int step, int batch_size, int count);

// K plain gradient steps from theta on seeded minibatches of codes; the input
// theta is left untouched. No adaptive moments and no weight decay here.
ModelParams inner_loop(const ModelParams& theta, std::span<const DfsCode> codes, int k,
                       double alpha, int batch_size, std::uint64_t seed, const Vocabulary& v,
                       double dropout = 0.0, bool batch_mean = true, int threads = 1,
                       double* first_batch_loss = nullptr, double* last_batch_loss = nullptr);

// theta <- theta + epsilon * (adapted - theta), coordinate-wise.
void reptile_update(ModelParams& theta, const ModelParams& adapted, double epsilon);

struct MetaLogEntry {
    int iteration = 0;
    std::string dataset;
    double inner_start_loss = 0.0;
    double inner_end_loss = 0.0;
    bool validated = false;
    double val_loss = 0.0;
};

// Reptile loop: sample a dataset uniformly, adapt with inner_loop, move theta
// toward the adapted parameters. Validates on the pooled held-out codes of
// all datasets every val_every iterations and returns the best-validation
// parameters (the initial theta when budget is 0).
ModelParams meta_train(ModelParams theta, std::span<const CodeSet> datasets, const MetaConfig& mc,
                       const Vocabulary& v, std::vector<MetaLogEntry>* log = nullptr);

std::string format_meta_log(std::span<const MetaLogEntry> log);

} // namespace fewgraph
