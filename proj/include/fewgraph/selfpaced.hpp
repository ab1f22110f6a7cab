#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fewgraph/model.hpp"

namespace fewgraph {

struct SelfPacedConfig {
    double lambda0 = 0.0;       // <= 0 selects the 25th percentile of initial losses
    double gamma = 1.001;       // pace threshold growth per batch
    TrainConfig train;          // optimizer settings (Adam, dropout, L2, seed, threads)
    int max_batches = 2000;
    int val_every = 50;         // batches between validation points
    int patience = 5;           // validation points without improvement
};

// beta_i = 1 iff losses[i] < lambda.
std::vector<char> select_samples(std::span<const double> losses, double lambda);

// 25th percentile of the losses, nudged above the minimum so at least one
// sample is always selected.
double auto_lambda0(std::span<const double> losses);

struct SpStepResult {
    int selected = 0;
    double selected_loss_sum = 0.0;
    double batch_loss_sum = 0.0;
};

// One self-paced batch update: per-sequence losses select the samples, the
// gradient step runs on the sum of the selected losses only. When nothing is
// selected the parameters and optimizer state stay untouched. grad_buf is a
// reusable per-slot scratch buffer.
SpStepResult self_paced_batch_step(ModelParams& p, std::span<const DfsCode* const> batch,
                                   double lambda, const TrainConfig& cfg, AdamState& adam,
                                   const Vocabulary& v, std::uint64_t batch_seed,
                                   std::vector<ModelParams>& grad_buf, bool always_select = false);

struct FineTuneLogEntry {
    int batch = 0;
    double lambda = 0.0;
    int selected = 0;
    double batch_loss = 0.0;    // mean over selected samples (0 when none)
    bool validated = false;
    double val_loss = 0.0;
};

struct FineTuneResult {
    ModelParams params;                 // best-validation parameters
    double best_val_loss = 0.0;
    std::vector<FineTuneLogEntry> log;
};

// Self-paced fine-tuning from theta: seeded batches with replacement, lambda
// multiplied by gamma after every batch, Adam updates on the selected subset.
// Stops on the validation rule or at max_batches.
FineTuneResult fine_tune(const ModelParams& theta, std::span<const DfsCode> target,
                         const SelfPacedConfig& cfg, std::span<const DfsCode> val,
                         const Vocabulary& v);

// The ablation: identical loop with every sample always selected.
FineTuneResult vanilla_fine_tune(const ModelParams& theta, std::span<const DfsCode> target,
                                 const SelfPacedConfig& cfg, std::span<const DfsCode> val,
                                 const Vocabulary& v);

std::string format_fine_tune_log(std::span<const FineTuneLogEntry> log);

} // namespace fewgraph
