#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fewgraph/dfs_code.hpp"
#include "fewgraph/rng.hpp"
#include "fewgraph/tensor.hpp"
#include "fewgraph/vocab.hpp"

namespace fewgraph {

struct ModelDims {
    int embed = 128;
    int hidden = 256;
    int head_hidden = 512;
    bool operator==(const ModelDims&) const = default;
};

// Embedding, one LSTM cell, and five two-layer softmax heads (one per tuple
// component). All coefficients are 64-bit.
struct ModelParams {
    ModelDims dims;
    std::array<int, 5> comp_sizes{};
    int input_dim = 0;

    Tensor emb_w, emb_b;
    Tensor w_in, u_in, b_in;      // input gate
    Tensor w_fg, u_fg, b_fg;      // forget gate
    Tensor w_out, u_out, b_out;   // output gate
    Tensor w_cd, u_cd, b_cd;      // candidate
    std::array<Tensor, 5> head_w1, head_b1, head_w2, head_b2;

    // zero-valued parameters with the right shapes
    static ModelParams create(const Vocabulary& v, ModelDims dims);
    // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except the
    // forget gate bias at 1
    static ModelParams init_random(const Vocabulary& v, ModelDims dims, std::uint64_t seed);

    std::size_t coefficient_count() const;
    bool shape_matches(const ModelParams& other) const;
};

std::vector<Tensor*> tensor_list(ModelParams& p);
std::vector<const Tensor*> tensor_list(const ModelParams& p);
std::vector<std::pair<std::string, Tensor*>> named_tensor_list(ModelParams& p);

void fill_zero(ModelParams& p);
// y += a * x, coordinate-wise over all tensors
void axpy(double a, const ModelParams& x, ModelParams& y);
void scale(double a, ModelParams& y);
double max_abs_difference(const ModelParams& a, const ModelParams& b);
bool params_equal(const ModelParams& a, const ModelParams& b);
bool all_finite(const ModelParams& p);

enum class RunMode { train, eval };

struct HiddenState {
    std::vector<double> h, c;
};
HiddenState initial_state(const ModelParams& p);   // zeros

struct StepResult {
    HiddenState state;
    std::array<std::vector<double>, 5> logits;
};

// One recurrent step. Dropout (train mode only) applies to the embedding
// output and to h before the heads; the recurrent path stays undropped.
StepResult forward_step(const ModelParams& p, const HiddenState& state, const TokenIndices& x,
                        RunMode mode = RunMode::eval, double dropout = 0.0, Rng* rng = nullptr);

std::array<std::vector<double>, 5> head_distributions(const StepResult& step);

// Teacher-forced loss over s_0=SOS, s_1..s_m, with the EOS-in-all-components
// target at step m+1:
//   -sum_i sum_c [ s_i[c] log p_i[c] + (1 - s_i[c]) log(1 - p_i[c]) ]
// where p_i concatenates the five softmaxed heads. Evaluation mode.
double sequence_loss(const ModelParams& p, const DfsCode& code, const Vocabulary& v);

// Loss plus exact gradient by backpropagation through time over all m+1
// steps. grad may be null for a loss-only pass. In train mode dropout masks
// are drawn from mask_seed; evaluation mode is deterministic.
double sequence_loss_grad(const ModelParams& p, const DfsCode& code, const Vocabulary& v,
                          RunMode mode, double dropout, std::uint64_t mask_seed,
                          ModelParams* grad);

struct TrainConfig {
    double lr = 0.003;
    int batch_size = 32;
    double dropout = 0.2;
    double l2 = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    bool batch_mean = true;          // optimizer input = gradient sum / batch size
    double stop_rel_change = 5e-4;   // < 0.05% relative validation change
    int patience = 10;
    int max_epochs = 400;
    int threads = 1;
    std::uint64_t seed = 0;
};

struct AdamState {
    ModelParams m, v;
    long step = 0;

    static AdamState create(const ModelParams& like);
};

// Adaptive-moment update with the L2 term folded into the gradient
// (g = grad + l2 * weight) and bias-corrected moments.
// Throws NumericError on non-finite gradients.
void adam_step(ModelParams& p, const ModelParams& grad, AdamState& state, const TrainConfig& cfg);

// Gradient sum over a batch, accumulated in slot order (deterministic for a
// fixed thread count; exact for threads == 1). Returns the loss sum.
double batch_gradient(const ModelParams& p, std::span<const DfsCode* const> batch,
                      const Vocabulary& v, RunMode mode, double dropout,
                      std::uint64_t batch_seed, int threads, ModelParams& grad_out);

// Per-slot losses and gradients of one batch; used by the self-paced loop so
// selection can filter slots after the fact. grads is resized to the batch.
void per_sequence_loss_grads(const ModelParams& p, std::span<const DfsCode* const> batch,
                             const Vocabulary& v, RunMode mode, double dropout,
                             std::uint64_t batch_seed, int threads,
                             std::vector<double>& losses, std::vector<ModelParams>& grads);

// Mean per-sequence loss in evaluation mode.
double mean_sequence_loss(const ModelParams& p, std::span<const DfsCode> codes,
                          const Vocabulary& v, int threads);

struct EpochLogEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

// Minibatch training with a seeded shuffle per epoch and Adam updates.
// Stops when the validation loss has not improved for `patience` epochs, or
// has changed by less than stop_rel_change over the patience window, or at
// max_epochs; patience 0 stops after exactly one epoch. Returns the
// best-validation parameters. Empty validation falls back to the training
// codes.
ModelParams train_epochs(ModelParams p, std::span<const DfsCode> train_codes,
                         const TrainConfig& cfg, std::span<const DfsCode> val_codes,
                         const Vocabulary& v, std::vector<EpochLogEntry>* log = nullptr);

} // namespace fewgraph
