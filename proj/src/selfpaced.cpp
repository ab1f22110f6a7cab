#include "fewgraph/selfpaced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fewgraph/errors.hpp"
#include "fewgraph/meta.hpp"

namespace fewgraph {

std::vector<char> select_samples(std::span<const double> losses, double lambda) {
    std::vector<char> beta(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (!std::isfinite(losses[i])) throw NumericError("non-finite sample loss");
        beta[i] = losses[i] < lambda ? 1 : 0;
    }
    return beta;
}

double auto_lambda0(std::span<const double> losses) {
    if (losses.empty()) throw DataError("cannot derive a pace threshold from no losses");
    std::vector<double> sorted(losses.begin(), losses.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx = static_cast<std::size_t>(0.25 * static_cast<double>(sorted.size() - 1));
    const double p25 = sorted[idx];
    if (p25 > sorted.front()) return p25;
    // all candidate losses tie at the minimum; nudge above it so selection is nonempty
    return std::nextafter(sorted.front(), std::numeric_limits<double>::infinity());
}

SpStepResult self_paced_batch_step(ModelParams& p, std::span<const DfsCode* const> batch,
                                   double lambda, const TrainConfig& cfg, AdamState& adam,
                                   const Vocabulary& v, std::uint64_t batch_seed,
                                   std::vector<ModelParams>& grad_buf, bool always_select) {
    if (batch.empty()) throw DataError("empty batch");
    std::vector<double> losses;
    const RunMode mode = cfg.dropout > 0.0 ? RunMode::train : RunMode::eval;
    per_sequence_loss_grads(p, batch, v, mode, cfg.dropout, batch_seed, cfg.threads, losses,
                            grad_buf);
    std::vector<char> beta = select_samples(losses, lambda);
    if (always_select) std::fill(beta.begin(), beta.end(), char{1});

    SpStepResult res;
    for (double l : losses) res.batch_loss_sum += l;
    ModelParams grad = p;
    fill_zero(grad);
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (!beta[i]) continue;
        ++res.selected;
        res.selected_loss_sum += losses[i];
        axpy(1.0, grad_buf[i], grad);
    }
    if (res.selected == 0) return res;   // empty objective: no update at all
    if (cfg.batch_mean) scale(1.0 / static_cast<double>(batch.size()), grad);
    adam_step(p, grad, adam, cfg);
    return res;
}

namespace {

FineTuneResult run_fine_tune(const ModelParams& theta, std::span<const DfsCode> target,
                             const SelfPacedConfig& cfg, std::span<const DfsCode> val,
                             const Vocabulary& v, bool always_select) {
    if (target.empty()) throw DataError("fine-tuning needs a nonempty target set");
    if (!(cfg.gamma >= 1.0)) throw ConfigError("pace growth factor must be at least 1");
    if (!(cfg.train.lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(cfg.train.dropout >= 0.0 && cfg.train.dropout < 1.0))
        throw ConfigError("dropout must lie in [0,1)");
    if (cfg.train.batch_size < 1) throw ConfigError("batch size must be at least 1");
    std::span<const DfsCode> val_codes = val.empty() ? target : val;

    FineTuneResult res;
    ModelParams p = theta;
    AdamState adam = AdamState::create(p);
    std::vector<ModelParams> grad_buf;

    double lambda = cfg.lambda0;
    if (!always_select && lambda <= 0.0) {
        std::vector<double> init_losses(target.size());
        for (std::size_t i = 0; i < target.size(); ++i)
            init_losses[i] = sequence_loss(p, target[i], v);
        lambda = auto_lambda0(init_losses);
    }

    res.params = p;
    res.best_val_loss = std::numeric_limits<double>::infinity();
    double prev_val = std::numeric_limits<double>::infinity();
    int best_point = 0, point = 0, flat_points = 0;

    for (int batch_idx = 0; batch_idx < cfg.max_batches; ++batch_idx) {
        auto idx = sample_batch_indices(cfg.train.seed, batch_idx, cfg.train.batch_size,
                                        static_cast<int>(target.size()));
        std::vector<const DfsCode*> batch;
        batch.reserve(idx.size());
        for (int i : idx) batch.push_back(&target[static_cast<std::size_t>(i)]);
        const std::uint64_t bseed =
            mix_seed(mix_seed(cfg.train.seed, 0xf1e7), static_cast<std::uint64_t>(batch_idx));
        SpStepResult step = self_paced_batch_step(p, batch, lambda, cfg.train, adam, v, bseed,
                                                  grad_buf, always_select);
        FineTuneLogEntry entry;
        entry.batch = batch_idx + 1;
        entry.lambda = always_select ? std::numeric_limits<double>::infinity() : lambda;
        entry.selected = step.selected;
        entry.batch_loss = step.selected ? step.selected_loss_sum / step.selected : 0.0;
        lambda *= cfg.gamma;   // difficulty grows after every batch

        if (cfg.val_every > 0 && (batch_idx + 1) % cfg.val_every == 0) {
            const double vl = mean_sequence_loss(p, val_codes, v, cfg.train.threads);
            entry.validated = true;
            entry.val_loss = vl;
            ++point;
            res.log.push_back(entry);
            if (vl < res.best_val_loss) {
                res.best_val_loss = vl;
                res.params = p;
                best_point = point;
            }
            if (cfg.patience > 0 && point - best_point >= cfg.patience) break;
            const double rel = std::abs(vl - prev_val) / std::max(std::abs(prev_val), 1e-12);
            flat_points = rel < cfg.train.stop_rel_change ? flat_points + 1 : 0;
            if (cfg.patience > 0 && flat_points >= cfg.patience) break;
            prev_val = vl;
            continue;
        }
        res.log.push_back(entry);
    }
    if (point == 0) {
        res.params = p;
        res.best_val_loss = mean_sequence_loss(p, val_codes, v, cfg.train.threads);
    }
    return res;
}

} // namespace

FineTuneResult fine_tune(const ModelParams& theta, std::span<const DfsCode> target,
                         const SelfPacedConfig& cfg, std::span<const DfsCode> val,
                         const Vocabulary& v) {
    return run_fine_tune(theta, target, cfg, val, v, false);
}

FineTuneResult vanilla_fine_tune(const ModelParams& theta, std::span<const DfsCode> target,
                                 const SelfPacedConfig& cfg, std::span<const DfsCode> val,
                                 const Vocabulary& v) {
    return run_fine_tune(theta, target, cfg, val, v, true);
}

std::string format_fine_tune_log(std::span<const FineTuneLogEntry> log) {
    std::ostringstream out;
    out << "batch\tlambda\tselected\tbatch_loss\tval_loss\n";
    for (const FineTuneLogEntry& e : log) {
        out << e.batch << '\t' << e.lambda << '\t' << e.selected << '\t' << e.batch_loss << '\t';
        if (e.validated) out << e.val_loss;
        out << '\n';
    }
    return out.str();
}

} // namespace fewgraph
