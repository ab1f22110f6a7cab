#include "fewgraph/meta.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fewgraph/errors.hpp"

namespace fewgraph {

namespace {
constexpr std::uint64_t kBatchTag = 0x5a1ad00d;
constexpr std::uint64_t kMaskTag = 0x0ddba11;
constexpr std::uint64_t kPickTag = 0x9100f;
} // namespace

std::vector<int> sample_batch_indices(std::uint64_t seed, int step, int batch_size, int count) {
    Rng rng(mix_seed(mix_seed(seed, kBatchTag), static_cast<std::uint64_t>(step)));
    std::vector<int> idx(static_cast<std::size_t>(batch_size));
    for (int j = 0; j < batch_size; ++j) idx[static_cast<std::size_t>(j)] = rng.below_int(count);
    return idx;
}

ModelParams inner_loop(const ModelParams& theta, std::span<const DfsCode> codes, int k,
                       double alpha, int batch_size, std::uint64_t seed, const Vocabulary& v,
                       double dropout, bool batch_mean, int threads,
                       double* first_batch_loss, double* last_batch_loss) {
    if (codes.empty()) throw DataError("inner loop needs a nonempty code set");
    if (k < 1) throw ConfigError("inner step count must be at least 1");
    ModelParams p = theta;
    ModelParams grad = theta;
    for (int step = 0; step < k; ++step) {
        auto idx = sample_batch_indices(seed, step, batch_size, static_cast<int>(codes.size()));
        std::vector<const DfsCode*> batch;
        batch.reserve(idx.size());
        for (int i : idx) batch.push_back(&codes[static_cast<std::size_t>(i)]);
        const std::uint64_t mask_seed = mix_seed(mix_seed(seed, kMaskTag), static_cast<std::uint64_t>(step));
        const RunMode mode = dropout > 0.0 ? RunMode::train : RunMode::eval;
        double loss = batch_gradient(p, batch, v, mode, dropout, mask_seed, threads, grad);
        if (batch_mean) scale(1.0 / static_cast<double>(batch.size()), grad);
        if (!all_finite(grad)) throw NumericError("non-finite inner-loop gradient");
        axpy(-alpha, grad, p);
        const double mean_loss = loss / static_cast<double>(batch.size());
        if (step == 0 && first_batch_loss) *first_batch_loss = mean_loss;
        if (step == k - 1 && last_batch_loss) *last_batch_loss = mean_loss;
    }
    return p;
}

void reptile_update(ModelParams& theta, const ModelParams& adapted, double epsilon) {
    if (!theta.shape_matches(adapted)) throw DataError("parameter shape mismatch");
    if (epsilon == 0.0) return;
    if (epsilon == 1.0) {   // exact replacement at the interpolation endpoint
        theta = adapted;
        return;
    }
    auto ts = tensor_list(theta);
    auto as = tensor_list(adapted);
    for (std::size_t t = 0; t < ts.size(); ++t)
        for (std::size_t j = 0; j < ts[t]->size(); ++j)
            ts[t]->v[j] += epsilon * (as[t]->v[j] - ts[t]->v[j]);
}

ModelParams meta_train(ModelParams theta, std::span<const CodeSet> datasets, const MetaConfig& mc,
                       const Vocabulary& v, std::vector<MetaLogEntry>* log) {
    if (datasets.empty()) throw DataError("meta-training needs at least one dataset");
    if (mc.k < 1) throw ConfigError("inner step count must be at least 1");
    if (!(mc.epsilon >= 0.0 && mc.epsilon <= 1.0)) throw ConfigError("meta step size must lie in [0,1]");
    if (!(mc.inner_lr > 0.0)) throw ConfigError("inner learning rate must be positive");
    for (const CodeSet& d : datasets)
        if (d.train.empty()) throw DataError("meta-training dataset '" + d.name + "' has no codes");

    std::vector<DfsCode> pooled_val;
    for (const CodeSet& d : datasets)
        pooled_val.insert(pooled_val.end(), d.validation.begin(), d.validation.end());

    Rng pick(mix_seed(mc.seed, kPickTag));
    ModelParams best = theta;
    double best_val = std::numeric_limits<double>::infinity();
    double prev_val = std::numeric_limits<double>::infinity();
    int best_point = 0, point = 0, flat_points = 0;

    for (int iter = 1; iter <= mc.budget; ++iter) {
        const std::size_t pick_idx = pick.below(datasets.size());
        const CodeSet& d = datasets[pick_idx];
        MetaLogEntry entry;
        entry.iteration = iter;
        entry.dataset = d.name;
        ModelParams adapted =
            inner_loop(theta, d.train, mc.k, mc.inner_lr, mc.inner_batch,
                       mix_seed(mc.seed, static_cast<std::uint64_t>(iter)), v, mc.dropout,
                       mc.batch_mean, mc.threads, &entry.inner_start_loss, &entry.inner_end_loss);
        reptile_update(theta, adapted, mc.epsilon);

        if (!pooled_val.empty() && mc.val_every > 0 && iter % mc.val_every == 0) {
            const double val = mean_sequence_loss(theta, pooled_val, v, mc.threads);
            entry.validated = true;
            entry.val_loss = val;
            ++point;
            if (val < best_val) {
                best_val = val;
                best = theta;
                best_point = point;
            }
            if (log) log->push_back(entry);
            if (mc.patience > 0 && point - best_point >= mc.patience) break;
            const double rel = std::abs(val - prev_val) / std::max(std::abs(prev_val), 1e-12);
            flat_points = rel < mc.stop_rel_change ? flat_points + 1 : 0;
            if (mc.patience > 0 && flat_points >= mc.patience) break;
            prev_val = val;
            continue;
        }
        if (log) log->push_back(entry);
    }
    if (pooled_val.empty() || point == 0) return theta;
    return best;
}

std::string format_meta_log(std::span<const MetaLogEntry> log) {
    std::ostringstream out;
    out << "iteration\tdataset\tinner_start_loss\tinner_end_loss\tval_loss\n";
    for (const MetaLogEntry& e : log) {
        out << e.iteration << '\t' << e.dataset << '\t' << e.inner_start_loss << '\t'
            << e.inner_end_loss << '\t';
        if (e.validated) out << e.val_loss;
        out << '\n';
    }
    return out.str();
}

} // namespace fewgraph
