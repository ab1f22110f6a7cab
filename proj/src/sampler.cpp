#include "fewgraph/sampler.hpp"

#include <cmath>
#include <sstream>

#include "fewgraph/errors.hpp"

namespace fewgraph {

namespace {

int sample_categorical(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;   // guard against rounding at the top end
}

} // namespace

std::vector<EdgeTuple> sample_sequence(const ModelParams& p, const Vocabulary& v,
                                       const GenerationConfig& gc, Rng& rng, bool* truncated) {
    if (gc.max_tuples < 1) throw ConfigError("max_tuples must be at least 1");
    if (!(gc.temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (truncated) *truncated = false;

    std::vector<EdgeTuple> out;
    HiddenState state = initial_state(p);
    TokenIndices x = TokenIndices::start();
    for (int step = 0; step < gc.max_tuples; ++step) {
        StepResult sr = forward_step(p, state, x);
        std::array<int, 5> picks{};
        bool eos = false;
        for (int k = 0; k < 5; ++k) {
            auto z = sr.logits[static_cast<std::size_t>(k)];
            if (gc.temperature != 1.0)
                for (double& l : z) l /= gc.temperature;
            softmax(z);
            const int pick = sample_categorical(z, rng);
            picks[static_cast<std::size_t>(k)] = pick;
            if (pick == v.eos(k)) eos = true;
        }
        if (eos) return out;   // the terminating tuple is discarded entirely
        out.push_back(EdgeTuple{picks[0], picks[1], picks[2], picks[3], picks[4]});
        state = sr.state;
        x.sos = false;
        x.idx = picks;
    }
    if (truncated) *truncated = true;
    return out;
}

std::pair<GraphDataset, GenerationReport> generate_graphs(const ModelParams& p,
                                                          const Vocabulary& v,
                                                          const GenerationConfig& gc) {
    if (gc.count < 1) throw ConfigError("generation count must be at least 1");
    GraphDataset out;
    out.name = "generated";
    for (const std::string& t : v.node_labels) out.node_labels.add(t);
    for (const std::string& t : v.edge_labels) out.edge_labels.add(t);

    GenerationReport report;
    report.requested = gc.count;
    const long budget = 10L * gc.count;

    while (report.emitted < gc.count && report.attempts < budget) {
        Rng rng(mix_seed(gc.seed, static_cast<std::uint64_t>(report.attempts)));
        ++report.attempts;
        bool truncated = false;
        std::vector<EdgeTuple> raw = sample_sequence(p, v, gc, rng, &truncated);
        if (truncated) {
            ++report.truncated;
            if (gc.repair == RepairMode::strict) {
                ++report.rejected_invalid;
                ++report.rejection_reasons["truncated at max_tuples"];
                continue;
            }
        }
        RepairResult rep = repair_code(raw, gc.repair);
        if (!rep.accepted()) {
            ++report.rejected_invalid;
            ++report.rejection_reasons[rep.rejection];
            continue;
        }
        LabeledGraph g;
        try {
            g = code_to_graph(*rep.code);
            validate_graph(g, out.node_labels.size(), out.edge_labels.size());
        } catch (const DataError& e) {
            ++report.rejected_invalid;
            ++report.rejection_reasons[e.what()];
            continue;
        }
        out.graphs.push_back(std::move(g));
        ++report.emitted;
    }
    report.budget_exhausted = report.emitted < gc.count;
    return {std::move(out), std::move(report)};
}

std::string GenerationReport::to_text() const {
    std::ostringstream s;
    s << "requested\t" << requested << '\n'
      << "attempts\t" << attempts << '\n'
      << "emitted\t" << emitted << '\n'
      << "rejected_invalid\t" << rejected_invalid << '\n'
      << "truncated\t" << truncated << '\n'
      << "budget_exhausted\t" << (budget_exhausted ? 1 : 0) << '\n';
    for (const auto& [reason, count] : rejection_reasons)
        s << "reason\t" << reason << '\t' << count << '\n';
    return s.str();
}

} // namespace fewgraph
