#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fewgraph/model.hpp"

namespace fewgraph {

struct GenerationConfig {
    int max_tuples = 64;                 // hard sequence-length cap
    double temperature = 1.0;            // softmax temperature (diagnostics only)
    RepairMode repair = RepairMode::strict;
    std::uint64_t seed = 0;
    int count = 1;                       // graphs requested
};

struct GenerationReport {
    int requested = 0;
    int attempts = 0;
    int emitted = 0;
    int rejected_invalid = 0;
    int truncated = 0;                   // sequences cut at max_tuples
    std::map<std::string, int> rejection_reasons;
    bool budget_exhausted = false;

    std::string to_text() const;
};

// Autoregressive draw: h0 = 0 and SOS in, one tuple per step with the five
// components sampled independently from their softmax distributions. Stops
// when any component draws EOS (that tuple is discarded) or at max_tuples.
std::vector<EdgeTuple> sample_sequence(const ModelParams& p, const Vocabulary& v,
                                       const GenerationConfig& gc, Rng& rng,
                                       bool* truncated = nullptr);

// Samples until `count` valid graphs are collected or 10 * count attempts are
// spent. Each raw sequence goes through repair_code in the configured mode and
// then decodes; every attempt is accounted for in the report.
std::pair<GraphDataset, GenerationReport> generate_graphs(const ModelParams& p,
                                                          const Vocabulary& v,
                                                          const GenerationConfig& gc);

} // namespace fewgraph
