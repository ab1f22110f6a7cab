#pragma once

#include <cstdint>
#include <string>

#include "fewgraph/model.hpp"

namespace fewgraph {

// Versioned model container: a text header carrying the format version,
// vocabulary, dimensions, seed and step count, followed by named tensors in
// row-major 64-bit little-endian. Loading a saved file is bit-exact.
struct Checkpoint {
    ModelParams params;
    Vocabulary vocab;
    std::uint64_t seed = 0;
    long step = 0;
    int max_train_edges = 0;   // longest training code; sets the sampler default cap
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace fewgraph
