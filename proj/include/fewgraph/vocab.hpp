#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fewgraph/dfs_code.hpp"
#include "fewgraph/graph.hpp"

namespace fewgraph {

enum class LabelOrder { appearance, symbol };

// Token spaces for the five tuple components. Components t_u and t_v share
// timestamp tokens 0..max_timestamp-1 plus EOS; the label components hold the
// merged label sets plus EOS. EOS is always the last index of its block.
struct Vocabulary {
    int max_timestamp = 0;
    std::vector<std::string> node_labels;
    std::vector<std::string> edge_labels;

    int ts_tokens() const { return max_timestamp + 1; }
    int node_tokens() const { return static_cast<int>(node_labels.size()) + 1; }
    int edge_tokens() const { return static_cast<int>(edge_labels.size()) + 1; }

    std::array<int, 5> component_sizes() const {
        return {ts_tokens(), ts_tokens(), node_tokens(), edge_tokens(), node_tokens()};
    }
    std::array<int, 5> offsets() const {
        auto s = component_sizes();
        std::array<int, 5> off{};
        for (int k = 1; k < 5; ++k) off[static_cast<std::size_t>(k)] =
            off[static_cast<std::size_t>(k - 1)] + s[static_cast<std::size_t>(k - 1)];
        return off;
    }
    int total_tokens() const {
        auto s = component_sizes();
        return s[0] + s[1] + s[2] + s[3] + s[4];
    }
    int eos(int component) const {
        return component_sizes()[static_cast<std::size_t>(component)] - 1;
    }
    bool operator==(const Vocabulary&) const = default;
};

// max_timestamp = max |V| over every graph; label token sets are the union of
// the datasets' label texts. appearance order merges datasets in sequence;
// symbol order sorts the merged labels lexicographically.
Vocabulary build_vocabulary(std::span<const GraphDataset> datasets,
                            LabelOrder order = LabelOrder::appearance);

// Rewrites a dataset's label ids into the vocabulary's id space.
// Throws DataError on labels missing from the vocabulary.
GraphDataset remap_dataset(const GraphDataset& d, const Vocabulary& v);

// Index form of one input token: component token indices, or SOS (all-zeros
// input vector). EOS-in-all-components is the terminal target.
struct TokenIndices {
    std::array<int, 5> idx{};
    bool sos = false;

    static TokenIndices start() {
        TokenIndices t;
        t.sos = true;
        return t;
    }
    static TokenIndices end_of_sequence(const Vocabulary& v) {
        TokenIndices t;
        for (int k = 0; k < 5; ++k) t.idx[static_cast<std::size_t>(k)] = v.eos(k);
        return t;
    }
    static TokenIndices from_tuple(const EdgeTuple& e, const Vocabulary& v);
};

// Dense concatenated one-hot form; zeros for SOS.
std::vector<double> encode_tuple(const EdgeTuple& t, const Vocabulary& v);
std::vector<double> encode_token(const TokenIndices& t, const Vocabulary& v);
EdgeTuple decode_token_vector(const std::vector<double>& x, const Vocabulary& v);

// Convenience: canonize every graph of a (already remapped) dataset.
std::vector<DfsCode> canonize_dataset(const GraphDataset& d);

} // namespace fewgraph
