#include "fewgraph/vocab.hpp"

#include <algorithm>
#include <unordered_map>

#include "fewgraph/errors.hpp"

namespace fewgraph {

Vocabulary build_vocabulary(std::span<const GraphDataset> datasets, LabelOrder order) {
    if (datasets.empty()) throw ConfigError("vocabulary needs at least one dataset");
    Vocabulary v;
    LabelSet nodes, edges;
    for (const GraphDataset& d : datasets) {
        for (const LabeledGraph& g : d.graphs)
            v.max_timestamp = std::max(v.max_timestamp, g.node_count());
        for (const std::string& t : d.node_labels.texts()) nodes.add(t);
        for (const std::string& t : d.edge_labels.texts()) edges.add(t);
    }
    v.node_labels = nodes.texts();
    v.edge_labels = edges.texts();
    if (order == LabelOrder::symbol) {
        std::sort(v.node_labels.begin(), v.node_labels.end());
        std::sort(v.edge_labels.begin(), v.edge_labels.end());
    }
    // every component needs at least one real symbol next to EOS
    if (v.max_timestamp < 1 || v.node_labels.empty() || v.edge_labels.empty())
        throw DataError("vocabulary is degenerate (a component has no real symbols)");
    return v;
}

GraphDataset remap_dataset(const GraphDataset& d, const Vocabulary& v) {
    std::unordered_map<std::string, int> node_id, edge_id;
    for (std::size_t i = 0; i < v.node_labels.size(); ++i) node_id[v.node_labels[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < v.edge_labels.size(); ++i) edge_id[v.edge_labels[i]] = static_cast<int>(i);

    GraphDataset out;
    out.name = d.name;
    for (const std::string& t : v.node_labels) out.node_labels.add(t);
    for (const std::string& t : v.edge_labels) out.edge_labels.add(t);
    out.graphs.reserve(d.graphs.size());
    for (const LabeledGraph& g : d.graphs) {
        LabeledGraph h = g;
        for (int& l : h.nodes) {
            auto it = node_id.find(d.node_labels.text(l));
            if (it == node_id.end()) throw DataError("node label missing from vocabulary");
            l = it->second;
        }
        for (Edge& e : h.edges) {
            auto it = edge_id.find(d.edge_labels.text(e.label));
            if (it == edge_id.end()) throw DataError("edge label missing from vocabulary");
            e.label = it->second;
        }
        out.graphs.push_back(std::move(h));
    }
    return out;
}

TokenIndices TokenIndices::from_tuple(const EdgeTuple& e, const Vocabulary& v) {
    auto check = [](int value, int real_tokens, const char* what) {
        if (value < 0 || value >= real_tokens)
            throw DataError(std::string("tuple component out of vocabulary range: ") + what);
        return value;
    };
    TokenIndices t;
    t.idx[0] = check(e.t_u, v.max_timestamp, "t_u");
    t.idx[1] = check(e.t_v, v.max_timestamp, "t_v");
    t.idx[2] = check(e.l_u, static_cast<int>(v.node_labels.size()), "l_u");
    t.idx[3] = check(e.l_uv, static_cast<int>(v.edge_labels.size()), "l_uv");
    t.idx[4] = check(e.l_v, static_cast<int>(v.node_labels.size()), "l_v");
    return t;
}

std::vector<double> encode_token(const TokenIndices& t, const Vocabulary& v) {
    std::vector<double> x(static_cast<std::size_t>(v.total_tokens()), 0.0);
    if (t.sos) return x;
    auto off = v.offsets();
    for (int k = 0; k < 5; ++k)
        x[static_cast<std::size_t>(off[static_cast<std::size_t>(k)] +
                                   t.idx[static_cast<std::size_t>(k)])] = 1.0;
    return x;
}

std::vector<double> encode_tuple(const EdgeTuple& t, const Vocabulary& v) {
    return encode_token(TokenIndices::from_tuple(t, v), v);
}

EdgeTuple decode_token_vector(const std::vector<double>& x, const Vocabulary& v) {
    if (static_cast<int>(x.size()) != v.total_tokens()) throw DataError("token vector size mismatch");
    auto off = v.offsets();
    auto sizes = v.component_sizes();
    std::array<int, 5> values{};
    for (int k = 0; k < 5; ++k) {
        int hot = -1;
        for (int i = 0; i < sizes[static_cast<std::size_t>(k)]; ++i) {
            if (x[static_cast<std::size_t>(off[static_cast<std::size_t>(k)] + i)] == 1.0) {
                if (hot >= 0) throw DataError("token vector has two hot bits in one component");
                hot = i;
            }
        }
        if (hot < 0) throw DataError("token vector has an empty component");
        values[static_cast<std::size_t>(k)] = hot;
    }
    return EdgeTuple{values[0], values[1], values[2], values[3], values[4]};
}

std::vector<DfsCode> canonize_dataset(const GraphDataset& d) {
    std::vector<DfsCode> codes;
    codes.reserve(d.graphs.size());
    for (const LabeledGraph& g : d.graphs) codes.push_back(min_dfs_code(g));
    return codes;
}

} // namespace fewgraph
