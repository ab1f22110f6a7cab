#include "fewgraph/isomorphism.hpp"

#include <algorithm>

#include "fewgraph/dfs_code.hpp"
#include "fewgraph/errors.hpp"

namespace fewgraph {

bool is_isomorphic(const LabeledGraph& g1, const LabeledGraph& g2) {
    if (g1.node_count() != g2.node_count() || g1.edge_count() != g2.edge_count()) return false;
    if (g1.edges.empty()) {
        // edgeless graphs are single nodes; compare labels directly
        return g1.nodes == g2.nodes;
    }
    return min_dfs_code(g1) == min_dfs_code(g2);
}

namespace {

struct Matcher {
    const LabeledGraph* small;
    const LabeledGraph* big;
    std::vector<std::vector<std::pair<int, int>>> small_adj, big_adj;
    std::vector<int> order;        // small nodes in connectivity-first order
    std::vector<int> mapping;      // small -> big, -1 unset
    std::vector<char> used;        // big nodes already mapped

    bool feasible(int s, int b) const {
        if (small->nodes[static_cast<std::size_t>(s)] != big->nodes[static_cast<std::size_t>(b)])
            return false;
        if (small_adj[static_cast<std::size_t>(s)].size() > big_adj[static_cast<std::size_t>(b)].size())
            return false;
        // every already-mapped neighbor of s must be adjacent to b with the same edge label
        for (auto [nbr, lbl] : small_adj[static_cast<std::size_t>(s)]) {
            int mapped = mapping[static_cast<std::size_t>(nbr)];
            if (mapped < 0) continue;
            bool ok = false;
            for (auto [bn, bl] : big_adj[static_cast<std::size_t>(b)])
                if (bn == mapped && bl == lbl) {
                    ok = true;
                    break;
                }
            if (!ok) return false;
        }
        return true;
    }

    bool search(std::size_t depth) {
        if (depth == order.size()) return true;
        int s = order[depth];
        for (int b = 0; b < big->node_count(); ++b) {
            if (used[static_cast<std::size_t>(b)]) continue;
            if (!feasible(s, b)) continue;
            mapping[static_cast<std::size_t>(s)] = b;
            used[static_cast<std::size_t>(b)] = 1;
            if (search(depth + 1)) return true;
            mapping[static_cast<std::size_t>(s)] = -1;
            used[static_cast<std::size_t>(b)] = 0;
        }
        return false;
    }
};

} // namespace

bool is_subgraph(const LabeledGraph& small, const LabeledGraph& big) {
    if (small.node_count() > big.node_count() || small.edge_count() > big.edge_count())
        return false;
    Matcher m;
    m.small = &small;
    m.big = &big;
    m.small_adj = adjacency(small);
    m.big_adj = adjacency(big);
    m.mapping.assign(small.nodes.size(), -1);
    m.used.assign(big.nodes.size(), 0);

    // BFS order from node 0 keeps the partial mapping connected (small is connected)
    m.order.reserve(small.nodes.size());
    std::vector<char> seen(small.nodes.size(), 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int u = queue[qi];
        m.order.push_back(u);
        for (auto [w, lbl] : m.small_adj[static_cast<std::size_t>(u)])
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                queue.push_back(w);
            }
    }
    return m.search(0);
}

namespace {

void require_same_vocab(const GraphDataset& a, const GraphDataset& b) {
    if (!(a.node_labels == b.node_labels) || !(a.edge_labels == b.edge_labels))
        throw DataError("vocabulary mismatch between datasets '" + a.name + "' and '" + b.name + "'");
}

} // namespace

bool is_isomorphic(const GraphDataset& d1, const LabeledGraph& g1, const GraphDataset& d2,
                   const LabeledGraph& g2) {
    require_same_vocab(d1, d2);
    return is_isomorphic(g1, g2);
}

bool is_subgraph(const GraphDataset& d1, const LabeledGraph& small, const GraphDataset& d2,
                 const LabeledGraph& big) {
    require_same_vocab(d1, d2);
    return is_subgraph(small, big);
}

} // namespace fewgraph
