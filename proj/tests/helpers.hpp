#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "fewgraph/graph.hpp"
#include "fewgraph/rng.hpp"

namespace fewgraph::testing {

// Random connected labeled graph: a random spanning tree plus extra edges.
inline LabeledGraph random_graph(Rng& rng, int n, int node_labels, int edge_labels,
                                 double extra_edge_prob = 0.3) {
    LabeledGraph g;
    g.nodes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g.nodes[static_cast<std::size_t>(i)] = rng.below_int(node_labels);
    std::vector<std::pair<int, int>> present;
    for (int v = 1; v < n; ++v) {
        int u = rng.below_int(v);
        present.emplace_back(u, v);
    }
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            bool have = false;
            for (auto& [a, b] : present)
                if (a == u && b == v) have = true;
            if (!have && rng.uniform() < extra_edge_prob) present.emplace_back(u, v);
        }
    for (auto& [u, v] : present) g.edges.push_back(Edge{u, v, rng.below_int(edge_labels)});
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    return g;
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    rng.shuffle(p);
    return p;
}

// Exhaustive bijection search for label-preserving isomorphism. Test oracle.
inline bool isomorphic_brute(const LabeledGraph& a, const LabeledGraph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    const int n = a.node_count();
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    auto edge_set = [](const LabeledGraph& g) {
        std::vector<std::tuple<int, int, int>> es;
        for (const Edge& e : g.edges) es.emplace_back(e.u, e.v, e.label);
        std::sort(es.begin(), es.end());
        return es;
    };
    const auto eb = edge_set(b);
    do {
        bool label_ok = true;
        for (int i = 0; i < n && label_ok; ++i)
            if (a.nodes[static_cast<std::size_t>(i)] !=
                b.nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])])
                label_ok = false;
        if (!label_ok) continue;
        std::vector<std::tuple<int, int, int>> mapped;
        for (const Edge& e : a.edges) {
            int u = perm[static_cast<std::size_t>(e.u)];
            int v = perm[static_cast<std::size_t>(e.v)];
            if (u > v) std::swap(u, v);
            mapped.emplace_back(u, v, e.label);
        }
        std::sort(mapped.begin(), mapped.end());
        if (mapped == eb) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

// Exhaustive injective-mapping search for labeled subgraph embedding. Oracle.
inline bool subgraph_brute(const LabeledGraph& small, const LabeledGraph& big) {
    const int ns = small.node_count(), nb = big.node_count();
    if (ns > nb || small.edge_count() > big.edge_count()) return false;
    std::vector<int> choice(static_cast<std::size_t>(ns), -1);
    std::vector<char> used(static_cast<std::size_t>(nb), 0);
    auto big_adj = adjacency(big);
    auto ok_edge = [&](int bu, int bv, int lbl) {
        for (auto [w, l] : big_adj[static_cast<std::size_t>(bu)])
            if (w == bv && l == lbl) return true;
        return false;
    };
    std::function<bool(int)> rec = [&](int s) -> bool {
        if (s == ns) return true;
        for (int b = 0; b < nb; ++b) {
            if (used[static_cast<std::size_t>(b)]) continue;
            if (small.nodes[static_cast<std::size_t>(s)] != big.nodes[static_cast<std::size_t>(b)])
                continue;
            bool ok = true;
            for (const Edge& e : small.edges) {
                int other = -1;
                if (e.u == s && e.v < s) other = e.v;
                if (e.v == s && e.u < s) other = e.u;
                if (other < 0) continue;
                if (!ok_edge(b, choice[static_cast<std::size_t>(other)], e.label)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            choice[static_cast<std::size_t>(s)] = b;
            used[static_cast<std::size_t>(b)] = 1;
            if (rec(s + 1)) return true;
            choice[static_cast<std::size_t>(s)] = -1;
            used[static_cast<std::size_t>(b)] = 0;
        }
        return false;
    };
    return rec(0);
}

} // namespace fewgraph::testing
