#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fewgraph/dfs_code.hpp"
#include "fewgraph/errors.hpp"
#include "fewgraph/isomorphism.hpp"
#include "fewgraph/rng.hpp"
#include "helpers.hpp"

using namespace fewgraph;
using fewgraph::testing::random_graph;
using fewgraph::testing::random_permutation;

namespace {

LabeledGraph single_edge(int la, int lb, int le) {
    LabeledGraph g;
    g.nodes = {la, lb};
    g.edges = {Edge{0, 1, le}};
    return g;
}

LabeledGraph triangle(int l) {
    LabeledGraph g;
    g.nodes = {l, l, l};
    g.edges = {Edge{0, 1, 0}, Edge{0, 2, 0}, Edge{1, 2, 0}};
    return g;
}

} // namespace

TEST_CASE("tuple order anchors") {
    // same structure, labels decide: X < Y with X=0, Y=1
    EdgeTuple xy{0, 1, 0, 0, 1};
    EdgeTuple yx{0, 1, 1, 0, 0};
    CHECK(compare_tuples(xy, yx) == CodeOrder::less);
    CHECK(compare_tuples(yx, xy) == CodeOrder::greater);
    CHECK(compare_tuples(xy, xy) == CodeOrder::equal);

    // forward vs forward: smaller t_v first, then deeper source first
    CHECK(compare_tuples(EdgeTuple{1, 2, 0, 0, 0}, EdgeTuple{0, 3, 0, 0, 0}) == CodeOrder::less);
    CHECK(compare_tuples(EdgeTuple{2, 3, 9, 9, 9}, EdgeTuple{0, 3, 0, 0, 0}) == CodeOrder::less);

    // backward vs backward: smaller source first, then smaller target
    CHECK(compare_tuples(EdgeTuple{2, 0, 0, 0, 0}, EdgeTuple{3, 1, 0, 0, 0}) == CodeOrder::less);
    CHECK(compare_tuples(EdgeTuple{3, 0, 0, 0, 0}, EdgeTuple{3, 1, 9, 9, 9}) == CodeOrder::less);

    // mixed: backward (u,s) before forward (u',v') iff u < v'
    CHECK(compare_tuples(EdgeTuple{2, 0, 0, 0, 0}, EdgeTuple{0, 3, 0, 0, 0}) == CodeOrder::less);
    CHECK(compare_tuples(EdgeTuple{3, 0, 0, 0, 0}, EdgeTuple{2, 3, 0, 0, 0}) == CodeOrder::greater);
    // forward (u,v) before backward (u',s') iff v <= u'
    CHECK(compare_tuples(EdgeTuple{0, 1, 0, 0, 0}, EdgeTuple{2, 0, 0, 0, 0}) == CodeOrder::less);
}

TEST_CASE("tuple order is a total order on sampled tuples") {
    Rng rng(17);
    std::vector<EdgeTuple> pool;
    for (int i = 0; i < 40; ++i) {
        auto g = random_graph(rng, 6, 3, 2);
        auto code = min_dfs_code(g);
        pool.insert(pool.end(), code.begin(), code.end());
    }
    for (int trial = 0; trial < 4000; ++trial) {
        const EdgeTuple& a = pool[rng.below(pool.size())];
        const EdgeTuple& b = pool[rng.below(pool.size())];
        const EdgeTuple& c = pool[rng.below(pool.size())];
        auto ab = compare_tuples(a, b), ba = compare_tuples(b, a);
        // antisymmetry
        if (ab == CodeOrder::less) CHECK(ba == CodeOrder::greater);
        if (ab == CodeOrder::equal) CHECK(ba == CodeOrder::equal);
        // transitivity
        if (ab == CodeOrder::less && compare_tuples(b, c) == CodeOrder::less)
            CHECK(compare_tuples(a, c) == CodeOrder::less);
    }
}

TEST_CASE("single edge min code") {
    // labels A=0 < B=1
    auto code = min_dfs_code(single_edge(0, 1, 0));
    REQUIRE(code.size() == 1);
    CHECK(code[0] == EdgeTuple{0, 1, 0, 0, 1});
    CHECK(brute_force_min_code(single_edge(0, 1, 0)) == code);

    // starting from the B end would give (0,1,B,e,A); minimum starts at A
    auto code2 = min_dfs_code(single_edge(1, 0, 0));
    CHECK(code2[0] == EdgeTuple{0, 1, 0, 0, 1});
}

TEST_CASE("min code of a labeled triangle starts with the smallest edge signature") {
    // triangle X-Y-Z with labels X=0,Y=1,Z=2; edges a=0: (X,Y) and (Z,X), b=1: (Y,Z)
    LabeledGraph g;
    g.nodes = {0, 1, 2};
    g.edges = {Edge{0, 1, 0}, Edge{0, 2, 0}, Edge{1, 2, 1}};
    auto code = min_dfs_code(g);
    REQUIRE(code.size() == 3);
    CHECK(code[0] == EdgeTuple{0, 1, 0, 0, 1});   // <0,1,X,a,Y>
    // decodes back to an isomorphic graph
    CHECK(is_isomorphic(code_to_graph(code), g));
}

TEST_CASE("uniform triangle brute force structure") {
    auto code = brute_force_min_code(triangle(0));
    REQUIRE(code.size() == 3);
    CHECK(code[2].t_u == 2);
    CHECK(code[2].t_v == 0);
    CHECK(min_dfs_code(triangle(0)) == code);
}

TEST_CASE("min code equals brute force on random graphs") {
    Rng rng(23);
    for (int i = 0; i < 300; ++i) {
        int n = 4 + rng.below_int(4);
        auto g = random_graph(rng, n, 1 + rng.below_int(3), 1 + rng.below_int(2), 0.35);
        auto fast = min_dfs_code(g);
        auto brute = brute_force_min_code(g);
        REQUIRE(fast == brute);
        CHECK(fast.size() == g.edges.size());
    }
}

TEST_CASE("canonization is permutation invariant") {
    Rng rng(29);
    for (int i = 0; i < 100; ++i) {
        auto g = random_graph(rng, 3 + rng.below_int(5), 3, 2);
        auto code = min_dfs_code(g);
        for (int p = 0; p < 5; ++p) {
            auto perm = random_permutation(rng, g.node_count());
            CHECK(min_dfs_code(permute_graph(g, perm)) == code);
        }
    }
}

TEST_CASE("code round trip: decode of min code is isomorphic to the source") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        auto g = random_graph(rng, 3 + rng.below_int(5), 3, 2);
        auto code = min_dfs_code(g);
        auto back = code_to_graph(code);
        CHECK(is_isomorphic(back, g));
        // minimality: re-canonizing the decoded graph reproduces the code
        CHECK(min_dfs_code(back) == code);
    }
}

TEST_CASE("code_to_graph validates") {
    CHECK_THROWS_AS(code_to_graph(DfsCode{}), DataError);
    // label conflict on revisit
    CHECK_THROWS_AS(code_to_graph(DfsCode{EdgeTuple{0, 1, 0, 0, 1}, EdgeTuple{1, 2, 9, 0, 0}}),
                    DataError);
    // duplicate edge
    CHECK_THROWS_AS(code_to_graph(DfsCode{EdgeTuple{0, 1, 0, 0, 1}, EdgeTuple{1, 0, 1, 0, 0}}),
                    DataError);
    // timestamp gap
    CHECK_THROWS_AS(code_to_graph(DfsCode{EdgeTuple{0, 1, 0, 0, 1}, EdgeTuple{3, 4, 0, 0, 1}}),
                    DataError);
    // single tuple decodes to the two-node graph
    auto g = code_to_graph(DfsCode{EdgeTuple{0, 1, 0, 2, 1}});
    CHECK(g.node_count() == 2);
    CHECK(g.edges[0] == Edge{0, 1, 2});
}

TEST_CASE("min-code equality matches brute-force isomorphism") {
    Rng rng(37);
    int positive = 0;
    for (int i = 0; i < 200; ++i) {
        auto a = random_graph(rng, 4 + rng.below_int(4), 2, 2);
        LabeledGraph b;
        if (rng.uniform() < 0.5) {
            b = permute_graph(a, random_permutation(rng, a.node_count()));
        } else {
            b = random_graph(rng, 4 + rng.below_int(4), 2, 2);
        }
        bool oracle = fewgraph::testing::isomorphic_brute(a, b);
        CHECK(is_isomorphic(a, b) == oracle);
        if (oracle) ++positive;
    }
    CHECK(positive > 50);   // the pairing scheme must actually exercise both outcomes
}

TEST_CASE("isomorphism is an equivalence relation on samples") {
    Rng rng(43);
    std::vector<LabeledGraph> pool;
    for (int i = 0; i < 12; ++i) {
        auto g = random_graph(rng, 5, 2, 1);
        pool.push_back(g);
        pool.push_back(permute_graph(g, random_permutation(rng, 5)));
    }
    for (int t = 0; t < 300; ++t) {
        const auto& a = pool[rng.below(pool.size())];
        const auto& b = pool[rng.below(pool.size())];
        const auto& c = pool[rng.below(pool.size())];
        CHECK(is_isomorphic(a, a));
        CHECK(is_isomorphic(a, b) == is_isomorphic(b, a));
        if (is_isomorphic(a, b) && is_isomorphic(b, c)) CHECK(is_isomorphic(a, c));
    }
}

TEST_CASE("subgraph embedding agrees with exhaustive search") {
    Rng rng(47);
    int hits = 0;
    for (int i = 0; i < 200; ++i) {
        auto host = random_graph(rng, 8, 2, 1, 0.4);
        LabeledGraph query;
        if (rng.uniform() < 0.5) {
            // plant a positive: a connected induced piece of the host, permuted
            auto host_adj = adjacency(host);
            std::vector<int> picked{rng.below_int(8)};
            std::vector<char> in(8, 0);
            in[picked[0]] = 1;
            while (picked.size() < 4) {
                const int from = picked[rng.below(picked.size())];
                const auto& nbrs = host_adj[from];
                const int w = nbrs[rng.below(nbrs.size())].first;
                if (!in[w]) {
                    in[w] = 1;
                    picked.push_back(w);
                }
            }
            std::vector<int> index_of(8, -1);
            for (int k = 0; k < 4; ++k) index_of[picked[k]] = k;
            for (int k = 0; k < 4; ++k) query.nodes.push_back(host.nodes[picked[k]]);
            for (const Edge& e : host.edges) {
                int a = index_of[e.u], b = index_of[e.v];
                if (a < 0 || b < 0) continue;
                query.edges.push_back(Edge{std::min(a, b), std::max(a, b), e.label});
            }
            std::sort(query.edges.begin(), query.edges.end(), [](const Edge& a, const Edge& b) {
                return std::tie(a.u, a.v) < std::tie(b.u, b.v);
            });
            query = permute_graph(query, random_permutation(rng, 4));
        } else {
            query = random_graph(rng, 4, 2, 1, 0.3);
        }
        bool oracle = fewgraph::testing::subgraph_brute(query, host);
        CHECK(is_subgraph(query, host) == oracle);
        if (oracle) ++hits;
    }
    CHECK(hits > 80);   // every planted query embeds by construction
}

TEST_CASE("subgraph identities") {
    Rng rng(53);
    auto g = random_graph(rng, 6, 2, 2);
    CHECK(is_subgraph(g, g));

    // triangle never embeds into a tree
    LabeledGraph tree;
    tree.nodes = {0, 0, 0, 0};
    tree.edges = {Edge{0, 1, 0}, Edge{0, 2, 0}, Edge{0, 3, 0}};
    CHECK_FALSE(is_subgraph(triangle(0), tree));

    // mutual embedding implies isomorphism on small graphs
    for (int i = 0; i < 60; ++i) {
        auto a = random_graph(rng, 5, 2, 1);
        auto b = random_graph(rng, 5, 2, 1);
        if (is_subgraph(a, b) && is_subgraph(b, a)) CHECK(is_isomorphic(a, b));
    }
}

TEST_CASE("repair accepts valid codes unchanged") {
    Rng rng(59);
    for (int i = 0; i < 50; ++i) {
        auto g = random_graph(rng, 5, 3, 2);
        auto code = min_dfs_code(g);
        auto res = repair_code(code, RepairMode::strict);
        REQUIRE(res.accepted());
        CHECK(*res.code == code);
    }
}

TEST_CASE("repair rejects and repairs per mode") {
    // unintroduced timestamp
    std::vector<EdgeTuple> gap{EdgeTuple{0, 1, 0, 0, 1}, EdgeTuple{5, 2, 0, 0, 1}};
    CHECK_FALSE(repair_code(gap, RepairMode::strict).accepted());

    // duplicate edge tuple: dropped in lenient mode, remaining code valid
    std::vector<EdgeTuple> dup{EdgeTuple{0, 1, 0, 0, 1}, EdgeTuple{1, 2, 1, 0, 0},
                               EdgeTuple{2, 0, 0, 0, 0}, EdgeTuple{2, 0, 0, 0, 0}};
    CHECK_FALSE(repair_code(dup, RepairMode::strict).accepted());
    auto len = repair_code(dup, RepairMode::lenient);
    REQUIRE(len.accepted());
    CHECK(len.code->size() == 3);
    CHECK(len.dropped_duplicates == 1);
    CHECK(repair_code(*len.code, RepairMode::strict).accepted());

    // truncation at the first unrepairable tuple
    std::vector<EdgeTuple> bad_tail{EdgeTuple{0, 1, 0, 0, 1}, EdgeTuple{4, 9, 0, 0, 1}};
    auto trunc = repair_code(bad_tail, RepairMode::lenient);
    REQUIRE(trunc.accepted());
    CHECK(trunc.code->size() == 1);
    CHECK(trunc.truncated_tuples == 1);

    // nothing survives
    std::vector<EdgeTuple> hopeless{EdgeTuple{2, 3, 0, 0, 1}};
    CHECK_FALSE(repair_code(hopeless, RepairMode::lenient).accepted());

    // backward-edge ordering rules
    std::vector<EdgeTuple> back_after_fwd{
        EdgeTuple{0, 1, 0, 0, 0}, EdgeTuple{1, 2, 0, 0, 0}, EdgeTuple{2, 3, 0, 0, 0},
        EdgeTuple{2, 0, 0, 0, 0}};   // backward from 2 after forward from 2
    CHECK_FALSE(repair_code(back_after_fwd, RepairMode::strict).accepted());
}

TEST_CASE("code dump string round trip") {
    Rng rng(61);
    auto g = random_graph(rng, 6, 3, 2);
    auto code = min_dfs_code(g);
    CHECK(code_from_string(code_to_string(code)) == code);
}
