#include "fewgraph/dfs_code.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "fewgraph/errors.hpp"

namespace fewgraph {

CodeOrder compare_tuples(const EdgeTuple& a, const EdgeTuple& b) {
    const bool a_fwd = a.t_u < a.t_v;
    const bool b_fwd = b.t_u < b.t_v;
    if (a_fwd && b_fwd) {
        if (a.t_v != b.t_v) return a.t_v < b.t_v ? CodeOrder::less : CodeOrder::greater;
        if (a.t_u != b.t_u) return a.t_u > b.t_u ? CodeOrder::less : CodeOrder::greater;
    } else if (!a_fwd && !b_fwd) {
        if (a.t_u != b.t_u) return a.t_u < b.t_u ? CodeOrder::less : CodeOrder::greater;
        if (a.t_v != b.t_v) return a.t_v < b.t_v ? CodeOrder::less : CodeOrder::greater;
    } else if (!a_fwd && b_fwd) {
        return a.t_u < b.t_v ? CodeOrder::less : CodeOrder::greater;
    } else {
        return a.t_v <= b.t_u ? CodeOrder::less : CodeOrder::greater;
    }
    auto la = std::tie(a.l_u, a.l_uv, a.l_v);
    auto lb = std::tie(b.l_u, b.l_uv, b.l_v);
    if (la < lb) return CodeOrder::less;
    if (lb < la) return CodeOrder::greater;
    return CodeOrder::equal;
}

CodeOrder compare_codes(const DfsCode& a, const DfsCode& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        CodeOrder o = compare_tuples(a[i], b[i]);
        if (o != CodeOrder::equal) return o;
    }
    if (a.size() == b.size()) return CodeOrder::equal;
    return a.size() < b.size() ? CodeOrder::less : CodeOrder::greater;
}

namespace {

// Edge list with ids so embeddings can track usage with a bitmask-style vector.
struct EdgeRef {
    int to;
    int label;
    int id;
};

struct SearchGraph {
    std::vector<int> labels;
    std::vector<std::vector<EdgeRef>> adj;
    int edge_count = 0;

    explicit SearchGraph(const LabeledGraph& g) {
        labels = g.nodes;
        adj.resize(g.nodes.size());
        int id = 0;
        for (const Edge& e : g.edges) {
            adj[static_cast<std::size_t>(e.u)].push_back(EdgeRef{e.v, e.label, id});
            adj[static_cast<std::size_t>(e.v)].push_back(EdgeRef{e.u, e.label, id});
            ++id;
        }
        edge_count = id;
    }
};

// One partial traversal realizing the frontier's common code prefix.
struct Embedding {
    std::vector<int> ts_to_vertex;
    std::vector<int> vertex_to_ts;   // -1 when undiscovered
    std::vector<char> edge_used;
};

struct Extension {
    EdgeTuple tuple;
    int emb_index;
    int edge_id;
    int to_vertex;   // graph vertex of tuple.t_v (new vertex for forward)
    bool forward;
};

// Candidate next tuples of one embedding. If the rightmost vertex has an
// unused edge to a visited vertex, the next tuple is forced: the backward
// edge with the smallest target timestamp. Otherwise forward extensions come
// from the deepest rightmost-path vertex that still has unused edges.
void collect_extensions(const SearchGraph& sg, const Embedding& emb,
                        const std::vector<int>& rmpath_ts, int emb_index,
                        std::vector<Extension>& out) {
    const int rm_ts = rmpath_ts.back();
    const int rm_v = emb.ts_to_vertex[static_cast<std::size_t>(rm_ts)];

    const EdgeRef* best_back = nullptr;
    int best_back_ts = -1;
    for (const EdgeRef& e : sg.adj[static_cast<std::size_t>(rm_v)]) {
        if (emb.edge_used[static_cast<std::size_t>(e.id)]) continue;
        int ts = emb.vertex_to_ts[static_cast<std::size_t>(e.to)];
        if (ts < 0) continue;
        if (!best_back || ts < best_back_ts) {
            best_back = &e;
            best_back_ts = ts;
        }
    }
    if (best_back) {
        out.push_back(Extension{
            EdgeTuple{rm_ts, best_back_ts, sg.labels[static_cast<std::size_t>(rm_v)],
                      best_back->label, sg.labels[static_cast<std::size_t>(best_back->to)]},
            emb_index, best_back->id, best_back->to, false});
        return;
    }

    const int next_ts = static_cast<int>(emb.ts_to_vertex.size());
    for (auto it = rmpath_ts.rbegin(); it != rmpath_ts.rend(); ++it) {
        const int src_ts = *it;
        const int src_v = emb.ts_to_vertex[static_cast<std::size_t>(src_ts)];
        bool any = false;
        for (const EdgeRef& e : sg.adj[static_cast<std::size_t>(src_v)]) {
            if (emb.edge_used[static_cast<std::size_t>(e.id)]) continue;
            any = true;
            if (emb.vertex_to_ts[static_cast<std::size_t>(e.to)] >= 0) continue;
            out.push_back(Extension{
                EdgeTuple{src_ts, next_ts, sg.labels[static_cast<std::size_t>(src_v)], e.label,
                          sg.labels[static_cast<std::size_t>(e.to)]},
                emb_index, e.id, e.to, true});
        }
        // A DFS never backtracks past a vertex with unexplored edges.
        if (any) return;
    }
}

std::string embedding_key(const Embedding& e) {
    std::string key;
    key.reserve(e.ts_to_vertex.size() * 3 + e.edge_used.size());
    for (int v : e.ts_to_vertex) {
        key += static_cast<char>(v & 0xff);
        key += static_cast<char>((v >> 8) & 0xff);
    }
    key += '|';
    for (char c : e.edge_used) key += static_cast<char>('0' + c);
    return key;
}

} // namespace

DfsCode min_dfs_code(const LabeledGraph& g) {
    if (g.edges.empty()) throw DataError("cannot canonize a graph without edges");
    const SearchGraph sg(g);
    const int n = g.node_count();

    // Seed the frontier with the minimal first tuple over all oriented edges.
    EdgeTuple best_first;
    bool have_first = false;
    for (const Edge& e : g.edges) {
        for (int dir = 0; dir < 2; ++dir) {
            const int a = dir == 0 ? e.u : e.v;
            const int b = dir == 0 ? e.v : e.u;
            EdgeTuple t{0, 1, g.nodes[static_cast<std::size_t>(a)], e.label,
                        g.nodes[static_cast<std::size_t>(b)]};
            if (!have_first || tuple_less(t, best_first)) {
                best_first = t;
                have_first = true;
            }
        }
    }

    std::vector<Embedding> frontier;
    {
        int edge_id = 0;
        for (const Edge& e : g.edges) {
            for (int dir = 0; dir < 2; ++dir) {
                const int a = dir == 0 ? e.u : e.v;
                const int b = dir == 0 ? e.v : e.u;
                EdgeTuple t{0, 1, g.nodes[static_cast<std::size_t>(a)], e.label,
                            g.nodes[static_cast<std::size_t>(b)]};
                if (t == best_first) {
                    Embedding emb;
                    emb.ts_to_vertex = {a, b};
                    emb.vertex_to_ts.assign(static_cast<std::size_t>(n), -1);
                    emb.vertex_to_ts[static_cast<std::size_t>(a)] = 0;
                    emb.vertex_to_ts[static_cast<std::size_t>(b)] = 1;
                    emb.edge_used.assign(static_cast<std::size_t>(sg.edge_count), 0);
                    emb.edge_used[static_cast<std::size_t>(edge_id)] = 1;
                    frontier.push_back(std::move(emb));
                }
            }
            ++edge_id;
        }
    }

    DfsCode code{best_first};
    std::vector<int> rmpath_ts{0, 1};

    while (static_cast<int>(code.size()) < sg.edge_count) {
        std::vector<Extension> exts;
        for (std::size_t i = 0; i < frontier.size(); ++i)
            collect_extensions(sg, frontier[i], rmpath_ts, static_cast<int>(i), exts);
        if (exts.empty()) throw DataError("canonization failed: graph is disconnected");

        const EdgeTuple* best = &exts.front().tuple;
        for (const Extension& e : exts)
            if (tuple_less(e.tuple, *best)) best = &e.tuple;
        const EdgeTuple chosen = *best;

        std::vector<Embedding> next;
        std::map<std::string, bool> seen;
        for (const Extension& e : exts) {
            if (!(e.tuple == chosen)) continue;
            Embedding emb = frontier[static_cast<std::size_t>(e.emb_index)];
            emb.edge_used[static_cast<std::size_t>(e.edge_id)] = 1;
            if (e.forward) {
                emb.vertex_to_ts[static_cast<std::size_t>(e.to_vertex)] =
                    static_cast<int>(emb.ts_to_vertex.size());
                emb.ts_to_vertex.push_back(e.to_vertex);
            }
            std::string key = embedding_key(emb);
            if (seen.emplace(std::move(key), true).second) next.push_back(std::move(emb));
        }
        frontier = std::move(next);

        if (chosen.t_u < chosen.t_v) {
            // forward: rightmost path truncates at the source and grows
            while (rmpath_ts.back() != chosen.t_u) rmpath_ts.pop_back();
            rmpath_ts.push_back(chosen.t_v);
        }
        code.push_back(chosen);
    }
    return code;
}

namespace {

// Literal traversal enumeration for the oracle. Emits the backward edges of a
// newly discovered vertex immediately (ascending target timestamp), then
// branches over every choice of next unvisited neighbor from the deepest
// stack vertex that still has one.
struct BruteState {
    const SearchGraph* sg;
    std::vector<int> vertex_to_ts;
    std::vector<char> edge_used;
    std::vector<int> stack;   // current DFS path (graph vertices)
    int next_ts = 0;
    DfsCode code;
    DfsCode best;
    bool have_best = false;
};

void brute_emit_backwards(BruteState& st, int v) {
    std::vector<std::pair<int, const EdgeRef*>> backs;
    for (const EdgeRef& e : st.sg->adj[static_cast<std::size_t>(v)]) {
        if (st.edge_used[static_cast<std::size_t>(e.id)]) continue;
        int ts = st.vertex_to_ts[static_cast<std::size_t>(e.to)];
        if (ts >= 0) backs.emplace_back(ts, &e);
    }
    std::sort(backs.begin(), backs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const int tv = st.vertex_to_ts[static_cast<std::size_t>(v)];
    for (auto& [ts, e] : backs) {
        st.edge_used[static_cast<std::size_t>(e->id)] = 1;
        st.code.push_back(EdgeTuple{tv, ts, st.sg->labels[static_cast<std::size_t>(v)], e->label,
                                    st.sg->labels[static_cast<std::size_t>(e->to)]});
    }
}

void brute_step(BruteState& st) {
    if (static_cast<int>(st.code.size()) == st.sg->edge_count) {
        if (!st.have_best || code_less(st.code, st.best)) {
            st.best = st.code;
            st.have_best = true;
        }
        return;
    }
    // backtrack to the deepest vertex with an unvisited neighbor
    std::vector<int> stack = st.stack;
    while (!stack.empty()) {
        int v = stack.back();
        bool any = false;
        for (const EdgeRef& e : st.sg->adj[static_cast<std::size_t>(v)])
            if (!st.edge_used[static_cast<std::size_t>(e.id)] &&
                st.vertex_to_ts[static_cast<std::size_t>(e.to)] < 0) {
                any = true;
                break;
            }
        if (any) break;
        stack.pop_back();
    }
    if (stack.empty()) return;   // incomplete but stuck: disconnected graph

    const int v = stack.back();
    for (const EdgeRef& e : st.sg->adj[static_cast<std::size_t>(v)]) {
        if (st.edge_used[static_cast<std::size_t>(e.id)]) continue;
        if (st.vertex_to_ts[static_cast<std::size_t>(e.to)] >= 0) continue;

        BruteState snapshot = st;       // cheap at <= 8 nodes
        st.edge_used[static_cast<std::size_t>(e.id)] = 1;
        st.vertex_to_ts[static_cast<std::size_t>(e.to)] = st.next_ts++;
        st.code.push_back(EdgeTuple{st.vertex_to_ts[static_cast<std::size_t>(v)],
                                    st.vertex_to_ts[static_cast<std::size_t>(e.to)],
                                    st.sg->labels[static_cast<std::size_t>(v)], e.label,
                                    st.sg->labels[static_cast<std::size_t>(e.to)]});
        st.stack = stack;
        st.stack.push_back(e.to);
        brute_emit_backwards(st, e.to);
        brute_step(st);

        const DfsCode best = st.have_best ? st.best : DfsCode{};
        const bool have = st.have_best;
        st = std::move(snapshot);
        if (have) {
            st.best = best;
            st.have_best = true;
        }
    }
}

} // namespace

DfsCode brute_force_min_code(const LabeledGraph& g) {
    if (g.node_count() > 8) throw DataError("brute-force canonizer is guarded to 8 nodes");
    if (g.edges.empty()) throw DataError("cannot canonize a graph without edges");
    const SearchGraph sg(g);
    BruteState st;
    st.sg = &sg;
    for (int start = 0; start < g.node_count(); ++start) {
        st.vertex_to_ts.assign(g.nodes.size(), -1);
        st.edge_used.assign(static_cast<std::size_t>(sg.edge_count), 0);
        st.vertex_to_ts[static_cast<std::size_t>(start)] = 0;
        st.next_ts = 1;
        st.stack = {start};
        st.code.clear();
        brute_step(st);
    }
    return st.best;
}

LabeledGraph code_to_graph(const DfsCode& code) {
    if (code.empty()) throw DataError("empty code");
    LabeledGraph g;
    std::set<std::pair<int, int>> edges;
    auto touch = [&](int ts, int label) {
        if (ts == g.node_count()) {
            g.nodes.push_back(label);
        } else if (ts < g.node_count()) {
            if (g.nodes[static_cast<std::size_t>(ts)] != label)
                throw DataError("label conflict on timestamp re-visit");
        } else {
            throw DataError("timestamp gap in code");
        }
    };
    for (const EdgeTuple& t : code) {
        if (t.t_u == t.t_v) throw DataError("self-loop tuple");
        if (t.t_u < t.t_v) {
            touch(t.t_u, t.l_u);
            touch(t.t_v, t.l_v);
        } else {
            touch(t.t_v, t.l_v);
            touch(t.t_u, t.l_u);
        }
        int u = std::min(t.t_u, t.t_v), v = std::max(t.t_u, t.t_v);
        if (!edges.insert({u, v}).second) throw DataError("duplicate edge in code");
        g.edges.push_back(Edge{u, v, t.l_uv});
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    return g;
}

namespace {

struct RepairState {
    std::vector<int> node_labels;            // by timestamp
    std::set<std::pair<int, int>> edges;
    std::vector<char> has_forward_from;      // source ts already emitted a forward edge
    std::vector<int> last_backward_target;   // per source ts, -1 if none
    int next_ts = 0;

    void introduce(int label) {
        node_labels.push_back(label);
        has_forward_from.push_back(0);
        last_backward_target.push_back(-1);
        ++next_ts;
    }
};

// Returns empty string when the tuple is consistent, otherwise the violation.
// "duplicate edge" is the only violation lenient mode can repair (by dropping).
std::string check_tuple(RepairState& st, const EdgeTuple& t, bool first) {
    if (first) {
        if (t.t_u != 0 || t.t_v != 1) return "first tuple must be (0,1,...)";
        st.introduce(t.l_u);
        st.introduce(t.l_v);
        st.edges.insert({0, 1});
        return "";
    }
    if (t.t_u == t.t_v) return "self-loop tuple";
    if (t.t_u < t.t_v) {   // forward
        if (t.t_v != st.next_ts) return "forward edge does not introduce the next timestamp";
        if (t.t_u >= st.next_ts) return "forward edge from an unintroduced timestamp";
        if (st.node_labels[static_cast<std::size_t>(t.t_u)] != t.l_u)
            return "node label conflict";
        st.introduce(t.l_v);
        st.edges.insert({t.t_u, t.t_v});
        st.has_forward_from[static_cast<std::size_t>(t.t_u)] = 1;
        return "";
    }
    // backward
    if (t.t_u >= st.next_ts || t.t_v >= st.next_ts) return "backward edge to an unintroduced timestamp";
    if (st.node_labels[static_cast<std::size_t>(t.t_u)] != t.l_u ||
        st.node_labels[static_cast<std::size_t>(t.t_v)] != t.l_v)
        return "node label conflict";
    if (st.edges.count({t.t_v, t.t_u})) return "duplicate edge";
    if (st.has_forward_from[static_cast<std::size_t>(t.t_u)])
        return "backward edge after a forward edge from the same source";
    if (st.last_backward_target[static_cast<std::size_t>(t.t_u)] >= t.t_v)
        return "backward edges from one source must have increasing targets";
    st.edges.insert({t.t_v, t.t_u});
    st.last_backward_target[static_cast<std::size_t>(t.t_u)] = t.t_v;
    return "";
}

} // namespace

RepairResult repair_code(const std::vector<EdgeTuple>& raw, RepairMode mode) {
    RepairResult res;
    if (raw.empty()) {
        res.rejection = "empty sequence";
        return res;
    }
    RepairState st;
    DfsCode out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::string err = check_tuple(st, raw[i], i == 0);
        if (err.empty()) {
            out.push_back(raw[i]);
            continue;
        }
        if (mode == RepairMode::strict) {
            res.rejection = err;
            return res;
        }
        if (err == "duplicate edge") {
            ++res.dropped_duplicates;
            continue;
        }
        res.truncated_tuples = static_cast<int>(raw.size() - i);
        break;
    }
    if (out.empty()) {
        res.rejection = "no surviving tuples";
        return res;
    }
    res.code = std::move(out);
    return res;
}

std::string code_to_string(const DfsCode& code) {
    std::ostringstream out;
    for (std::size_t i = 0; i < code.size(); ++i) {
        const EdgeTuple& t = code[i];
        if (i) out << ' ';
        out << '(' << t.t_u << ',' << t.t_v << ',' << t.l_u << ',' << t.l_uv << ',' << t.l_v << ')';
    }
    return out.str();
}

DfsCode code_from_string(const std::string& line) {
    DfsCode code;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        EdgeTuple t;
        if (std::sscanf(tok.c_str(), "(%d,%d,%d,%d,%d)", &t.t_u, &t.t_v, &t.l_u, &t.l_uv, &t.l_v) != 5)
            throw DataError("malformed tuple '" + tok + "'");
        code.push_back(t);
    }
    return code;
}

} // namespace fewgraph
