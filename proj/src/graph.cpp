#include "fewgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "fewgraph/errors.hpp"
#include "fewgraph/rng.hpp"

namespace fewgraph {

int LabelSet::add(std::string_view text) {
    auto it = ids_.find(std::string(text));
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(texts_.size());
    texts_.emplace_back(text);
    ids_.emplace(texts_.back(), id);
    return id;
}

int LabelSet::find(std::string_view text) const {
    auto it = ids_.find(std::string(text));
    return it == ids_.end() ? -1 : it->second;
}

std::vector<std::vector<std::pair<int, int>>> adjacency(const LabeledGraph& g) {
    std::vector<std::vector<std::pair<int, int>>> adj(g.nodes.size());
    for (const Edge& e : g.edges) {
        adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.label);
        adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.label);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

std::vector<int> degrees(const LabeledGraph& g) {
    std::vector<int> deg(g.nodes.size(), 0);
    for (const Edge& e : g.edges) {
        ++deg[static_cast<std::size_t>(e.u)];
        ++deg[static_cast<std::size_t>(e.v)];
    }
    return deg;
}

namespace {

bool connected(const LabeledGraph& g) {
    const int n = g.node_count();
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const Edge& e : g.edges) {
        adj[static_cast<std::size_t>(e.u)].push_back(e.v);
        adj[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

} // namespace

void validate_graph(const LabeledGraph& g, int node_label_count, int edge_label_count) {
    if (g.nodes.empty()) throw DataError("graph has no nodes");
    for (int l : g.nodes) {
        if (l < 0 || l >= node_label_count) throw DataError("node label id out of range");
    }
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : g.edges) {
        if (e.u < 0 || e.u >= g.node_count() || e.v < 0 || e.v >= g.node_count())
            throw DataError("edge endpoint out of range");
        if (e.u == e.v) throw DataError("self-loop");
        if (e.u > e.v) throw DataError("edge not normalized (u < v required)");
        if (!seen.insert({e.u, e.v}).second) throw DataError("duplicate edge");
        if (e.label < 0 || e.label >= edge_label_count) throw DataError("edge label id out of range");
    }
    if (!connected(g)) throw DataError("graph is disconnected");
}

void validate_dataset(const GraphDataset& d) {
    if (d.graphs.empty()) throw DataError("dataset '" + d.name + "' is empty");
    for (const LabeledGraph& g : d.graphs)
        validate_graph(g, d.node_labels.size(), d.edge_labels.size());
}

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
    throw DataError("line " + std::to_string(line_no) + ": " + what);
}

int parse_int(const std::string& tok, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) parse_fail(line_no, std::string("malformed ") + what);
        return v;
    } catch (const DataError&) {
        throw;
    } catch (...) {
        parse_fail(line_no, std::string("malformed ") + what + " '" + tok + "'");
    }
}

} // namespace

GraphDataset parse_dataset(std::string_view text, bool unlabeled_edges, std::string name) {
    GraphDataset d;
    d.name = std::move(name);

    LabeledGraph cur;
    bool in_graph = false;
    std::set<std::pair<int, int>> cur_edges;

    auto finish_graph = [&](int line_no) {
        if (!in_graph) return;
        if (cur.nodes.empty()) parse_fail(line_no, "graph record has no nodes");
        if (!connected(cur)) parse_fail(line_no, "graph is disconnected");
        std::sort(cur.edges.begin(), cur.edges.end(),
                  [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
        d.graphs.push_back(std::move(cur));
        cur = LabeledGraph{};
        cur_edges.clear();
    };

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;          // blank line
        if (tag[0] == '#') continue;         // comment line
        if (tag == "t") {
            std::string hash, id;
            if (!(ls >> hash >> id) || hash != "#") parse_fail(line_no, "malformed graph header");
            finish_graph(line_no);
            in_graph = true;
        } else if (tag == "v") {
            if (!in_graph) parse_fail(line_no, "node record before graph header");
            std::string id_tok, label;
            if (!(ls >> id_tok >> label)) parse_fail(line_no, "malformed node record");
            int id = parse_int(id_tok, line_no, "node id");
            if (id != cur.node_count())
                parse_fail(line_no, "node ids must be 0-based and contiguous");
            cur.nodes.push_back(d.node_labels.add(label));
        } else if (tag == "e") {
            if (!in_graph) parse_fail(line_no, "edge record before graph header");
            std::string u_tok, v_tok, label;
            if (!(ls >> u_tok >> v_tok)) parse_fail(line_no, "malformed edge record");
            if (!(ls >> label)) {
                if (!unlabeled_edges) parse_fail(line_no, "edge record is missing a label");
                label = kUnlabeledEdge;
            }
            int u = parse_int(u_tok, line_no, "edge endpoint");
            int v = parse_int(v_tok, line_no, "edge endpoint");
            if (u == v) parse_fail(line_no, "self-loop");
            if (u < 0 || u >= cur.node_count() || v < 0 || v >= cur.node_count())
                parse_fail(line_no, "edge references an undeclared node");
            if (u > v) std::swap(u, v);
            if (!cur_edges.insert({u, v}).second) parse_fail(line_no, "duplicate edge");
            cur.edges.push_back(Edge{u, v, d.edge_labels.add(label)});
        } else {
            std::string extra;
            std::getline(ls, extra);
            parse_fail(line_no, "unknown record '" + tag + "'");
        }
    }
    finish_graph(line_no);
    if (d.graphs.empty()) throw DataError("dataset contains no graphs");
    return d;
}

std::string write_dataset(const GraphDataset& d) {
    std::ostringstream out;
    for (std::size_t gi = 0; gi < d.graphs.size(); ++gi) {
        const LabeledGraph& g = d.graphs[gi];
        out << "t # " << gi << '\n';
        for (int i = 0; i < g.node_count(); ++i)
            out << "v " << i << ' ' << d.node_labels.text(g.nodes[static_cast<std::size_t>(i)]) << '\n';
        std::vector<Edge> edges = g.edges;
        std::sort(edges.begin(), edges.end(),
                  [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
        for (const Edge& e : edges)
            out << "e " << e.u << ' ' << e.v << ' ' << d.edge_labels.text(e.label) << '\n';
    }
    return out.str();
}

GraphDataset load_dataset_file(const std::string& path, bool unlabeled_edges) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    GraphDataset d = parse_dataset(buf.str(), unlabeled_edges, name);
    validate_dataset(d);
    return d;
}

void save_dataset_file(const GraphDataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file '" + path + "'");
    out << write_dataset(d);
}

LabeledGraph permute_graph(const LabeledGraph& g, const std::vector<int>& perm) {
    const int n = g.node_count();
    if (static_cast<int>(perm.size()) != n) throw DataError("permutation size mismatch");
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    for (int p : perm) {
        if (p < 0 || p >= n || hit[static_cast<std::size_t>(p)])
            throw DataError("permutation is not a bijection");
        hit[static_cast<std::size_t>(p)] = 1;
    }
    LabeledGraph out;
    out.nodes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
            g.nodes[static_cast<std::size_t>(i)];
    out.edges.reserve(g.edges.size());
    for (const Edge& e : g.edges) {
        int u = perm[static_cast<std::size_t>(e.u)];
        int v = perm[static_cast<std::size_t>(e.v)];
        if (u > v) std::swap(u, v);
        out.edges.push_back(Edge{u, v, e.label});
    }
    std::sort(out.edges.begin(), out.edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    return out;
}

std::array<GraphDataset, 3> split_dataset(const GraphDataset& d, const SplitSpec& spec) {
    for (double f : {spec.train, spec.validation, spec.test})
        if (f < 0.0 || f > 1.0) throw ConfigError("split fraction outside [0,1]");
    if (std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");

    const int n = d.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(spec.seed);
    rng.shuffle(order);

    const int n_val = static_cast<int>(spec.validation * n);
    const int n_test = static_cast<int>(spec.test * n);
    const int n_train = n - n_val - n_test;

    std::array<GraphDataset, 3> out;
    const char* suffix[3] = {"-train", "-validation", "-test"};
    const int sizes[3] = {n_train, n_val, n_test};
    int pos = 0;
    for (int part = 0; part < 3; ++part) {
        out[static_cast<std::size_t>(part)].name = d.name + suffix[part];
        out[static_cast<std::size_t>(part)].node_labels = d.node_labels;
        out[static_cast<std::size_t>(part)].edge_labels = d.edge_labels;
        for (int i = 0; i < sizes[part]; ++i, ++pos)
            out[static_cast<std::size_t>(part)].graphs.push_back(
                d.graphs[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])]);
    }
    return out;
}

bool datasets_content_equal(const GraphDataset& a, const GraphDataset& b) {
    if (a.graphs.size() != b.graphs.size()) return false;
    for (std::size_t i = 0; i < a.graphs.size(); ++i) {
        const LabeledGraph& ga = a.graphs[i];
        const LabeledGraph& gb = b.graphs[i];
        if (ga.node_count() != gb.node_count() || ga.edge_count() != gb.edge_count()) return false;
        for (int v = 0; v < ga.node_count(); ++v) {
            if (a.node_labels.text(ga.nodes[static_cast<std::size_t>(v)]) !=
                b.node_labels.text(gb.nodes[static_cast<std::size_t>(v)]))
                return false;
        }
        auto key = [](const GraphDataset& d, const Edge& e) {
            return std::tuple<int, int, std::string>(e.u, e.v, d.edge_labels.text(e.label));
        };
        std::vector<std::tuple<int, int, std::string>> ea, eb;
        for (const Edge& e : ga.edges) ea.push_back(key(a, e));
        for (const Edge& e : gb.edges) eb.push_back(key(b, e));
        std::sort(ea.begin(), ea.end());
        std::sort(eb.begin(), eb.end());
        if (ea != eb) return false;
    }
    return true;
}

GraphDataset synth_spring(int n_particles, int how_many, int grid_side, double edge_prob,
                          std::uint64_t seed) {
    if (n_particles < 2) throw ConfigError("spring generator needs at least 2 particles");
    if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw ConfigError("edge probability must be in (0,1]");
    if (grid_side < 1) throw ConfigError("grid side must be positive");
    if (how_many < 1) throw ConfigError("graph count must be positive");

    GraphDataset d;
    d.name = "spring-" + std::to_string(n_particles);
    const int cells = grid_side * grid_side;
    for (int c = 0; c < cells; ++c) d.node_labels.add(std::to_string(c));
    const int edge_label = d.edge_labels.add(kUnlabeledEdge);

    Rng rng(seed);
    constexpr long kMaxRejections = 100000;
    long rejections = 0;
    while (d.size() < how_many) {
        LabeledGraph g;
        g.nodes.resize(static_cast<std::size_t>(n_particles));
        for (int i = 0; i < n_particles; ++i)
            g.nodes[static_cast<std::size_t>(i)] = rng.below_int(cells);
        for (int u = 0; u < n_particles; ++u)
            for (int v = u + 1; v < n_particles; ++v)
                if (rng.uniform() < edge_prob) g.edges.push_back(Edge{u, v, edge_label});
        if (!connected(g) || g.edges.empty()) {
            if (++rejections > kMaxRejections)
                throw NumericError("spring generator: rejection budget exhausted");
            continue;
        }
        d.graphs.push_back(std::move(g));
    }
    return d;
}

} // namespace fewgraph
