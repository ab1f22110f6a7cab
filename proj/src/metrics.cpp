#include "fewgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "fewgraph/dfs_code.hpp"
#include "fewgraph/errors.hpp"
#include "fewgraph/isomorphism.hpp"
#include "fewgraph/vocab.hpp"

namespace fewgraph {

double stat_sum(const Stat& s) {
    double sum = 0.0;
    for (const auto& [k, v] : s) sum += v;
    return sum;
}

Stat normalized(const Stat& s) {
    const double sum = stat_sum(s);
    if (sum <= 0.0) throw DataError("cannot normalize an empty histogram");
    Stat out;
    for (const auto& [k, v] : s) out[k] = v / sum;
    return out;
}

Stat degree_hist(const LabeledGraph& g) {
    Stat counts;
    for (int d : degrees(g)) counts[d] += 1.0;
    return normalized(counts);
}

Stat clustering_hist(const LabeledGraph& g, int bins) {
    if (bins < 1) throw ConfigError("clustering histogram needs at least one bin");
    auto adj = adjacency(g);
    const int n = g.node_count();
    std::vector<std::vector<char>> am(static_cast<std::size_t>(n),
                                      std::vector<char>(static_cast<std::size_t>(n), 0));
    for (const Edge& e : g.edges) {
        am[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] = 1;
        am[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] = 1;
    }
    Stat counts;
    for (int u = 0; u < n; ++u) {
        const auto& nbrs = adj[static_cast<std::size_t>(u)];
        const int deg = static_cast<int>(nbrs.size());
        double coeff = 0.0;
        if (deg >= 2) {
            int tri = 0;
            for (std::size_t i = 0; i < nbrs.size(); ++i)
                for (std::size_t j = i + 1; j < nbrs.size(); ++j)
                    if (am[static_cast<std::size_t>(nbrs[i].first)]
                          [static_cast<std::size_t>(nbrs[j].first)])
                        ++tri;
            coeff = 2.0 * tri / (static_cast<double>(deg) * (deg - 1));
        }
        int bin = static_cast<int>(coeff * bins);
        bin = std::min(bin, bins - 1);
        counts[bin] += 1.0;
    }
    return normalized(counts);
}

std::vector<std::array<long long, kOrbitCount>> orbit_counts(const LabeledGraph& g) {
    const int n = g.node_count();
    std::vector<std::array<long long, kOrbitCount>> out(
        static_cast<std::size_t>(n), std::array<long long, kOrbitCount>{});
    if (n < 4) return out;

    std::vector<std::vector<char>> am(static_cast<std::size_t>(n),
                                      std::vector<char>(static_cast<std::size_t>(n), 0));
    for (const Edge& e : g.edges) {
        am[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] = 1;
        am[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] = 1;
    }

    int quad[4];
    for (quad[0] = 0; quad[0] < n; ++quad[0])
        for (quad[1] = quad[0] + 1; quad[1] < n; ++quad[1])
            for (quad[2] = quad[1] + 1; quad[2] < n; ++quad[2])
                for (quad[3] = quad[2] + 1; quad[3] < n; ++quad[3]) {
                    int deg[4] = {0, 0, 0, 0};
                    int edges = 0;
                    for (int a = 0; a < 4; ++a)
                        for (int b = a + 1; b < 4; ++b)
                            if (am[static_cast<std::size_t>(quad[a])]
                                  [static_cast<std::size_t>(quad[b])]) {
                                ++edges;
                                ++deg[a];
                                ++deg[b];
                            }
                    if (edges < 3) continue;
                    // connected iff no degree-0 node and not two disjoint edges;
                    // with >= 3 edges on 4 nodes, degree >= 1 everywhere suffices
                    // except the triangle-plus-isolate case
                    bool connected = true;
                    for (int a = 0; a < 4; ++a)
                        if (deg[a] == 0) connected = false;
                    if (!connected) continue;

                    int max_deg = *std::max_element(deg, deg + 4);
                    for (int a = 0; a < 4; ++a) {
                        int orbit;
                        if (edges == 3) {
                            if (max_deg == 3) orbit = deg[a] == 3 ? 3 : 2;     // star
                            else orbit = deg[a] == 1 ? 0 : 1;                  // path
                        } else if (edges == 4) {
                            if (max_deg == 2) orbit = 4;                       // cycle
                            else orbit = deg[a] == 1 ? 5 : (deg[a] == 2 ? 6 : 7);   // paw
                        } else if (edges == 5) {
                            orbit = deg[a] == 2 ? 8 : 9;                       // diamond
                        } else {
                            orbit = 10;                                        // clique
                        }
                        ++out[static_cast<std::size_t>(quad[a])][static_cast<std::size_t>(orbit)];
                    }
                }
    return out;
}

Stat orbit_mean_stat(const LabeledGraph& g) {
    auto per_node = orbit_counts(g);
    Stat s;
    for (int k = 0; k < kOrbitCount; ++k) s[k] = 0.0;
    for (const auto& row : per_node)
        for (int k = 0; k < kOrbitCount; ++k) s[k] += static_cast<double>(row[static_cast<std::size_t>(k)]);
    for (int k = 0; k < kOrbitCount; ++k) s[k] /= static_cast<double>(g.node_count());
    return s;
}

Stat node_label_hist(const LabeledGraph& g) {
    Stat counts;
    for (int l : g.nodes) counts[l] += 1.0;
    return normalized(counts);
}

Stat edge_label_hist(const LabeledGraph& g) {
    Stat counts;
    for (const Edge& e : g.edges) counts[e.label] += 1.0;
    return counts.empty() ? counts : normalized(counts);
}

Stat joint_label_degree_hist(const LabeledGraph& g) {
    Stat counts;
    auto deg = degrees(g);
    for (int i = 0; i < g.node_count(); ++i)
        counts[(static_cast<long long>(g.nodes[static_cast<std::size_t>(i)]) << 20) +
               deg[static_cast<std::size_t>(i)]] += 1.0;
    return normalized(counts);
}

double gaussian_emd_kernel(const Stat& a, const Stat& b, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("kernel bandwidth must be positive");
    for (const Stat* s : {&a, &b})
        if (std::abs(stat_sum(*s) - 1.0) > 1e-9) throw DataError("unnormalized histogram");
    // piecewise-constant CDF difference integrated over the category line
    double w1 = 0.0, cdf_diff = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    long long prev_key = 0;
    bool first = true;
    while (ia != a.end() || ib != b.end()) {
        long long key;
        if (ib == b.end() || (ia != a.end() && ia->first <= ib->first)) key = ia->first;
        else key = ib->first;
        if (!first) w1 += std::abs(cdf_diff) * static_cast<double>(key - prev_key);
        while (ia != a.end() && ia->first == key) cdf_diff += (ia++)->second;
        while (ib != b.end() && ib->first == key) cdf_diff -= (ib++)->second;
        prev_key = key;
        first = false;
    }
    return std::exp(-(w1 * w1) / (2.0 * sigma * sigma));
}

double gaussian_tv_kernel(const Stat& a, const Stat& b, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("kernel bandwidth must be positive");
    double l1 = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            l1 += std::abs(ia->second);
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            l1 += std::abs(ib->second);
            ++ib;
        } else {
            l1 += std::abs(ia->second - ib->second);
            ++ia;
            ++ib;
        }
    }
    const double tv = 0.5 * l1;
    return std::exp(-(tv * tv) / (2.0 * sigma * sigma));
}

double linear_kernel(const Stat& a, const Stat& b) {
    double dot = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else dot += (ia++)->second * (ib++)->second;
    }
    return dot;
}

double kernel_eval(const Stat& a, const Stat& b, const KernelSpec& k) {
    switch (k.kind) {
        case KernelSpec::Kind::gaussian_emd: return gaussian_emd_kernel(a, b, k.sigma);
        case KernelSpec::Kind::gaussian_tv: return gaussian_tv_kernel(a, b, k.sigma);
        case KernelSpec::Kind::linear: return linear_kernel(a, b);
    }
    throw ConfigError("unknown kernel");
}

double mmd(std::span<const Stat> set_a, std::span<const Stat> set_b, const KernelSpec& k) {
    if (set_a.empty() || set_b.empty()) throw DataError("MMD needs nonempty sets");
    const double na = static_cast<double>(set_a.size());
    const double nb = static_cast<double>(set_b.size());
    double kaa = 0.0, kbb = 0.0, kab = 0.0;
    for (const Stat& x : set_a)
        for (const Stat& y : set_a) kaa += kernel_eval(x, y, k);
    for (const Stat& x : set_b)
        for (const Stat& y : set_b) kbb += kernel_eval(x, y, k);
    for (const Stat& x : set_a)
        for (const Stat& y : set_b) kab += kernel_eval(x, y, k);
    const double value = kaa / (na * na) + kbb / (nb * nb) - 2.0 * kab / (na * nb);
    return value < 0.0 ? 0.0 : value;
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_ints(std::span<const long long> xs) {
    return fnv1a(xs.data(), xs.size() * sizeof(long long));
}

// BFS distances from every node.
std::vector<std::vector<int>> all_distances(const LabeledGraph& g) {
    const int n = g.node_count();
    auto adj = adjacency(g);
    std::vector<std::vector<int>> dist(static_cast<std::size_t>(n),
                                       std::vector<int>(static_cast<std::size_t>(n), -1));
    for (int s = 0; s < n; ++s) {
        auto& row = dist[static_cast<std::size_t>(s)];
        row[static_cast<std::size_t>(s)] = 0;
        std::vector<int> queue{s};
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int u = queue[qi];
            for (auto [w, lbl] : adj[static_cast<std::size_t>(u)])
                if (row[static_cast<std::size_t>(w)] < 0) {
                    row[static_cast<std::size_t>(w)] = row[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(w);
                }
        }
    }
    return dist;
}

// Canonical id of the radius-r neighborhood rooted at u: induced ball with
// node labels augmented by the distance from the root, canonized, hashed.
std::uint64_t rooted_neighborhood_id(const LabeledGraph& g, const std::vector<int>& dist_from_u,
                                     int r, int max_radius) {
    std::vector<int> members;
    for (int w = 0; w < g.node_count(); ++w) {
        const int d = dist_from_u[static_cast<std::size_t>(w)];
        if (d >= 0 && d <= r) members.push_back(w);
    }
    std::vector<int> index_of(g.nodes.size(), -1);
    for (std::size_t i = 0; i < members.size(); ++i)
        index_of[static_cast<std::size_t>(members[i])] = static_cast<int>(i);

    LabeledGraph ball;
    ball.nodes.reserve(members.size());
    for (int w : members)
        ball.nodes.push_back(g.nodes[static_cast<std::size_t>(w)] * (max_radius + 2) +
                             dist_from_u[static_cast<std::size_t>(w)]);
    for (const Edge& e : g.edges) {
        const int iu = index_of[static_cast<std::size_t>(e.u)];
        const int iv = index_of[static_cast<std::size_t>(e.v)];
        if (iu < 0 || iv < 0) continue;
        ball.edges.push_back(Edge{std::min(iu, iv), std::max(iu, iv), e.label});
    }
    if (ball.edges.empty()) {
        // single-node neighborhood
        const long long tag[2] = {-1, ball.nodes.empty() ? -1 : ball.nodes[0]};
        return hash_ints(tag);
    }
    std::sort(ball.edges.begin(), ball.edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    DfsCode code = min_dfs_code(ball);
    std::vector<long long> flat;
    flat.reserve(code.size() * 5);
    for (const EdgeTuple& t : code) {
        flat.push_back(t.t_u);
        flat.push_back(t.t_v);
        flat.push_back(t.l_u);
        flat.push_back(t.l_uv);
        flat.push_back(t.l_v);
    }
    return hash_ints(flat);
}

} // namespace

Stat nspdk_features(const LabeledGraph& g, int max_radius, int max_distance) {
    const int n = g.node_count();
    auto dist = all_distances(g);

    // per node, per radius canonical neighborhood ids
    std::vector<std::vector<std::uint64_t>> ids(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) {
        ids[static_cast<std::size_t>(u)].resize(static_cast<std::size_t>(max_radius + 1));
        for (int r = 0; r <= max_radius; ++r)
            ids[static_cast<std::size_t>(u)][static_cast<std::size_t>(r)] =
                rooted_neighborhood_id(g, dist[static_cast<std::size_t>(u)], r, max_radius);
    }

    Stat features;
    for (int u = 0; u < n; ++u)
        for (int w = 0; w < n; ++w) {
            const int d = dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)];
            if (d < 0 || d > max_distance) continue;
            for (int r = 0; r <= max_radius; ++r) {
                std::uint64_t hu = ids[static_cast<std::size_t>(u)][static_cast<std::size_t>(r)];
                std::uint64_t hw = ids[static_cast<std::size_t>(w)][static_cast<std::size_t>(r)];
                if (hu > hw) std::swap(hu, hw);
                const long long key_parts[4] = {r, d, static_cast<long long>(hu),
                                                static_cast<long long>(hw)};
                features[static_cast<long long>(hash_ints(key_parts))] += 1.0;
            }
        }
    // L2 normalization
    double norm = 0.0;
    for (const auto& [k, v] : features) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (auto& [k, v] : features) v /= norm;
    return features;
}

double nspdk_mmd(const GraphDataset& gen, const GraphDataset& ref, int max_radius,
                 int max_distance) {
    if (gen.graphs.empty() || ref.graphs.empty()) throw DataError("MMD needs nonempty sets");
    std::vector<Stat> fa, fb;
    fa.reserve(gen.graphs.size());
    fb.reserve(ref.graphs.size());
    for (const LabeledGraph& g : gen.graphs) fa.push_back(nspdk_features(g, max_radius, max_distance));
    for (const LabeledGraph& g : ref.graphs) fb.push_back(nspdk_features(g, max_radius, max_distance));
    return mmd(fa, fb, KernelSpec{KernelSpec::Kind::linear, 1.0});
}

LabelMmds label_metrics(const GraphDataset& gen, const GraphDataset& ref, double sigma) {
    if (gen.graphs.empty() || ref.graphs.empty()) throw DataError("MMD needs nonempty sets");
    const KernelSpec tv{KernelSpec::Kind::gaussian_tv, sigma};
    auto collect = [](const GraphDataset& d, auto&& fn) {
        std::vector<Stat> out;
        out.reserve(d.graphs.size());
        for (const LabeledGraph& g : d.graphs) out.push_back(fn(g));
        return out;
    };
    LabelMmds r;
    r.node_label = mmd(collect(gen, node_label_hist), collect(ref, node_label_hist), tv);
    r.joint_label_degree =
        mmd(collect(gen, joint_label_degree_hist), collect(ref, joint_label_degree_hist), tv);
    bool labeled_edges = false;
    for (const GraphDataset* d : {&gen, &ref})
        for (const LabeledGraph& g : d->graphs)
            for (const Edge& e : g.edges)
                if (d->edge_labels.text(e.label) != kUnlabeledEdge) labeled_edges = true;
    if (labeled_edges)
        r.edge_label = mmd(collect(gen, edge_label_hist), collect(ref, edge_label_hist), tv);
    return r;
}

double novelty(const GraphDataset& gen, const GraphDataset& train) {
    if (gen.graphs.empty()) throw DataError("novelty needs generated graphs");
    int novel = 0;
    for (const LabeledGraph& g : gen.graphs) {
        bool embedded = false;
        for (const LabeledGraph& t : train.graphs)
            if (is_subgraph(g, t)) {
                embedded = true;
                break;
            }
        if (!embedded) ++novel;
    }
    return 100.0 * novel / static_cast<double>(gen.graphs.size());
}

double uniqueness(const GraphDataset& gen) {
    if (gen.graphs.empty()) throw DataError("uniqueness needs generated graphs");
    const std::size_t n = gen.graphs.size();
    int survivors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool removed = false;
        for (std::size_t j = 0; j < n && !removed; ++j)
            if (i != j && is_subgraph(gen.graphs[i], gen.graphs[j])) removed = true;
        if (!removed) ++survivors;
    }
    return 100.0 * survivors / static_cast<double>(n);
}

double uniqueness_keep_one(const GraphDataset& gen) {
    if (gen.graphs.empty()) throw DataError("uniqueness needs generated graphs");
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < gen.graphs.size(); ++i) {
        bool removed = false;
        for (std::size_t j : kept)
            if (is_subgraph(gen.graphs[i], gen.graphs[j])) {
                removed = true;
                break;
            }
        if (!removed) kept.push_back(i);
    }
    return 100.0 * static_cast<double>(kept.size()) / static_cast<double>(gen.graphs.size());
}

MetricReport evaluate(const GraphDataset& gen, const GraphDataset& test,
                      const GraphDataset& train, const EvalConfig& cfg) {
    for (const GraphDataset* d : {&gen, &test, &train})
        if (d->graphs.empty()) throw DataError("evaluate needs nonempty datasets");

    // align the three label spaces by text
    std::vector<GraphDataset> all{gen, test, train};
    Vocabulary v = build_vocabulary(all);
    GraphDataset rgen = remap_dataset(gen, v);
    GraphDataset rtest = remap_dataset(test, v);
    GraphDataset rtrain = remap_dataset(train, v);

    MetricReport r;
    auto collect = [](const GraphDataset& d, auto&& fn) {
        std::vector<Stat> out;
        out.reserve(d.graphs.size());
        for (const LabeledGraph& g : d.graphs) out.push_back(fn(g));
        return out;
    };

    const KernelSpec emd{KernelSpec::Kind::gaussian_emd, cfg.sigma};
    const KernelSpec tv{KernelSpec::Kind::gaussian_tv, cfg.sigma};

    r.degree_mmd = mmd(collect(rgen, degree_hist), collect(rtest, degree_hist), emd);
    auto cl = [&](const LabeledGraph& g) { return clustering_hist(g, cfg.clustering_bins); };
    r.clustering_mmd = mmd(collect(rgen, cl), collect(rtest, cl), emd);
    r.orbit_mmd = mmd(collect(rgen, orbit_mean_stat), collect(rtest, orbit_mean_stat), tv);
    r.nspdk_mmd = nspdk_mmd(rgen, rtest, cfg.nspdk_radius, cfg.nspdk_distance);
    const LabelMmds labels = label_metrics(rgen, rtest, cfg.sigma);
    r.node_label_mmd = labels.node_label;
    r.edge_label_mmd = labels.edge_label;   // absent for unlabeled-edge data
    r.joint_label_degree_mmd = labels.joint_label_degree;

    auto avg = [](const GraphDataset& d, bool nodes) {
        double s = 0.0;
        for (const LabeledGraph& g : d.graphs) s += nodes ? g.node_count() : g.edge_count();
        return s / static_cast<double>(d.graphs.size());
    };
    r.avg_nodes_gen = avg(rgen, true);
    r.avg_nodes_ref = avg(rtest, true);
    r.avg_edges_gen = avg(rgen, false);
    r.avg_edges_ref = avg(rtest, false);

    r.novelty_pct = novelty(rgen, rtrain);
    r.uniqueness_pct = uniqueness(rgen);
    r.uniqueness_keep_one_pct = uniqueness_keep_one(rgen);
    return r;
}

std::string report_text(const MetricReport& r) {
    std::ostringstream s;
    s.precision(12);
    s << "degree_mmd\t" << r.degree_mmd << '\n'
      << "clustering_mmd\t" << r.clustering_mmd << '\n'
      << "orbit_mmd\t" << r.orbit_mmd << '\n'
      << "nspdk_mmd\t" << r.nspdk_mmd << '\n'
      << "node_label_mmd\t" << r.node_label_mmd << '\n'
      << "edge_label_mmd\t";
    if (r.edge_label_mmd) s << *r.edge_label_mmd;
    else s << "n/a";
    s << '\n'
      << "joint_label_degree_mmd\t" << r.joint_label_degree_mmd << '\n'
      << "avg_nodes_gen\t" << r.avg_nodes_gen << '\n'
      << "avg_nodes_ref\t" << r.avg_nodes_ref << '\n'
      << "avg_edges_gen\t" << r.avg_edges_gen << '\n'
      << "avg_edges_ref\t" << r.avg_edges_ref << '\n'
      << "novelty_pct\t" << r.novelty_pct << '\n'
      << "uniqueness_pct\t" << r.uniqueness_pct << '\n'
      << "uniqueness_keep_one_pct\t" << r.uniqueness_keep_one_pct << '\n';
    return s.str();
}

std::string report_json(const MetricReport& r) {
    nlohmann::json j;
    j["degree_mmd"] = r.degree_mmd;
    j["clustering_mmd"] = r.clustering_mmd;
    j["orbit_mmd"] = r.orbit_mmd;
    j["nspdk_mmd"] = r.nspdk_mmd;
    j["node_label_mmd"] = r.node_label_mmd;
    if (r.edge_label_mmd) j["edge_label_mmd"] = *r.edge_label_mmd;
    else j["edge_label_mmd"] = nullptr;
    j["joint_label_degree_mmd"] = r.joint_label_degree_mmd;
    j["avg_nodes_gen"] = r.avg_nodes_gen;
    j["avg_nodes_ref"] = r.avg_nodes_ref;
    j["avg_edges_gen"] = r.avg_edges_gen;
    j["avg_edges_ref"] = r.avg_edges_ref;
    j["novelty_pct"] = r.novelty_pct;
    j["uniqueness_pct"] = r.uniqueness_pct;
    j["uniqueness_keep_one_pct"] = r.uniqueness_keep_one_pct;
    return j.dump(2);
}

} // namespace fewgraph
