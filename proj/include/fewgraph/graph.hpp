#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fewgraph {

// Sentinel label text for datasets without edge labels.
inline constexpr const char* kUnlabeledEdge = "_";

// Interned label table. Ids are contiguous from 0 and text<->id is a bijection.
class LabelSet {
public:
    int add(std::string_view text);             // returns existing id if present
    int find(std::string_view text) const;      // -1 if absent
    const std::string& text(int id) const { return texts_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(texts_.size()); }
    const std::vector<std::string>& texts() const { return texts_; }
    bool operator==(const LabelSet& other) const { return texts_ == other.texts_; }

private:
    std::vector<std::string> texts_;
    std::unordered_map<std::string, int> ids_;
};

struct Edge {
    int u = 0;
    int v = 0;      // stored with u < v
    int label = 0;
    bool operator==(const Edge&) const = default;
};

// Undirected connected graph with one categorical label per node and edge.
// Node indices are contiguous from 0; nodes[i] is the label id of node i.
struct LabeledGraph {
    std::vector<int> nodes;
    std::vector<Edge> edges;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    bool operator==(const LabeledGraph&) const = default;
};

// adjacency[u] = list of (neighbor, edge label id), sorted by neighbor.
std::vector<std::vector<std::pair<int, int>>> adjacency(const LabeledGraph& g);

std::vector<int> degrees(const LabeledGraph& g);

struct GraphDataset {
    std::string name;
    std::vector<LabeledGraph> graphs;
    LabelSet node_labels;
    LabelSet edge_labels;

    int size() const { return static_cast<int>(graphs.size()); }
};

struct SplitSpec {
    double train = 0.4;
    double validation = 0.3;
    double test = 0.3;
    std::uint64_t seed = 0;
};

// Throws DataError unless g is connected, self-loop free, duplicate free,
// indices are in range and every label id exists in the given vocabularies.
void validate_graph(const LabeledGraph& g, int node_label_count, int edge_label_count);

void validate_dataset(const GraphDataset& d);

// Transaction text format:
//   t # <graph-id>
//   v <node-id> <node-label>
//   e <u> <v> <edge-label>
// Blank lines and lines starting with '#' between records are ignored.
// With unlabeled_edges set, `e u v` lines without a label are accepted and get
// the sentinel label.
GraphDataset parse_dataset(std::string_view text, bool unlabeled_edges = false,
                           std::string name = "");

// Canonical serialization: graphs in order, nodes ascending, edges sorted by
// (u, v). parse(write(d)) reproduces d's graph content.
std::string write_dataset(const GraphDataset& d);

GraphDataset load_dataset_file(const std::string& path, bool unlabeled_edges = false);
void save_dataset_file(const GraphDataset& d, const std::string& path);

// perm[i] = new index of node i. Throws DataError if perm is not a bijection.
LabeledGraph permute_graph(const LabeledGraph& g, const std::vector<int>& perm);

// Disjoint partition by seeded shuffle. Validation/test sizes are floored,
// the remainder goes to train.
std::array<GraphDataset, 3> split_dataset(const GraphDataset& d, const SplitSpec& spec);

// Content equality by label text: same graph sequence, same node-label texts,
// same labeled edge sets. Insensitive to label id numbering and unused labels.
bool datasets_content_equal(const GraphDataset& a, const GraphDataset& b);

// N-body spring generator: n_particles nodes, each labeled with a uniformly
// random cell of a grid_side x grid_side grid; each pair connected with
// edge_prob; whole graph resampled until connected. Edges carry the sentinel
// label. The vocabulary always holds all grid_side^2 cell labels.
GraphDataset synth_spring(int n_particles, int how_many, int grid_side, double edge_prob,
                          std::uint64_t seed);

} // namespace fewgraph
