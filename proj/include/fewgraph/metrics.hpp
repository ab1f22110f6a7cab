#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fewgraph/graph.hpp"

namespace fewgraph {

// Sparse statistic vector: category key (or bin index) -> mass.
using Stat = std::map<long long, double>;

double stat_sum(const Stat& s);
Stat normalized(const Stat& s);

// Node degree distribution, categories 0..max degree, normalized.
Stat degree_hist(const LabeledGraph& g);

// Local clustering coefficients (triangles / (deg choose 2), 0 when deg < 2)
// binned into `bins` equal-width bins on [0,1], normalized.
Stat clustering_hist(const LabeledGraph& g, int bins);

// Orbits of the six connected 4-node graphlets:
//   0 path end        1 path middle      2 star leaf       3 star center
//   4 cycle           5 paw pendant      6 paw triangle    7 paw hub
//   8 diamond side    9 diamond hub     10 clique
// Per-node occurrence counts over every connected 4-subset (induced).
constexpr int kOrbitCount = 11;
std::vector<std::array<long long, kOrbitCount>> orbit_counts(const LabeledGraph& g);

// Mean orbit-count vector over nodes, as a fixed-support Stat (keys 0..10).
Stat orbit_mean_stat(const LabeledGraph& g);

// Per-graph normalized label histograms.
Stat node_label_hist(const LabeledGraph& g);
Stat edge_label_hist(const LabeledGraph& g);
// Joint (node label, degree) histogram; key = label * 2^20 + degree.
Stat joint_label_degree_hist(const LabeledGraph& g);

struct KernelSpec {
    enum class Kind { gaussian_emd, gaussian_tv, linear };
    Kind kind = Kind::gaussian_tv;
    double sigma = 1.0;
};

// exp(-W1^2 / (2 sigma^2)); W1 is the first Wasserstein distance on the
// ordered integer category line (cumulative difference times gap width).
// Inputs must be normalized.
double gaussian_emd_kernel(const Stat& a, const Stat& b, double sigma);

// exp(-TV^2 / (2 sigma^2)); TV = half the L1 distance over the union support.
double gaussian_tv_kernel(const Stat& a, const Stat& b, double sigma);

double linear_kernel(const Stat& a, const Stat& b);

double kernel_eval(const Stat& a, const Stat& b, const KernelSpec& k);

// Biased (V-statistic) squared MMD:
//   mean k(a,a') + mean k(b,b') - 2 mean k(a,b), diagonals included,
// clamped at zero against numerical residue.
double mmd(std::span<const Stat> set_a, std::span<const Stat> set_b, const KernelSpec& k);

// Neighborhood-pair features: for every ordered node pair (u,w) at shortest
// path distance d <= max_distance and every radius r <= max_radius, one count
// keyed by (r, d, canonical ids of the two rooted r-neighborhoods). Rooted
// neighborhoods are canonized with node labels augmented by the distance from
// the root. The feature vector is L2-normalized.
Stat nspdk_features(const LabeledGraph& g, int max_radius, int max_distance);

double nspdk_mmd(const GraphDataset& gen, const GraphDataset& ref, int max_radius,
                 int max_distance);

struct LabelMmds {
    double node_label = 0.0;
    std::optional<double> edge_label;   // absent when neither set carries edge labels
    double joint_label_degree = 0.0;
};

// Node-label, edge-label and joint (node label, degree) MMDs with the
// gaussian-TV kernel. Both datasets must share a label id space.
LabelMmds label_metrics(const GraphDataset& gen, const GraphDataset& ref, double sigma = 1.0);

// Percentage of generated graphs that embed into no training graph.
double novelty(const GraphDataset& gen, const GraphDataset& train);

// Percentage surviving removal of every graph that is subgraph-isomorphic to
// any other generated graph (mutual embeddings remove both sides).
double uniqueness(const GraphDataset& gen);

// Variant that keeps the first representative of each embedding chain.
double uniqueness_keep_one(const GraphDataset& gen);

struct EvalConfig {
    int clustering_bins = 100;
    double sigma = 1.0;
    int nspdk_radius = 2;
    int nspdk_distance = 3;
};

struct MetricReport {
    double degree_mmd = 0.0;
    double clustering_mmd = 0.0;
    double orbit_mmd = 0.0;
    double nspdk_mmd = 0.0;
    double node_label_mmd = 0.0;
    std::optional<double> edge_label_mmd;   // absent for unlabeled-edge data
    double joint_label_degree_mmd = 0.0;
    double avg_nodes_gen = 0.0, avg_nodes_ref = 0.0;
    double avg_edges_gen = 0.0, avg_edges_ref = 0.0;
    double novelty_pct = 0.0;
    double uniqueness_pct = 0.0;
    double uniqueness_keep_one_pct = 0.0;
};

// Full metric suite: fidelity statistics against `test`, novelty against
// `train`. Label spaces are aligned by text before any comparison.
MetricReport evaluate(const GraphDataset& gen, const GraphDataset& test,
                      const GraphDataset& train, const EvalConfig& cfg = {});

std::string report_text(const MetricReport& r);
std::string report_json(const MetricReport& r);

} // namespace fewgraph
