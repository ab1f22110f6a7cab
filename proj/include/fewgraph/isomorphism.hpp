#pragma once

#include "fewgraph/graph.hpp"

namespace fewgraph {

// Label-preserving isomorphism, decided by minimum-DFS-code equality.
// Both graphs must use the same label id space.
bool is_isomorphic(const LabeledGraph& g1, const LabeledGraph& g2);

// True iff an injective label-preserving node mapping embeds every edge of
// `small` (with matching edge label) into `big`. Not induced: extra edges of
// `big` between mapped nodes are allowed.
bool is_subgraph(const LabeledGraph& small, const LabeledGraph& big);

// Checked variants for graphs from different datasets; throws DataError when
// the vocabularies differ.
bool is_isomorphic(const GraphDataset& d1, const LabeledGraph& g1, const GraphDataset& d2,
                   const LabeledGraph& g2);
bool is_subgraph(const GraphDataset& d1, const LabeledGraph& small, const GraphDataset& d2,
                 const LabeledGraph& big);

} // namespace fewgraph
