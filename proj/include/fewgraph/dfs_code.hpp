#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fewgraph/graph.hpp"

namespace fewgraph {

// One edge of a DFS traversal: discovery timestamps of both endpoints plus the
// three labels. Forward edge iff t_u < t_v, backward iff t_u > t_v.
struct EdgeTuple {
    int t_u = 0;
    int t_v = 0;
    int l_u = 0;
    int l_uv = 0;
    int l_v = 0;
    bool operator==(const EdgeTuple&) const = default;
};

using DfsCode = std::vector<EdgeTuple>;

enum class CodeOrder { less, equal, greater };

// Total order on edge tuples at the same position of two codes with an equal
// prefix. Structural order first:
//   forward vs forward:   smaller t_v wins, ties broken by larger t_u
//   backward vs backward: smaller t_u wins, ties broken by smaller t_v
//   backward (u,s) precedes forward (u',v') iff u < v'
//   forward (u,v) precedes backward (u',s') iff v <= u'
// On a structural tie, lexicographic on (l_u, l_uv, l_v) by label id.
CodeOrder compare_tuples(const EdgeTuple& a, const EdgeTuple& b);

inline bool tuple_less(const EdgeTuple& a, const EdgeTuple& b) {
    return compare_tuples(a, b) == CodeOrder::less;
}

// Lexicographic order on codes; a strict prefix sorts before its extensions.
CodeOrder compare_codes(const DfsCode& a, const DfsCode& b);

inline bool code_less(const DfsCode& a, const DfsCode& b) {
    return compare_codes(a, b) == CodeOrder::less;
}

// Minimum DFS code of g over all DFS traversals. Deterministic; the result has
// exactly |E| tuples. Throws DataError when g has no edges.
DfsCode min_dfs_code(const LabeledGraph& g);

// Test oracle: enumerates every DFS traversal (all start nodes x all neighbor
// orderings) and returns the lexicographically smallest emitted code.
// Guarded to |V| <= 8.
DfsCode brute_force_min_code(const LabeledGraph& g);

// Inverse mapping: one node per distinct timestamp, labels from their first
// introduction, one edge per tuple. Throws DataError on an invalid code
// (timestamp gap, label conflict on re-visit, duplicate edge, ...).
LabeledGraph code_to_graph(const DfsCode& code);

enum class RepairMode { strict, lenient };

struct RepairResult {
    std::optional<DfsCode> code;           // empty on rejection
    std::string rejection;                 // reason when rejected
    int dropped_duplicates = 0;            // lenient mode only
    int truncated_tuples = 0;              // lenient mode only
    bool accepted() const { return code.has_value(); }
};

// Validates a raw sampled tuple sequence against the DFS-code invariants.
// strict: reject on any violation. lenient: drop duplicate-edge tuples,
// truncate at the first unrepairable tuple, and require at least one
// surviving tuple.
RepairResult repair_code(const std::vector<EdgeTuple>& raw, RepairMode mode);

// Dump format: tuples as (t_u,t_v,l_u,l_uv,l_v), space separated, one code per line.
std::string code_to_string(const DfsCode& code);
DfsCode code_from_string(const std::string& line);

} // namespace fewgraph
