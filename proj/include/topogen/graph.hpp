#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "topogen/errors.hpp"

namespace topogen {

// Directed collaboration graph. Node ids are 1-based and follow generation
// order; roles[k] is the role name of node k+1. Edges are (from, to) pairs;
// generated graphs always satisfy from < to, loaded graphs are checked by
// validate_dag.
struct CollabGraph {
    std::vector<std::string> roles;
    std::set<std::pair<int, int>> edges;
    std::string query;
    std::string source;

    int node_count() const { return static_cast<int>(roles.size()); }
    size_t edge_count() const { return edges.size(); }

    int add_node(const std::string& role) {
        roles.push_back(role);
        return node_count();
    }

    // Validates id range and rejects self-loops; duplicate edges are an error
    // so that malformed files do not silently collapse.
    void add_edge(int from, int to);

    bool has_edge(int from, int to) const { return edges.count({from, to}) > 0; }

    // Incoming / outgoing neighbor ids in ascending order.
    std::vector<int> predecessors(int node) const;
    std::vector<int> successors(int node) const;
};

// Throws GraphError unless the graph is a well-formed DAG with >= 1 node.
// The message names the nodes left in the cyclic remainder.
void validate_dag(const CollabGraph& g);

// Kahn's algorithm with ascending-id tie-break; the unique canonical order
// used for both training-time linearization and runtime scheduling.
// Throws GraphError on cycles.
std::vector<int> topo_order(const CollabGraph& g);

// True if `order` is a permutation of 1..N that respects every edge.
bool is_topological(const CollabGraph& g, const std::vector<int>& order);

// JSON form: {"nodes": [{"id", "role"}], "edges": [[from, to]],
//             "meta": {"query", "source"}}.
std::string graph_to_json(const CollabGraph& g, int indent = 2);
CollabGraph graph_from_json(const std::string& text);

CollabGraph load_graph(const std::string& path);
void save_graph(const std::string& path, const CollabGraph& g);

// Deterministic DOT export: nodes ascending, edges in lexicographic order,
// labels "id: role".
std::string to_dot(const CollabGraph& g);

}  // namespace topogen
