#include "topogen/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "topogen/io_util.hpp"

namespace topogen {

void CollabGraph::add_edge(int from, int to) {
    if (from < 1 || from > node_count() || to < 1 || to > node_count())
        throw GraphError("edge (" + std::to_string(from) + ", " + std::to_string(to) +
                         ") references a node outside 1.." + std::to_string(node_count()));
    if (from == to)
        throw GraphError("self-loop on node " + std::to_string(from));
    if (!edges.insert({from, to}).second)
        throw GraphError("duplicate edge (" + std::to_string(from) + ", " + std::to_string(to) + ")");
}

std::vector<int> CollabGraph::predecessors(int node) const {
    std::vector<int> out;
    for (const auto& [from, to] : edges)
        if (to == node) out.push_back(from);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> CollabGraph::successors(int node) const {
    std::vector<int> out;
    for (const auto& [from, to] : edges)
        if (from == node) out.push_back(to);
    std::sort(out.begin(), out.end());
    return out;
}

void validate_dag(const CollabGraph& g) {
    if (g.node_count() < 1) throw GraphError("graph has no nodes");
    for (const auto& [from, to] : g.edges) {
        if (from < 1 || from > g.node_count() || to < 1 || to > g.node_count())
            throw GraphError("edge (" + std::to_string(from) + ", " + std::to_string(to) +
                             ") references a node outside 1.." + std::to_string(g.node_count()));
        if (from == to) throw GraphError("self-loop on node " + std::to_string(from));
    }
    topo_order(g);  // throws on cycles
}

std::vector<int> topo_order(const CollabGraph& g) {
    int n = g.node_count();
    if (n < 1) throw GraphError("graph has no nodes");
    std::vector<int> indegree(static_cast<size_t>(n) + 1, 0);
    for (const auto& [from, to] : g.edges) {
        (void)from;
        ++indegree[static_cast<size_t>(to)];
    }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 1; v <= n; ++v)
        if (indegree[static_cast<size_t>(v)] == 0) ready.push(v);

    std::vector<int> order;
    order.reserve(static_cast<size_t>(n));
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int w : g.successors(v))
            if (--indegree[static_cast<size_t>(w)] == 0) ready.push(w);
    }
    if (static_cast<int>(order.size()) != n) {
        std::ostringstream msg;
        msg << "cycle detected involving nodes {";
        bool first = true;
        for (int v = 1; v <= n; ++v) {
            if (std::find(order.begin(), order.end(), v) != order.end()) continue;
            msg << (first ? "" : ", ") << v;
            first = false;
        }
        msg << "}";
        throw GraphError(msg.str());
    }
    return order;
}

bool is_topological(const CollabGraph& g, const std::vector<int>& order) {
    int n = g.node_count();
    if (static_cast<int>(order.size()) != n) return false;
    std::vector<int> position(static_cast<size_t>(n) + 1, -1);
    for (int i = 0; i < n; ++i) {
        int v = order[static_cast<size_t>(i)];
        if (v < 1 || v > n || position[static_cast<size_t>(v)] != -1) return false;
        position[static_cast<size_t>(v)] = i;
    }
    for (const auto& [from, to] : g.edges)
        if (position[static_cast<size_t>(from)] >= position[static_cast<size_t>(to)]) return false;
    return true;
}

std::string graph_to_json(const CollabGraph& g, int indent) {
    nlohmann::json nodes = nlohmann::json::array();
    for (int v = 1; v <= g.node_count(); ++v)
        nodes.push_back({{"id", v}, {"role", g.roles[static_cast<size_t>(v) - 1]}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [from, to] : g.edges) edges.push_back({from, to});
    nlohmann::json j{{"nodes", nodes},
                     {"edges", edges},
                     {"meta", {{"query", g.query}, {"source", g.source}}}};
    return j.dump(indent);
}

CollabGraph graph_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError("graph: not a JSON object");
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw ValidationError("graph: missing nodes array");

    CollabGraph g;
    int expected = 1;
    for (const auto& node : j["nodes"]) {
        if (!node.contains("id") || !node.contains("role"))
            throw ValidationError("graph: node entries need id and role");
        if (node["id"].get<int>() != expected)
            throw ValidationError("graph: node ids must be 1-based and consecutive");
        g.add_node(node["role"].get<std::string>());
        ++expected;
    }
    if (j.contains("edges")) {
        for (const auto& e : j["edges"]) {
            if (!e.is_array() || e.size() != 2)
                throw ValidationError("graph: edges must be [from, to] pairs");
            g.add_edge(e[0].get<int>(), e[1].get<int>());
        }
    }
    if (j.contains("meta")) {
        const auto& meta = j["meta"];
        if (meta.contains("query")) g.query = meta["query"].get<std::string>();
        if (meta.contains("source")) g.source = meta["source"].get<std::string>();
    }
    return g;
}

CollabGraph load_graph(const std::string& path) {
    return graph_from_json(read_file(path));
}

void save_graph(const std::string& path, const CollabGraph& g) {
    write_file_atomic(path, graph_to_json(g) + "\n");
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string to_dot(const CollabGraph& g) {
    std::ostringstream out;
    out << "digraph collab {\n";
    for (int v = 1; v <= g.node_count(); ++v)
        out << "  n" << v << " [label=\"" << v << ": "
            << dot_escape(g.roles[static_cast<size_t>(v) - 1]) << "\"];\n";
    for (const auto& [from, to] : g.edges)
        out << "  n" << from << " -> n" << to << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace topogen
