#include "topogen/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "topogen/io_util.hpp"
#include "topogen/rng.hpp"

namespace topogen {

std::string to_string(Topology t) {
    switch (t) {
        case Topology::chain: return "chain";
        case Topology::star: return "star";
        case Topology::tree: return "tree";
        case Topology::complete: return "complete";
        case Topology::random_graph: return "random";
    }
    throw InputError("unknown topology value");
}

Topology topology_from_string(const std::string& s) {
    if (s == "chain") return Topology::chain;
    if (s == "star") return Topology::star;
    if (s == "tree") return Topology::tree;
    if (s == "complete") return Topology::complete;
    if (s == "random") return Topology::random_graph;
    throw InputError("unknown topology '" + s + "'");
}

void ConfigBlueprint::validate() const {
    if (agent_num < 1) throw ValidationError("blueprint: agent_num must be >= 1");
    if (topology == Topology::star && agent_num < 2)
        throw ValidationError("blueprint: star topology needs at least 2 agents");
    if (!roles.empty() && static_cast<int>(roles.size()) != agent_num)
        throw ValidationError("blueprint: explicit role list has " +
                              std::to_string(roles.size()) + " entries for agent_num " +
                              std::to_string(agent_num));
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw ValidationError("blueprint: edge_prob must lie in [0, 1]");
}

CollabGraph build_graph(const ConfigBlueprint& c, const RoleRegistry& pool, uint64_t seed) {
    c.validate();
    Rng rng(seed);

    CollabGraph g;
    g.source = "blueprint:" + to_string(c.topology);
    if (c.roles.empty()) {
        if (pool.role_count() == 0)
            throw ConfigError("build_graph: sampling roles from an empty registry");
        for (int k = 0; k < c.agent_num; ++k)
            g.add_node(pool.role(rng.next_below(pool.role_count())).name);
    } else {
        for (const std::string& r : c.roles) g.add_node(r);
    }

    const int n = c.agent_num;
    switch (c.topology) {
        case Topology::chain:
            for (int k = 1; k < n; ++k) g.add_edge(k, k + 1);
            break;
        case Topology::star:
            for (int k = 2; k <= n; ++k) g.add_edge(1, k);
            break;
        case Topology::tree:
            for (int k = 2; k <= n; ++k)
                g.add_edge(1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(k - 1))), k);
            break;
        case Topology::complete:
            for (int j = 1; j <= n; ++j)
                for (int i = j + 1; i <= n; ++i) g.add_edge(j, i);
            break;
        case Topology::random_graph:
            for (int j = 1; j <= n; ++j)
                for (int i = j + 1; i <= n; ++i)
                    if (rng.next_double() < c.edge_prob) g.add_edge(j, i);
            break;
    }
    return g;
}

bool Predicate::eval(const CollabGraph& g) const {
    switch (kind) {
        case Kind::none:
            return true;
        case Kind::path_between_roles: {
            // BFS from every node with role_a; true if any reachable node
            // (including a start, when role_a == role_b) carries role_b.
            std::vector<bool> seen(static_cast<size_t>(g.node_count()) + 1, false);
            std::vector<int> frontier;
            for (int v = 1; v <= g.node_count(); ++v)
                if (g.roles[static_cast<size_t>(v) - 1] == role_a) {
                    seen[static_cast<size_t>(v)] = true;
                    frontier.push_back(v);
                }
            while (!frontier.empty()) {
                std::vector<int> next;
                for (int v : frontier)
                    for (int w : g.successors(v))
                        if (!seen[static_cast<size_t>(w)]) {
                            seen[static_cast<size_t>(w)] = true;
                            next.push_back(w);
                        }
                frontier = std::move(next);
            }
            for (int v = 1; v <= g.node_count(); ++v)
                if (seen[static_cast<size_t>(v)] && g.roles[static_cast<size_t>(v) - 1] == role_b)
                    return true;
            return false;
        }
        case Kind::hub_role: {
            for (int v = 1; v <= g.node_count(); ++v)
                if (g.roles[static_cast<size_t>(v) - 1] == role_a &&
                    static_cast<int>(g.successors(v).size()) >= min_out)
                    return true;
            return false;
        }
        case Kind::node_count_range:
            return g.node_count() >= min_count && g.node_count() <= max_count;
    }
    return false;
}

bool rule_based_success(const TaskSpec& task, const CollabGraph& g) {
    // Required roles with multiplicity: each listed name must appear at
    // least as many times as it is listed.
    std::vector<std::string> required = task.required_roles;
    std::sort(required.begin(), required.end());
    for (size_t i = 0; i < required.size();) {
        size_t j = i;
        while (j < required.size() && required[j] == required[i]) ++j;
        size_t have = 0;
        for (const std::string& r : g.roles)
            if (r == required[i]) ++have;
        if (have < j - i) return false;
        i = j;
    }
    return task.predicate.eval(g);
}

std::vector<TrainingExample> synth_exploration(const std::vector<TaskSpec>& tasks,
                                               const std::vector<ConfigBlueprint>& configs,
                                               const RoleRegistry& pool,
                                               const SuccessOracle& oracle, uint64_t seed,
                                               SynthStats* stats) {
    SynthStats local;
    std::vector<TrainingExample> out;
    for (const TaskSpec& task : tasks) {
        for (size_t ci = 0; ci < configs.size(); ++ci) {
            ++local.attempted;
            uint64_t inst_seed = seed_for(seed, task.id + "#" + std::to_string(ci));
            CollabGraph g = build_graph(configs[ci], pool, inst_seed);
            g.query = task.query;
            g.source = "exp";
            bool ok = false;
            try {
                ok = oracle(task, g);
            } catch (const Error&) {
                ++local.oracle_errors;
                continue;
            }
            if (!ok) continue;
            ++local.kept;
            out.push_back({TaskQuery(task.query), std::move(g), "exp", true});
        }
    }
    if (out.empty() && local.attempted > 0)
        std::cerr << "warning: success oracle rejected all " << local.attempted
                  << " synthesized graphs; dataset is empty\n";
    if (stats) *stats = local;
    return out;
}

namespace {

CollabGraph without_edge(const CollabGraph& g, std::pair<int, int> edge) {
    CollabGraph out = g;
    out.edges.erase(edge);
    return out;
}

CollabGraph without_node(const CollabGraph& g, int victim) {
    CollabGraph out;
    out.query = g.query;
    out.source = g.source;
    for (int v = 1; v <= g.node_count(); ++v)
        if (v != victim) out.add_node(g.roles[static_cast<size_t>(v) - 1]);
    for (const auto& [from, to] : g.edges) {
        if (from == victim || to == victim) continue;
        out.add_edge(from > victim ? from - 1 : from, to > victim ? to - 1 : to);
    }
    return out;
}

}  // namespace

std::vector<TrainingExample> prune_variants(const TrainingExample& ex, const TaskSpec& task,
                                            const SuccessOracle& oracle) {
    std::vector<TrainingExample> out;
    auto keep = [&](CollabGraph g) {
        if (!oracle(task, g)) return;
        g.query = ex.query.text;
        g.source = "pruned";
        out.push_back({TaskQuery(ex.query.text), std::move(g), "pruned", true});
    };
    for (const auto& edge : ex.graph.edges) keep(without_edge(ex.graph, edge));
    if (ex.graph.node_count() > 1)
        for (int v = 1; v <= ex.graph.node_count(); ++v) keep(without_node(ex.graph, v));
    return out;
}

std::vector<TrainingExample> assemble_efficiency(const std::vector<TrainingExample>& simple,
                                                 const std::vector<TrainingExample>& pruned,
                                                 const std::vector<TrainingExample>& exploration,
                                                 double replay_fraction, uint64_t seed) {
    if (replay_fraction < 0.0 || replay_fraction > 1.0)
        throw ValidationError("assemble_efficiency: replay fraction must lie in [0, 1]");
    std::vector<TrainingExample> out;
    for (const auto& ex : simple) {
        out.push_back(ex);
        out.back().source = "simple";
        out.back().graph.source = "simple";
    }
    for (const auto& ex : pruned) {
        out.push_back(ex);
        out.back().source = "pruned";
        out.back().graph.source = "pruned";
    }

    size_t replay_count =
        static_cast<size_t>(std::ceil(replay_fraction * static_cast<double>(exploration.size())));
    replay_count = std::min(replay_count, exploration.size());
    std::vector<size_t> order(exploration.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed_for(seed, "replay-sample"));
    rng.shuffle(order);
    std::vector<size_t> chosen(order.begin(),
                               order.begin() + static_cast<std::ptrdiff_t>(replay_count));
    std::sort(chosen.begin(), chosen.end());  // keep original dataset order
    for (size_t idx : chosen) {
        out.push_back(exploration[idx]);
        out.back().source = "replay";
        out.back().graph.source = "replay";
    }
    return out;
}

void write_dataset(const std::string& path, const std::vector<TrainingExample>& examples) {
    std::ostringstream lines;
    for (const auto& ex : examples) {
        CollabGraph g = ex.graph;
        g.query = ex.query.text;
        g.source = ex.source;
        nlohmann::json j{{"query", ex.query.text},
                         {"graph", nlohmann::json::parse(graph_to_json(g))},
                         {"source", ex.source}};
        lines << j.dump() << "\n";
    }
    write_file_atomic(path, lines.str());
}

std::vector<TrainingExample> read_dataset(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<TrainingExample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("query") || !j.contains("graph") ||
            !j.contains("source"))
            throw ValidationError("dataset " + path + ": bad record at line " +
                                  std::to_string(lineno));
        out.push_back({TaskQuery(j["query"].get<std::string>()),
                       graph_from_json(j["graph"].dump()), j["source"].get<std::string>(), true});
    }
    return out;
}

namespace {

Predicate predicate_from_json(const nlohmann::json& j) {
    Predicate p;
    if (j.is_null()) return p;
    std::string type = j.value("type", "none");
    if (type == "none") {
        p.kind = Predicate::Kind::none;
    } else if (type == "path-between-roles") {
        p.kind = Predicate::Kind::path_between_roles;
        p.role_a = j.at("from").get<std::string>();
        p.role_b = j.at("to").get<std::string>();
    } else if (type == "hub-role") {
        p.kind = Predicate::Kind::hub_role;
        p.role_a = j.at("role").get<std::string>();
        p.min_out = j.value("min_out", 2);
    } else if (type == "node-count-range") {
        p.kind = Predicate::Kind::node_count_range;
        p.min_count = j.value("min", 1);
        p.max_count = j.value("max", 1 << 30);
    } else {
        throw ValidationError("task suite: unknown predicate type '" + type + "'");
    }
    return p;
}

nlohmann::json predicate_to_json(const Predicate& p) {
    switch (p.kind) {
        case Predicate::Kind::none: return {{"type", "none"}};
        case Predicate::Kind::path_between_roles:
            return {{"type", "path-between-roles"}, {"from", p.role_a}, {"to", p.role_b}};
        case Predicate::Kind::hub_role:
            return {{"type", "hub-role"}, {"role", p.role_a}, {"min_out", p.min_out}};
        case Predicate::Kind::node_count_range:
            return {{"type", "node-count-range"}, {"min", p.min_count}, {"max", p.max_count}};
    }
    throw InputError("unknown predicate kind");
}

}  // namespace

std::vector<TaskSpec> read_task_suite(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw ValidationError("task suite: expected a JSON array in " + path);
    std::vector<TaskSpec> out;
    for (const auto& item : j) {
        if (!item.contains("id") || !item.contains("query"))
            throw ValidationError("task suite: entries need id and query in " + path);
        TaskSpec t;
        t.id = item["id"].get<std::string>();
        t.query = item["query"].get<std::string>();
        if (item.contains("required_roles"))
            t.required_roles = item["required_roles"].get<std::vector<std::string>>();
        if (item.contains("predicate")) t.predicate = predicate_from_json(item["predicate"]);
        if (item.contains("expected_answer") && !item["expected_answer"].is_null())
            t.expected_answer = item["expected_answer"].get<std::string>();
        out.push_back(std::move(t));
    }
    return out;
}

void write_task_suite(const std::string& path, const std::vector<TaskSpec>& tasks) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& t : tasks) {
        nlohmann::json item{{"id", t.id},
                            {"query", t.query},
                            {"required_roles", t.required_roles},
                            {"predicate", predicate_to_json(t.predicate)}};
        if (t.expected_answer) item["expected_answer"] = *t.expected_answer;
        j.push_back(std::move(item));
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

ConfigBlueprint blueprint_from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ValidationError("blueprint: expected a JSON object");
    ConfigBlueprint c;
    c.topology = topology_from_string(j.at("topology").get<std::string>());
    c.agent_num = j.at("agent_num").get<int>();
    if (j.contains("roles")) c.roles = j["roles"].get<std::vector<std::string>>();
    if (j.contains("edge_prob")) c.edge_prob = j["edge_prob"].get<double>();
    c.validate();
    return c;
}

}  // namespace topogen
