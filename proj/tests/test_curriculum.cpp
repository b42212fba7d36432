#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <set>

#include "topogen/curriculum.hpp"
#include "topogen/errors.hpp"
#include "topogen/io_util.hpp"

using namespace topogen;

namespace {

const std::vector<std::pair<std::string, std::string>> kRoles = {
    {"planner", "plans"}, {"coder", "codes"},   {"checker", "checks"},
    {"writer", "writes"}, {"searcher", "finds"},
};

HashedEmbedding& provider() {
    static HashedEmbedding p(16);
    return p;
}

RoleRegistry& pool() {
    static RoleRegistry reg = RoleRegistry::create(kRoles, provider(), 2);
    return reg;
}

ConfigBlueprint bp(Topology t, int n, double p = 0.5) {
    ConfigBlueprint c;
    c.topology = t;
    c.agent_num = n;
    c.edge_prob = p;
    return c;
}

}  // namespace

TEST_CASE("topology names round-trip") {
    for (Topology t : {Topology::chain, Topology::star, Topology::tree, Topology::complete,
                       Topology::random_graph})
        CHECK(topology_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(topology_from_string("ring"), InputError);
}

TEST_CASE("build_graph: chain, star, complete match their definitions") {
    CollabGraph chain = build_graph(bp(Topology::chain, 3), pool(), 1);
    CHECK(chain.edges == std::set<std::pair<int, int>>{{1, 2}, {2, 3}});

    CollabGraph star = build_graph(bp(Topology::star, 4), pool(), 1);
    CHECK(star.edges == std::set<std::pair<int, int>>{{1, 2}, {1, 3}, {1, 4}});

    for (int n : {2, 3, 5}) {
        CollabGraph complete = build_graph(bp(Topology::complete, n), pool(), 1);
        CHECK(static_cast<int>(complete.edge_count()) == n * (n - 1) / 2);
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) CHECK(complete.edges.count({i, j}) == 1);
    }
}

TEST_CASE("build_graph: tree parents precede children, random stays forward") {
    CollabGraph tree = build_graph(bp(Topology::tree, 6), pool(), 7);
    CHECK(tree.edge_count() == 5);
    for (const auto& [from, to] : tree.edges) CHECK(from < to);
    // every non-root node has exactly one parent
    for (int v = 2; v <= 6; ++v) CHECK(tree.predecessors(v).size() == 1);

    CollabGraph rnd = build_graph(bp(Topology::random_graph, 6, 0.7), pool(), 9);
    for (const auto& [from, to] : rnd.edges) CHECK(from < to);
    CHECK_NOTHROW(validate_dag(rnd));
}

TEST_CASE("build_graph: explicit roles are honored, sampled roles come from the pool") {
    ConfigBlueprint c = bp(Topology::chain, 3);
    c.roles = {"coder", "checker", "coder"};
    CollabGraph g = build_graph(c, pool(), 3);
    CHECK(g.roles == std::vector<std::string>{"coder", "checker", "coder"});

    CollabGraph sampled = build_graph(bp(Topology::star, 5), pool(), 3);
    for (const std::string& r : sampled.roles) CHECK(pool().find(r) >= 0);

    // same seed, same graph; different seed may resample
    CollabGraph again = build_graph(bp(Topology::star, 5), pool(), 3);
    CHECK(again.roles == sampled.roles);
}

TEST_CASE("build_graph: blueprint validation") {
    CHECK_THROWS_AS(build_graph(bp(Topology::chain, 0), pool(), 1), ValidationError);
    CHECK_THROWS_AS(build_graph(bp(Topology::star, 1), pool(), 1), ValidationError);
    ConfigBlueprint c = bp(Topology::chain, 3);
    c.roles = {"coder"};  // wrong length
    CHECK_THROWS_AS(build_graph(c, pool(), 1), ValidationError);
    c = bp(Topology::random_graph, 3, 1.5);
    CHECK_THROWS_AS(build_graph(c, pool(), 1), ValidationError);
}

TEST_CASE("predicates: path, hub, node-count") {
    CollabGraph g;
    g.add_node("planner");
    g.add_node("coder");
    g.add_node("checker");
    g.add_edge(1, 2);
    g.add_edge(2, 3);

    Predicate path;
    path.kind = Predicate::Kind::path_between_roles;
    path.role_a = "planner";
    path.role_b = "checker";
    CHECK(path.eval(g));
    path.role_a = "checker";
    path.role_b = "planner";
    CHECK_FALSE(path.eval(g));  // direction matters
    path.role_a = "writer";
    CHECK_FALSE(path.eval(g));  // absent role

    Predicate hub;
    hub.kind = Predicate::Kind::hub_role;
    hub.role_a = "planner";
    hub.min_out = 2;
    CHECK_FALSE(hub.eval(g));
    g.add_edge(1, 3);
    CHECK(hub.eval(g));

    Predicate count;
    count.kind = Predicate::Kind::node_count_range;
    count.min_count = 2;
    count.max_count = 3;
    CHECK(count.eval(g));
    count.max_count = 2;
    CHECK_FALSE(count.eval(g));

    Predicate none;
    CHECK(none.eval(g));
}

TEST_CASE("rule_based_success: role multiplicity plus predicate") {
    CollabGraph g;
    g.add_node("coder");
    g.add_node("coder");
    g.add_node("checker");

    TaskSpec t;
    t.id = "t";
    t.query = "q";
    t.required_roles = {"coder", "coder"};
    CHECK(rule_based_success(t, g));
    t.required_roles = {"coder", "coder", "coder"};
    CHECK_FALSE(rule_based_success(t, g));
    t.required_roles = {"coder", "checker"};
    CHECK(rule_based_success(t, g));
    t.required_roles = {"writer"};
    CHECK_FALSE(rule_based_success(t, g));

    t.required_roles = {"coder"};
    t.predicate.kind = Predicate::Kind::node_count_range;
    t.predicate.min_count = 4;
    CHECK_FALSE(rule_based_success(t, g));
}

TEST_CASE("synth_exploration: trivial oracles pin the dataset size") {
    std::vector<TaskSpec> tasks(3);
    for (int i = 0; i < 3; ++i) {
        tasks[static_cast<size_t>(i)].id = "t" + std::to_string(i);
        tasks[static_cast<size_t>(i)].query = "query " + std::to_string(i);
    }
    std::vector<ConfigBlueprint> configs = {bp(Topology::chain, 3), bp(Topology::star, 4)};

    SynthStats stats;
    auto accept = [](const TaskSpec&, const CollabGraph&) { return true; };
    std::vector<TrainingExample> all = synth_exploration(tasks, configs, pool(), accept, 11,
                                                         &stats);
    CHECK(all.size() == 6);
    CHECK(stats.attempted == 6);
    CHECK(stats.kept == 6);
    for (const auto& ex : all) {
        CHECK(ex.source == "exp");
        CHECK_FALSE(ex.query.text.empty());
    }

    auto reject = [](const TaskSpec&, const CollabGraph&) { return false; };
    CHECK(synth_exploration(tasks, configs, pool(), reject, 11).empty());

    auto flaky = [](const TaskSpec&, const CollabGraph&) -> bool {
        throw ValidationError("oracle exploded");
    };
    SynthStats err_stats;
    CHECK(synth_exploration(tasks, configs, pool(), flaky, 11, &err_stats).empty());
    CHECK(err_stats.oracle_errors == 6);
}

TEST_CASE("synth_exploration: filter matches an exhaustive product walk") {
    std::vector<TaskSpec> tasks(4);
    for (int i = 0; i < 4; ++i) {
        tasks[static_cast<size_t>(i)].id = "task" + std::to_string(i);
        tasks[static_cast<size_t>(i)].query = "find a checker " + std::to_string(i);
        tasks[static_cast<size_t>(i)].required_roles = {"checker"};
    }
    std::vector<ConfigBlueprint> configs = {bp(Topology::chain, 2), bp(Topology::chain, 4),
                                            bp(Topology::star, 3)};

    std::vector<TrainingExample> got = synth_exploration(tasks, configs, pool(),
                                                         rule_based_success, 23);

    // brute force: walk the same product, rebuild each graph from its
    // instance seed, and keep it iff a node carries the required role
    std::vector<std::pair<std::string, CollabGraph>> want;
    for (const TaskSpec& task : tasks) {
        for (size_t ci = 0; ci < configs.size(); ++ci) {
            CollabGraph g = build_graph(configs[ci], pool(),
                                        seed_for(23, task.id + "#" + std::to_string(ci)));
            bool has = false;
            for (const std::string& r : g.roles) has = has || r == "checker";
            if (has) want.emplace_back(task.query, g);
        }
    }
    REQUIRE(got.size() == want.size());
    CHECK_FALSE(got.empty());
    CHECK(got.size() < tasks.size() * configs.size());  // the filter really filters
    for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].query.text == want[i].first);
        CHECK(got[i].graph.roles == want[i].second.roles);
        CHECK(got[i].graph.edges == want[i].second.edges);
    }
}

TEST_CASE("prune_variants: complete graph keeps the redundant-edge removals") {
    TaskSpec task;
    task.id = "p";
    task.query = "path";
    task.predicate.kind = Predicate::Kind::path_between_roles;
    task.predicate.role_a = "planner";
    task.predicate.role_b = "checker";

    TrainingExample ex;
    ex.query = TaskQuery("path");
    ex.graph.add_node("planner");
    ex.graph.add_node("coder");
    ex.graph.add_node("checker");
    ex.graph.add_edge(1, 2);
    ex.graph.add_edge(1, 3);
    ex.graph.add_edge(2, 3);
    ex.source = "exp";

    std::vector<TrainingExample> vars = prune_variants(ex, task, rule_based_success);
    // every single-edge removal keeps a planner-to-checker path (direct edge
    // or relay through the coder), and removing the coder node keeps the
    // direct edge; removing node 1 or node 3 loses a predicate endpoint
    REQUIRE(vars.size() == 4);
    CHECK(vars[0].graph.edges == std::set<std::pair<int, int>>{{1, 3}, {2, 3}});
    CHECK(vars[1].graph.edges == std::set<std::pair<int, int>>{{1, 2}, {2, 3}});
    CHECK(vars[2].graph.edges == std::set<std::pair<int, int>>{{1, 2}, {1, 3}});
    // the node-removal survivor is the 2-node direct pair, ids compacted
    CHECK(vars[3].graph.roles == std::vector<std::string>{"planner", "checker"});
    CHECK(vars[3].graph.edges == std::set<std::pair<int, int>>{{1, 2}});
    for (const auto& v : vars) CHECK(v.source == "pruned");
}

TEST_CASE("prune_variants: chain keeps no edge removals under a path oracle") {
    TaskSpec task;
    task.id = "p";
    task.query = "path";
    task.predicate.kind = Predicate::Kind::path_between_roles;
    task.predicate.role_a = "planner";
    task.predicate.role_b = "checker";

    TrainingExample ex;
    ex.query = TaskQuery("path");
    ex.graph.add_node("planner");
    ex.graph.add_node("coder");
    ex.graph.add_node("checker");
    ex.graph.add_edge(1, 2);
    ex.graph.add_edge(2, 3);
    ex.source = "exp";

    for (const TrainingExample& v : prune_variants(ex, task, rule_based_success))
        CHECK(v.graph.node_count() < 3);  // no edge-only variant survived
}

TEST_CASE("prune_variants: single node has no variants") {
    TaskSpec task;
    task.id = "s";
    task.query = "solo";
    TrainingExample ex;
    ex.query = TaskQuery("solo");
    ex.graph.add_node("planner");
    CHECK(prune_variants(ex, task, rule_based_success).empty());
}

TEST_CASE("assemble_efficiency: replay fraction controls the mix") {
    auto make = [](const std::string& q, int n) {
        TrainingExample ex;
        ex.query = TaskQuery(q);
        for (int i = 0; i < n; ++i) ex.graph.add_node("coder");
        ex.source = "exp";
        return ex;
    };
    std::vector<TrainingExample> simple = {make("s1", 1), make("s2", 2)};
    std::vector<TrainingExample> pruned = {make("p1", 2)};
    std::vector<TrainingExample> exploration = {make("e1", 3), make("e2", 4), make("e3", 5)};

    std::vector<TrainingExample> none = assemble_efficiency(simple, pruned, exploration, 0.0, 5);
    CHECK(none.size() == 3);
    for (const auto& ex : none) CHECK(ex.source != "replay");
    CHECK(none[0].source == "simple");
    CHECK(none[2].source == "pruned");

    std::vector<TrainingExample> full = assemble_efficiency(simple, pruned, exploration, 1.0, 5);
    CHECK(full.size() == 6);
    int replays = 0;
    for (const auto& ex : full) replays += ex.source == "replay" ? 1 : 0;
    CHECK(replays == 3);

    // ceil(0.5 * 3) = 2 replay items
    std::vector<TrainingExample> half = assemble_efficiency(simple, pruned, exploration, 0.5, 5);
    CHECK(half.size() == 2 + 1 + 2);

    CHECK_THROWS_AS(assemble_efficiency(simple, pruned, exploration, 1.5, 5), ValidationError);
}

TEST_CASE("canonical_order: pinned linearizations") {
    CollabGraph chain = build_graph(bp(Topology::chain, 3), pool(), 1);
    CHECK(canonical_order(chain) == std::vector<int>{1, 2, 3});

    CollabGraph star = build_graph(bp(Topology::star, 4), pool(), 1);
    CHECK(canonical_order(star) == std::vector<int>{1, 2, 3, 4});

    CollabGraph isolated;
    isolated.add_node("coder");
    isolated.add_node("writer");
    CHECK(canonical_order(isolated) == std::vector<int>{1, 2});
}

TEST_CASE("datasets: JSONL round trip preserves every field") {
    std::vector<TrainingExample> data;
    TrainingExample a;
    a.query = TaskQuery("first");
    a.graph.add_node("coder");
    a.graph.add_node("checker");
    a.graph.add_edge(1, 2);
    a.source = "exp";
    data.push_back(a);
    TrainingExample b;
    b.query = TaskQuery("second");
    b.graph.add_node("writer");
    b.source = "pruned";
    data.push_back(b);

    std::string path = "/tmp/topogen_dataset_rt.jsonl";
    write_dataset(path, data);
    std::vector<TrainingExample> back = read_dataset(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].query.text == "first");
    CHECK(back[0].graph.edges == a.graph.edges);
    CHECK(back[0].source == "exp");
    CHECK(back[1].graph.roles == b.graph.roles);
    CHECK(back[1].source == "pruned");
    std::remove(path.c_str());
}

TEST_CASE("task suites: JSON round trip including predicates") {
    std::vector<TaskSpec> tasks(2);
    tasks[0].id = "a";
    tasks[0].query = "alpha";
    tasks[0].required_roles = {"coder"};
    tasks[0].predicate.kind = Predicate::Kind::path_between_roles;
    tasks[0].predicate.role_a = "coder";
    tasks[0].predicate.role_b = "checker";
    tasks[1].id = "b";
    tasks[1].query = "beta";
    tasks[1].predicate.kind = Predicate::Kind::node_count_range;
    tasks[1].predicate.min_count = 2;
    tasks[1].predicate.max_count = 5;
    tasks[1].expected_answer = "42";

    std::string path = "/tmp/topogen_suite_rt.json";
    write_task_suite(path, tasks);
    std::vector<TaskSpec> back = read_task_suite(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].predicate.kind == Predicate::Kind::path_between_roles);
    CHECK(back[0].predicate.role_b == "checker");
    CHECK(back[1].predicate.min_count == 2);
    REQUIRE(back[1].expected_answer.has_value());
    CHECK(*back[1].expected_answer == "42");
    CHECK_FALSE(back[0].expected_answer.has_value());
    std::remove(path.c_str());
}
