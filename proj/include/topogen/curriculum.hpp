#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topogen/graph.hpp"
#include "topogen/registry.hpp"

namespace topogen {

enum class Topology { chain, star, tree, complete, random_graph };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);  // throws InputError

// High-level recipe mapped deterministically to a concrete graph. Roles are
// either listed explicitly (length must equal agent_num) or sampled from the
// registry when the list is empty.
struct ConfigBlueprint {
    Topology topology = Topology::chain;
    int agent_num = 1;
    std::vector<std::string> roles;
    double edge_prob = 0.5;  // random_graph only

    void validate() const;
};

CollabGraph build_graph(const ConfigBlueprint& c, const RoleRegistry& pool, uint64_t seed);

// Structural check evaluated against a finished graph.
struct Predicate {
    enum class Kind { none, path_between_roles, hub_role, node_count_range };
    Kind kind = Kind::none;
    std::string role_a;  // path source / hub role
    std::string role_b;  // path target
    int min_count = 1;   // node_count_range bounds
    int max_count = 1 << 30;
    int min_out = 2;  // hub out-degree

    bool eval(const CollabGraph& g) const;
};

// One entry of the evaluation/synthesis suite.
struct TaskSpec {
    std::string id;
    std::string query;
    std::vector<std::string> required_roles;
    Predicate predicate;
    std::optional<std::string> expected_answer;  // used by the runtime oracle
};

// Deterministic structural judge: every required role appears at least as
// often as listed and the predicate holds.
bool rule_based_success(const TaskSpec& task, const CollabGraph& g);

// Any deterministic judgment of (task, graph). rule_based_success is the
// default; a runtime-backed oracle wraps graph execution instead.
using SuccessOracle = std::function<bool(const TaskSpec&, const CollabGraph&)>;

struct TrainingExample {
    TaskQuery query{std::string()};
    CollabGraph graph;
    std::string source;  // exp | simple | pruned | replay
    bool success = true;
};

// The node linearization used for teacher forcing; same Kahn order the
// runtime schedules by.
inline std::vector<int> canonical_order(const CollabGraph& g) { return topo_order(g); }

// Cross product of tasks and blueprints, filtered by the oracle. Blueprint
// instantiation is seeded per (task id, blueprint index); oracle failures
// drop the pair, oracle exceptions are counted and skipped.
struct SynthStats {
    int attempted = 0;
    int kept = 0;
    int oracle_errors = 0;
};
std::vector<TrainingExample> synth_exploration(const std::vector<TaskSpec>& tasks,
                                               const std::vector<ConfigBlueprint>& configs,
                                               const RoleRegistry& pool,
                                               const SuccessOracle& oracle, uint64_t seed,
                                               SynthStats* stats = nullptr);

// All still-successful variants reachable by deleting one edge or one node
// (with id compaction). Enumeration order: edges in set order, then nodes
// ascending; symmetric removals may repeat a labeled graph on purpose.
std::vector<TrainingExample> prune_variants(const TrainingExample& ex, const TaskSpec& task,
                                            const SuccessOracle& oracle);

// D_eff = simple  ∪  pruned  ∪  a seeded distinct sample of
// ceil(replay_fraction * |exploration|) exploration examples tagged replay.
std::vector<TrainingExample> assemble_efficiency(const std::vector<TrainingExample>& simple,
                                                 const std::vector<TrainingExample>& pruned,
                                                 const std::vector<TrainingExample>& exploration,
                                                 double replay_fraction, uint64_t seed);

// JSON Lines, one {"query", "graph", "source"} object per line.
void write_dataset(const std::string& path, const std::vector<TrainingExample>& examples);
std::vector<TrainingExample> read_dataset(const std::string& path);

// Task-suite file: JSON array of {"id", "query", "required_roles",
// "predicate", "expected_answer"?}.
std::vector<TaskSpec> read_task_suite(const std::string& path);
void write_task_suite(const std::string& path, const std::vector<TaskSpec>& tasks);

// Blueprint JSON used inside run configs: {"topology", "agent_num",
// "roles"?, "edge_prob"?}.
ConfigBlueprint blueprint_from_json_text(const std::string& text);

}  // namespace topogen
