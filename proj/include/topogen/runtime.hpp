#pragma once

#include <string>
#include <utility>
#include <vector>

#include "topogen/curriculum.hpp"
#include "topogen/graph.hpp"
#include "topogen/registry.hpp"

namespace topogen {

// Whitespace-delimited token count; the deterministic stand-in for a real
// tokenizer when comparing prompt costs across topologies.
int token_proxy(const std::string& text);

struct Prompt {
    std::string system_part;
    std::string user_part;

    int token_count() const { return token_proxy(system_part) + token_proxy(user_part); }
};

// Identifies one backend invocation (summarizer calls use node 0).
struct AgentCall {
    int node = 0;
    std::string role;
    int round = 0;
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual std::string complete(const Prompt& prompt, const AgentCall& call) = 0;
};

// Pure function of (prompt, call, seed): "[role]@round-k: <digest>". The
// digest changes whenever any prompt byte changes, so information flow is
// traceable through rounds.
class MockBackend : public AgentBackend {
public:
    explicit MockBackend(uint64_t seed = 0) : seed_(seed) {}
    std::string complete(const Prompt& prompt, const AgentCall& call) override;

private:
    uint64_t seed_;
};

// Chat-completion endpoint speaking {"model", "messages", "temperature"};
// the reply is read from the first choice's message content.
struct RemoteConfig {
    std::string base_url;  // scheme://host[:port]
    std::string model;
    std::string api_key_env;  // env var holding the key; never stored in files
    int timeout_seconds = 30;
    int max_retries = 2;
    double temperature = 0.0;
};

class RemoteBackend : public AgentBackend {
public:
    explicit RemoteBackend(RemoteConfig cfg);
    std::string complete(const Prompt& prompt, const AgentCall& call) override;

private:
    RemoteConfig cfg_;
};

enum class AggregationStrategy { majority_vote, terminal_agent, last_in_order, summarizer };
std::string to_string(AggregationStrategy s);
AggregationStrategy aggregation_from_string(const std::string& s);  // throws InputError

struct ExecutionOptions {
    int rounds = 3;  // K
    AggregationStrategy strategy = AggregationStrategy::summarizer;
    int terminal_node = 0;  // required by terminal_agent
};

struct RoundEntry {
    int node = 0;
    std::string content;
    int prompt_tokens = 0;
};

struct Transcript {
    CollabGraph graph;
    int rounds_executed = 0;
    std::vector<std::vector<RoundEntry>> rounds;  // [k-1], entries sorted by node id
    std::string final_output;
    std::string strategy;
    long total_prompt_tokens = 0;
};

// A predecessor message as seen by the receiving agent.
struct Inbound {
    int sender = 0;
    std::string role;
    std::string content;
};

// System part: role line, optional description, the agent's own prior
// messages. User part: the query, then predecessor messages in ascending
// sender-id order (round 1 sees none). Byte-deterministic.
Prompt build_prompt(const std::string& role_name, const std::string& role_description,
                    const std::vector<std::string>& own_history, const std::string& query,
                    std::vector<Inbound> predecessors);

// K rounds of message passing in topological order; each agent sees its
// in-neighbors' round-(k-1) messages and its own history, then the final
// round is aggregated. Role descriptions come from `registry` when given.
Transcript execute(const CollabGraph& g, const TaskQuery& q, const ExecutionOptions& opt,
                   AgentBackend& backend, const RoleRegistry* registry = nullptr);

long token_cost(const Transcript& t);

// 1 iff the transcript's final output matches the task's expected answer
// (whitespace-collapsed, case-folded); tasks without an expected answer fall
// back to the structural judge; tasks with neither are a ConfigError.
bool runtime_success(const Transcript& t, const TaskSpec& task);

std::string transcript_to_json(const Transcript& t, int indent = 2);
void save_transcript(const std::string& path, const Transcript& t);

}  // namespace topogen
