#include "topogen/runtime.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <sstream>

#include <json.hpp>

#include "topogen/io_util.hpp"
#include "topogen/rng.hpp"

namespace topogen {

int token_proxy(const std::string& text) {
    int count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        bool ws = std::isspace(c) != 0;
        if (!ws && !in_token) ++count;
        in_token = !ws;
    }
    return count;
}

std::string MockBackend::complete(const Prompt& prompt, const AgentCall& call) {
    uint64_t h = fnv1a64(prompt.system_part, seed_ ^ 0x9E3779B97F4A7C15ULL);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(prompt.user_part, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(call.role + "#" + std::to_string(call.round), h);
    static const char* digits = "0123456789abcdef";
    std::string digest(8, '0');
    for (int i = 7; i >= 0; --i) {
        digest[static_cast<size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return "[" + call.role + "]@round-" + std::to_string(call.round) + ": " + digest;
}

std::string to_string(AggregationStrategy s) {
    switch (s) {
        case AggregationStrategy::majority_vote: return "majority-vote";
        case AggregationStrategy::terminal_agent: return "terminal-agent";
        case AggregationStrategy::last_in_order: return "last-in-order";
        case AggregationStrategy::summarizer: return "summarizer";
    }
    throw InputError("unknown aggregation strategy value");
}

AggregationStrategy aggregation_from_string(const std::string& s) {
    if (s == "majority-vote") return AggregationStrategy::majority_vote;
    if (s == "terminal-agent") return AggregationStrategy::terminal_agent;
    if (s == "last-in-order") return AggregationStrategy::last_in_order;
    if (s == "summarizer") return AggregationStrategy::summarizer;
    throw InputError("unknown aggregation strategy '" + s + "'");
}

Prompt build_prompt(const std::string& role_name, const std::string& role_description,
                    const std::vector<std::string>& own_history, const std::string& query,
                    std::vector<Inbound> predecessors) {
    Prompt p;
    p.system_part = "Role: " + role_name;
    if (!role_description.empty()) p.system_part += "\nDescription: " + role_description;
    for (size_t r = 0; r < own_history.size(); ++r)
        p.system_part += "\nMemory[" + std::to_string(r + 1) + "]: " + own_history[r];

    std::sort(predecessors.begin(), predecessors.end(),
              [](const Inbound& a, const Inbound& b) { return a.sender < b.sender; });
    p.user_part = query;
    for (const Inbound& in : predecessors)
        p.user_part +=
            "\nFrom agent " + std::to_string(in.sender) + " (" + in.role + "): " + in.content;
    return p;
}

namespace {

std::string role_description_of(const RoleRegistry* registry, const std::string& name) {
    if (!registry) return std::string();
    int idx = registry->find(name);
    return idx < 0 ? std::string() : registry->role(static_cast<size_t>(idx)).description;
}

// Last non-empty line, trimmed and ASCII-lowercased; the answer string used
// by majority voting.
std::string extract_answer(const std::string& content) {
    std::string last;
    std::string line;
    std::istringstream in(content);
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
    }
    size_t begin = last.find_first_not_of(" \t\r");
    size_t end = last.find_last_not_of(" \t\r");
    if (begin == std::string::npos) return std::string();
    last = last.substr(begin, end - begin + 1);
    for (char& c : last) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return last;
}

std::string serialize_dialogue(const Transcript& t) {
    std::string out;
    for (size_t k = 0; k < t.rounds.size(); ++k)
        for (const RoundEntry& e : t.rounds[k])
            out += "\nRound " + std::to_string(k + 1) + ", agent " + std::to_string(e.node) +
                   " (" + t.graph.roles[static_cast<size_t>(e.node) - 1] + "): " + e.content;
    return out;
}

const RoundEntry& final_entry_of(const Transcript& t, int node) {
    for (const RoundEntry& e : t.rounds.back())
        if (e.node == node) return e;
    throw ConfigError("aggregate: node " + std::to_string(node) + " has no final-round message");
}

}  // namespace

Transcript execute(const CollabGraph& g, const TaskQuery& q, const ExecutionOptions& opt,
                   AgentBackend& backend, const RoleRegistry* registry) {
    if (opt.rounds < 1) throw ValidationError("execute: round count must be >= 1");
    validate_dag(g);
    std::vector<int> order = topo_order(g);
    const int n = g.node_count();

    Transcript t;
    t.graph = g;
    t.graph.query = q.text;
    t.rounds_executed = opt.rounds;
    t.strategy = to_string(opt.strategy);

    std::vector<std::vector<std::string>> history(static_cast<size_t>(n) + 1);
    std::vector<std::string> previous_round(static_cast<size_t>(n) + 1);
    std::vector<std::string> current_round(static_cast<size_t>(n) + 1);

    for (int k = 1; k <= opt.rounds; ++k) {
        std::vector<RoundEntry> entries;
        for (int v : order) {
            const std::string& role = g.roles[static_cast<size_t>(v) - 1];
            std::vector<Inbound> inbound;
            if (k > 1)
                for (int u : g.predecessors(v))
                    inbound.push_back(
                        {u, g.roles[static_cast<size_t>(u) - 1], previous_round[static_cast<size_t>(u)]});
            Prompt prompt = build_prompt(role, role_description_of(registry, role),
                                         history[static_cast<size_t>(v)], q.text, std::move(inbound));
            std::string content = backend.complete(prompt, {v, role, k});
            int tokens = prompt.token_count();
            t.total_prompt_tokens += tokens;
            current_round[static_cast<size_t>(v)] = content;
            entries.push_back({v, std::move(content), tokens});
        }
        for (int v : order)
            history[static_cast<size_t>(v)].push_back(current_round[static_cast<size_t>(v)]);
        previous_round = current_round;
        std::sort(entries.begin(), entries.end(),
                  [](const RoundEntry& a, const RoundEntry& b) { return a.node < b.node; });
        t.rounds.push_back(std::move(entries));
    }

    switch (opt.strategy) {
        case AggregationStrategy::majority_vote: {
            std::map<std::string, int> counts;
            for (const RoundEntry& e : t.rounds.back()) ++counts[extract_answer(e.content)];
            std::string best;
            int best_count = -1;
            for (const RoundEntry& e : t.rounds.back()) {  // ascending node id
                const std::string answer = extract_answer(e.content);
                if (counts[answer] > best_count) {
                    best = answer;
                    best_count = counts[answer];
                }
            }
            t.final_output = best;
            break;
        }
        case AggregationStrategy::terminal_agent: {
            if (opt.terminal_node < 1 || opt.terminal_node > n)
                throw ConfigError("aggregate: terminal node " + std::to_string(opt.terminal_node) +
                                  " outside 1.." + std::to_string(n));
            t.final_output = final_entry_of(t, opt.terminal_node).content;
            break;
        }
        case AggregationStrategy::last_in_order:
            t.final_output = final_entry_of(t, order.back()).content;
            break;
        case AggregationStrategy::summarizer: {
            Prompt prompt;
            prompt.system_part =
                "Role: Summarizer\nDescription: Condense the discussion into one final answer.";
            prompt.user_part = q.text + serialize_dialogue(t);
            t.total_prompt_tokens += prompt.token_count();
            t.final_output = backend.complete(prompt, {0, "Summarizer", opt.rounds});
            break;
        }
    }
    return t;
}

long token_cost(const Transcript& t) { return t.total_prompt_tokens; }

namespace {

std::string normalize_answer(const std::string& s) {
    std::string out;
    bool in_ws = true;  // leading whitespace dropped
    for (unsigned char c : s) {
        if (std::isspace(c) != 0) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

}  // namespace

bool runtime_success(const Transcript& t, const TaskSpec& task) {
    if (task.expected_answer)
        return normalize_answer(t.final_output) == normalize_answer(*task.expected_answer);
    if (task.predicate.kind != Predicate::Kind::none || !task.required_roles.empty())
        return rule_based_success(task, t.graph);
    throw ConfigError("task '" + task.id +
                      "' provides neither an expected answer nor a structural predicate");
}

std::string transcript_to_json(const Transcript& t, int indent) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : t.rounds) {
        nlohmann::json entries = nlohmann::json::array();
        for (const RoundEntry& e : round)
            entries.push_back(
                {{"node", e.node}, {"content", e.content}, {"prompt_tokens", e.prompt_tokens}});
        rounds.push_back(std::move(entries));
    }
    nlohmann::json j{{"graph", nlohmann::json::parse(graph_to_json(t.graph))},
                     {"K", t.rounds_executed},
                     {"rounds", std::move(rounds)},
                     {"final", t.final_output},
                     {"strategy", t.strategy},
                     {"total_prompt_tokens", t.total_prompt_tokens}};
    return j.dump(indent);
}

void save_transcript(const std::string& path, const Transcript& t) {
    write_file_atomic(path, transcript_to_json(t) + "\n");
}

}  // namespace topogen
