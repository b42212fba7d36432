#pragma once

#include <utility>
#include <vector>

#include "topogen/model.hpp"

namespace topogen {

// How decisions are drawn during generation. Temperature applies to role
// sampling only; edge decisions are Bernoulli draws of their predicted
// probability. Recorded log-probs are always at temperature 1 so traces are
// comparable to teacher-forced scoring.
struct DecodePolicy {
    enum class Mode { greedy, sample };
    Mode mode = Mode::greedy;
    double temperature = 1.0;
    double edge_threshold = 0.5;  // greedy: p >= threshold means take the edge
    int n_max = 10;
    uint64_t seed = 0;

    void validate(const ModelConfig& cfg) const;
};

struct EdgeDecision {
    int from = 0;  // candidate source node j
    bool taken = false;
    double log_prob = 0.0;
};

// One autoregressive step: a role pick (or END) followed by the incoming-edge
// decisions for the new node, in the order they were made (j = i-1 down to 1).
struct TraceStep {
    int role_index = -1;  // registry index; meaningless when is_end
    bool is_end = false;
    double log_prob = 0.0;
    std::vector<EdgeDecision> edges;
};

struct GenerationTrace {
    std::vector<TraceStep> steps;
    double total_log_prob = 0.0;
    bool ended_via_end = false;
};

// Runs the full autoregressive loop: pick a role (or END), add the node,
// decide its incoming edges, repeat until END or n_max. Throws
// EmptyTopologyError if END is drawn at step 1 and ConfigError on an empty
// registry.
std::pair<CollabGraph, GenerationTrace> generate(const Model& model, const TaskQuery& q,
                                                 const RoleRegistry& registry,
                                                 const EmbeddingProvider& provider,
                                                 const DecodePolicy& policy);

// Teacher-forced log P(G | Q) along `order` (which must be topological):
// node factors, edge factors, and — when include_end is set — the terminal
// END factor. Replaying a generated trace's own graph with identity order
// and include_end = trace.ended_via_end reproduces its total.
double guided_log_prob(const Model& model, const TaskQuery& q, const RoleRegistry& registry,
                       const EmbeddingProvider& provider, const CollabGraph& graph,
                       const std::vector<int>& order, bool include_end = true);

// Double-precision log softmax / Bernoulli helpers shared by generation and
// scoring so the two paths agree bitwise on identical inputs.
std::vector<double> log_softmax(const std::vector<float>& scores);
double log_sigmoid(double logit);          // log p(edge)
double log_one_minus_sigmoid(double logit);  // log p(no edge)

}  // namespace topogen
