#include "topogen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace topogen {

using nd::Array;
using nd::Tape;
using nd::Var;

void DecodePolicy::validate(const ModelConfig& cfg) const {
    if (temperature <= 0.0) throw ValidationError("decode policy: temperature must be positive");
    if (edge_threshold <= 0.0 || edge_threshold >= 1.0)
        throw ValidationError("decode policy: edge threshold must lie in (0, 1)");
    if (n_max < 1) throw ValidationError("decode policy: n_max must be >= 1");
    if (n_max > cfg.n_max)
        throw ValidationError("decode policy: n_max " + std::to_string(n_max) +
                              " exceeds model capacity " + std::to_string(cfg.n_max));
}

std::vector<double> log_softmax(const std::vector<float>& scores) {
    double mx = -std::numeric_limits<double>::infinity();
    for (float s : scores) mx = std::max(mx, static_cast<double>(s));
    double lse = 0.0;
    for (float s : scores) lse += std::exp(static_cast<double>(s) - mx);
    lse = std::log(lse);
    std::vector<double> out(scores.size());
    for (size_t k = 0; k < scores.size(); ++k)
        out[k] = static_cast<double>(scores[k]) - mx - lse;
    return out;
}

double log_sigmoid(double logit) {
    return logit >= 0.0 ? -std::log1p(std::exp(-logit)) : logit - std::log1p(std::exp(logit));
}

double log_one_minus_sigmoid(double logit) { return log_sigmoid(-logit); }

namespace {

int greedy_pick(const std::vector<float>& scores) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(scores.size()); ++k)
        if (scores[static_cast<size_t>(k)] > scores[static_cast<size_t>(best)]) best = k;
    return best;  // strict > keeps the lowest index on ties
}

int sample_pick(const std::vector<float>& scores, double temperature, Rng& rng) {
    double mx = -std::numeric_limits<double>::infinity();
    for (float s : scores) mx = std::max(mx, static_cast<double>(s));
    std::vector<double> w(scores.size());
    double total = 0.0;
    for (size_t k = 0; k < scores.size(); ++k) {
        w[k] = std::exp((static_cast<double>(scores[k]) - mx) / temperature);
        total += w[k];
    }
    double u = rng.next_double() * total;
    double cum = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        cum += w[k];
        if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(w.size()) - 1;
}

double finalize_total(GenerationTrace& trace) {
    double total = 0.0;
    for (const auto& step : trace.steps) {
        total += step.log_prob;
        for (const auto& e : step.edges) total += e.log_prob;
    }
    trace.total_log_prob = total;
    return total;
}

}  // namespace

std::pair<CollabGraph, GenerationTrace> generate(const Model& model, const TaskQuery& q,
                                                 const RoleRegistry& registry,
                                                 const EmbeddingProvider& provider,
                                                 const DecodePolicy& policy) {
    policy.validate(model.config());
    if (registry.role_count() == 0)
        throw ConfigError("generate: role registry is empty; nothing but END could be emitted");

    Tape t;
    Model::RunCtx ctx = model.begin(t, q, registry, provider);
    Rng rng(policy.seed);
    const int end_index = ctx.role_count;
    const int model_n_max = model.config().n_max;

    CollabGraph g;
    g.query = q.text;
    g.source = "generated";
    GenerationTrace trace;

    Var h_hist = model.initial_history(t);
    Var h_node = model.initial_node_hidden(t);

    for (int i = 1; i <= policy.n_max; ++i) {
        Var f_edge = t.input(Model::edge_feature(g, i, model_n_max));
        auto [f_cont, gate] = model.fuse_context(t, h_hist, ctx.f_q);
        (void)gate;
        h_node = model.node_step(t, f_cont, f_edge, h_node);
        Var scores = model.score_roles(t, h_node, ctx);
        const std::vector<float>& sv = t.value(scores).raw();
        std::vector<double> lp = log_softmax(sv);

        int choice = policy.mode == DecodePolicy::Mode::greedy
                         ? greedy_pick(sv)
                         : sample_pick(sv, policy.temperature, rng);

        TraceStep step;
        step.log_prob = lp[static_cast<size_t>(choice)];
        if (choice == end_index) {
            if (i == 1)
                throw EmptyTopologyError(
                    "generation emitted END at the first step; retry with a different seed");
            step.is_end = true;
            trace.steps.push_back(std::move(step));
            trace.ended_via_end = true;
            break;
        }

        step.role_index = choice;
        g.add_node(registry.role(static_cast<size_t>(choice)).name);
        if (i >= 2) {
            Var h_edge = model.initial_edge_hidden(t, h_node);
            int category = Model::kEdgeStart;
            for (int j = i - 1; j >= 1; --j) {
                h_edge = model.edge_step(t, h_edge, category);
                double logit = static_cast<double>(t.scalar(model.edge_logit(t, h_edge)));
                double p = 1.0 / (1.0 + std::exp(-logit));
                bool taken = policy.mode == DecodePolicy::Mode::greedy
                                 ? p >= policy.edge_threshold
                                 : rng.next_double() < p;
                step.edges.push_back(
                    {j, taken, taken ? log_sigmoid(logit) : log_one_minus_sigmoid(logit)});
                if (taken) g.add_edge(j, i);
                category = taken ? Model::kEdgePresent : Model::kEdgeAbsent;
            }
        }
        h_hist = model.history_step(t, h_hist, choice, registry);
        trace.steps.push_back(std::move(step));
    }

    finalize_total(trace);
    return {std::move(g), std::move(trace)};
}

double guided_log_prob(const Model& model, const TaskQuery& q, const RoleRegistry& registry,
                       const EmbeddingProvider& provider, const CollabGraph& graph,
                       const std::vector<int>& order, bool include_end) {
    const int n = graph.node_count();
    if (n < 1) throw ValidationError("guided_log_prob: graph has no nodes");
    if (n > model.config().n_max)
        throw CapacityError("guided_log_prob: graph has " + std::to_string(n) +
                            " nodes, model capacity is " + std::to_string(model.config().n_max));
    if (!is_topological(graph, order))
        throw ValidationError("guided_log_prob: order is not a topological order of the graph");

    Tape t;
    Model::RunCtx ctx = model.begin(t, q, registry, provider);
    const int end_index = ctx.role_count;
    const int model_n_max = model.config().n_max;

    // Teacher forcing walks the graph relabeled along `order`, mirroring the
    // decision sequence generate() would have produced.
    CollabGraph relabeled;
    Var h_hist = model.initial_history(t);
    Var h_node = model.initial_node_hidden(t);
    double total = 0.0;

    for (int p = 1; p <= n; ++p) {
        int orig = order[static_cast<size_t>(p) - 1];
        const std::string& role = graph.roles[static_cast<size_t>(orig) - 1];
        int ridx = registry.find(role);
        if (ridx < 0) throw LookupError("guided_log_prob: role '" + role + "' not in registry");

        Var f_edge = t.input(Model::edge_feature(relabeled, p, model_n_max));
        auto [f_cont, gate] = model.fuse_context(t, h_hist, ctx.f_q);
        (void)gate;
        h_node = model.node_step(t, f_cont, f_edge, h_node);
        Var scores = model.score_roles(t, h_node, ctx);
        total += log_softmax(t.value(scores).raw())[static_cast<size_t>(ridx)];

        relabeled.add_node(role);
        if (p >= 2) {
            Var h_edge = model.initial_edge_hidden(t, h_node);
            int category = Model::kEdgeStart;
            for (int j = p - 1; j >= 1; --j) {
                h_edge = model.edge_step(t, h_edge, category);
                double logit = static_cast<double>(t.scalar(model.edge_logit(t, h_edge)));
                bool present = graph.has_edge(order[static_cast<size_t>(j) - 1], orig);
                total += present ? log_sigmoid(logit) : log_one_minus_sigmoid(logit);
                if (present) relabeled.add_edge(j, p);
                category = present ? Model::kEdgePresent : Model::kEdgeAbsent;
            }
        }
        h_hist = model.history_step(t, h_hist, ridx, registry);
    }

    if (include_end) {
        Var f_edge = t.input(Model::edge_feature(relabeled, n + 1, model_n_max));
        auto [f_cont, gate] = model.fuse_context(t, h_hist, ctx.f_q);
        (void)gate;
        h_node = model.node_step(t, f_cont, f_edge, h_node);
        Var scores = model.score_roles(t, h_node, ctx);
        total += log_softmax(t.value(scores).raw())[static_cast<size_t>(end_index)];
    }
    return total;
}

}  // namespace topogen
