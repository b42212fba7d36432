#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topogen/graph.hpp"
#include "topogen/param_store.hpp"
#include "topogen/registry.hpp"
#include "topogen/tape.hpp"

namespace topogen {

// Sizes of the generator networks. raw_dim must match the embedding
// provider; embed_dim is the fused context width; n_max bounds graph size
// and fixes the edge-feature width at n_max - 1.
struct ModelConfig {
    int embed_dim = 384;
    int raw_dim = 384;
    int node_hidden = 256;
    int edge_hidden = 256;
    int metric_dim = 256;
    int n_max = 10;

    void validate() const;
};

// The autoregressive generator: a task encoder, a role-history GRU with
// gated query fusion, a node-state GRU, a metric-learning role head, and an
// edge-decision GRU. Methods build forward graphs on a caller-owned Tape so
// the same code path serves generation, scoring, and training.
//
// Role base embeddings stay frozen in the registry; only the projections
// (and the END embedding) train, which is what lets the role pool grow
// without touching learned weights.
class Model {
public:
    Model(ModelConfig cfg, const RoleRegistry& registry, uint64_t seed);

    const ModelConfig& config() const { return config_; }
    nd::ParamStore& params() { return params_; }
    const nd::ParamStore& params() const { return params_; }

    // Per-tape cache: the encoded query and the projected role matrix are
    // built once and reused across every step of one generation or loss.
    struct RunCtx {
        nd::Var f_q;
        std::optional<nd::Var> projected_roles;  // [K x metric_dim]; absent when K = 0
        nd::Var projected_end;                   // [metric_dim]
        int role_count = 0;
    };
    RunCtx begin(nd::Tape& t, const TaskQuery& q, const RoleRegistry& registry,
                 const EmbeddingProvider& provider) const;

    // f_Q = FFN(LN(provider(q))); uses the precomputed embedding when present.
    nd::Var encode_task(nd::Tape& t, const TaskQuery& q, const EmbeddingProvider& provider) const;

    // Trainable stand-in for the history state before any role is chosen.
    nd::Var initial_history(nd::Tape& t) const;
    // One history-GRU step consuming a role's base embedding.
    nd::Var history_step(nd::Tape& t, nd::Var h_prev, int role_index,
                         const RoleRegistry& registry) const;
    // Full history fold; empty sequence returns initial_history.
    nd::Var history_embed(nd::Tape& t, const std::vector<int>& role_indices,
                          const RoleRegistry& registry) const;

    // g = sigmoid(f_hist . f_q / sqrt(d)); f_cont = (1-g) f_hist + g f_q.
    std::pair<nd::Var, nd::Var> fuse_context(nd::Tape& t, nd::Var f_hist, nd::Var f_q) const;

    // Binary incoming-adjacency of node i-1, width n_max-1; all-zero for
    // i <= 2. Throws CapacityError when i-1 > n_max.
    static nd::Array edge_feature(const CollabGraph& prefix, int i, int n_max);

    nd::Var initial_node_hidden(nd::Tape& t) const;  // zeros
    // h' = GRU_node(MLP_node([f_cont; f_edge]), h_prev).
    nd::Var node_step(nd::Tape& t, nd::Var f_cont, nd::Var f_edge, nd::Var h_prev) const;

    // Scores over [roles..., END]; length role_count + 1. Row k depends only
    // on role k's frozen embedding and the shared projections, so appending
    // registry rows leaves earlier scores bitwise unchanged.
    nd::Var score_roles(nd::Tape& t, nd::Var h_node, const RunCtx& ctx) const;

    nd::Var initial_edge_hidden(nd::Tape& t, nd::Var h_node) const;  // MLP_node2edge
    // Previous-decision categories fed to the edge GRU.
    enum EdgeCategory { kEdgeStart = 0, kEdgeAbsent = 1, kEdgePresent = 2 };
    nd::Var edge_step(nd::Tape& t, nd::Var h_prev, int category) const;
    nd::Var edge_logit(nd::Tape& t, nd::Var h_edge) const;  // scalar, pre-sigmoid

private:
    struct MlpNames {
        std::string w1, b1, w2, b2;
    };

    void create_params(const RoleRegistry& registry, uint64_t seed);
    nd::GruVars pull_gru(nd::Tape& t, const std::string& prefix) const;
    nd::Var apply_mlp(nd::Tape& t, const MlpNames& m, nd::Var x) const;
    nd::Var apply_mlp_rows(nd::Tape& t, const MlpNames& m, nd::Var rows) const;

    ModelConfig config_;
    nd::ParamStore params_;
};

}  // namespace topogen
