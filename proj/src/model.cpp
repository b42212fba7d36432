#include "topogen/model.hpp"

#include <cmath>

namespace topogen {

using nd::Array;
using nd::GruVars;
using nd::Tape;
using nd::Var;

void ModelConfig::validate() const {
    if (embed_dim < 1 || raw_dim < 1 || node_hidden < 1 || edge_hidden < 1 || metric_dim < 1)
        throw ConfigError("model config: all dimensions must be positive");
    if (n_max < 2) throw ConfigError("model config: n_max must be at least 2");
}

Model::Model(ModelConfig cfg, const RoleRegistry& registry, uint64_t seed)
    : config_(cfg) {
    config_.validate();
    if (registry.raw_dim() != config_.raw_dim)
        throw DimensionError("model: registry raw dim " + std::to_string(registry.raw_dim()) +
                             " != configured " + std::to_string(config_.raw_dim));
    create_params(registry, seed);
}

namespace {

// 9 arrays of one GRU cell: input weights [h x in], recurrent weights
// [h x h], biases [h]. Everything drawn with fan_in = hidden.
void create_gru(nd::ParamStore& p, const std::string& prefix, int in, int hidden, Rng& rng) {
    for (const char* gate : {"u", "r", "c"}) {
        p.create_uniform(prefix + ".w_" + gate, {hidden, in}, hidden, rng);
        p.create_uniform(prefix + ".u_" + gate, {hidden, hidden}, hidden, rng);
        p.create_uniform(prefix + ".b_" + gate, {hidden}, hidden, rng);
    }
}

// Two-layer MLP: in -> hidden (tanh) -> out. fan_in per layer.
void create_mlp(nd::ParamStore& p, const std::string& prefix, int in, int hidden, int out,
                Rng& rng) {
    p.create_uniform(prefix + ".w1", {hidden, in}, in, rng);
    p.create_uniform(prefix + ".b1", {hidden}, in, rng);
    p.create_uniform(prefix + ".w2", {out, hidden}, hidden, rng);
    p.create_uniform(prefix + ".b2", {out}, hidden, rng);
}

}  // namespace

void Model::create_params(const RoleRegistry& registry, uint64_t seed) {
    Rng rng(seed_for(seed, "model-init"));
    const int d = config_.embed_dim;
    const int dr = config_.raw_dim;
    const int dh = config_.node_hidden;
    const int de = config_.edge_hidden;
    const int dm = config_.metric_dim;
    const int edge_width = config_.n_max - 1;

    params_.create("task_ln.gamma", Array({dr}, 1.0f));
    params_.create("task_ln.beta", Array({dr}, 0.0f));
    params_.create_uniform("task_ffn.w", {d, dr}, dr, rng);
    params_.create_uniform("task_ffn.b", {d}, dr, rng);

    params_.create_uniform("h0_hist", {d}, d, rng);
    create_gru(params_, "gru_hist", dr, d, rng);

    create_mlp(params_, "mlp_node", d + edge_width, dh, dh, rng);
    create_gru(params_, "gru_node", dh, dh, rng);

    create_mlp(params_, "mlp_pred_n", dh, dm, dm, rng);
    create_mlp(params_, "mlp_role", dr, dm, dm, rng);
    params_.create("z_end", registry.end_embedding());

    create_mlp(params_, "mlp_node2edge", dh, de, de, rng);
    create_gru(params_, "gru_edge", 3, de, rng);
    create_mlp(params_, "mlp_pred_e", de, de, 1, rng);
}

GruVars Model::pull_gru(Tape& t, const std::string& prefix) const {
    GruVars g;
    g.w_u = t.param(params_, prefix + ".w_u");
    g.u_u = t.param(params_, prefix + ".u_u");
    g.b_u = t.param(params_, prefix + ".b_u");
    g.w_r = t.param(params_, prefix + ".w_r");
    g.u_r = t.param(params_, prefix + ".u_r");
    g.b_r = t.param(params_, prefix + ".b_r");
    g.w_c = t.param(params_, prefix + ".w_c");
    g.u_c = t.param(params_, prefix + ".u_c");
    g.b_c = t.param(params_, prefix + ".b_c");
    return g;
}

Var Model::apply_mlp(Tape& t, const MlpNames& m, Var x) const {
    Var h = t.tanh_act(t.linear(t.param(params_, m.w1), x, t.param(params_, m.b1)));
    return t.linear(t.param(params_, m.w2), h, t.param(params_, m.b2));
}

Var Model::apply_mlp_rows(Tape& t, const MlpNames& m, Var rows) const {
    Var h = t.tanh_act(t.affine_rows(t.param(params_, m.w1), rows, t.param(params_, m.b1)));
    return t.affine_rows(t.param(params_, m.w2), h, t.param(params_, m.b2));
}

Var Model::encode_task(Tape& t, const TaskQuery& q, const EmbeddingProvider& provider) const {
    Array raw;
    if (q.precomputed_embedding) {
        raw = *q.precomputed_embedding;
        if (raw.rank() != 1 || raw.dim(0) != config_.raw_dim)
            throw DimensionError("encode_task: precomputed embedding length != raw dim");
    } else {
        raw = provider.embed(q.text);
    }
    Var x = t.input(std::move(raw));
    Var normed = t.layer_norm(x, t.param(params_, "task_ln.gamma"), t.param(params_, "task_ln.beta"));
    return t.linear(t.param(params_, "task_ffn.w"), normed, t.param(params_, "task_ffn.b"));
}

Var Model::initial_history(Tape& t) const { return t.param(params_, "h0_hist"); }

Var Model::history_step(Tape& t, Var h_prev, int role_index, const RoleRegistry& registry) const {
    if (role_index < 0 || role_index >= static_cast<int>(registry.role_count()))
        throw LookupError("history_step: role index " + std::to_string(role_index) +
                          " outside registry of size " + std::to_string(registry.role_count()));
    Var x = t.input(registry.role(static_cast<size_t>(role_index)).base_embedding);
    return nd::gru_cell(t, pull_gru(t, "gru_hist"), x, h_prev);
}

Var Model::history_embed(Tape& t, const std::vector<int>& role_indices,
                         const RoleRegistry& registry) const {
    Var h = initial_history(t);
    for (int idx : role_indices) h = history_step(t, h, idx, registry);
    return h;
}

std::pair<Var, Var> Model::fuse_context(Tape& t, Var f_hist, Var f_q) const {
    float inv_sqrt_d = static_cast<float>(1.0 / std::sqrt(static_cast<double>(config_.embed_dim)));
    Var g = t.sigmoid(t.scale(t.dot(f_hist, f_q), inv_sqrt_d));
    Var one = t.input(Array({1}, 1.0f));
    return {t.add(t.scale_by(f_hist, t.sub(one, g)), t.scale_by(f_q, g)), g};
}

Array Model::edge_feature(const CollabGraph& prefix, int i, int n_max) {
    if (i < 1) throw InputError("edge_feature: step index must be >= 1");
    if (n_max < 2) throw InputError("edge_feature: n_max must be >= 2");
    if (i - 1 > n_max)
        throw CapacityError("edge_feature: node " + std::to_string(i - 1) +
                            " does not fit a width-" + std::to_string(n_max - 1) + " encoding");
    Array f({n_max - 1});
    if (i >= 3) {
        int prev = i - 1;
        for (int k : prefix.predecessors(prev))
            if (k < prev) f[static_cast<size_t>(k) - 1] = 1.0f;
    }
    return f;
}

Var Model::initial_node_hidden(Tape& t) const {
    return t.input(Array({config_.node_hidden}));
}

Var Model::node_step(Tape& t, Var f_cont, Var f_edge, Var h_prev) const {
    Var x = t.concat(f_cont, f_edge);
    Var m = apply_mlp(t, {"mlp_node.w1", "mlp_node.b1", "mlp_node.w2", "mlp_node.b2"}, x);
    return nd::gru_cell(t, pull_gru(t, "gru_node"), m, h_prev);
}

Model::RunCtx Model::begin(Tape& t, const TaskQuery& q, const RoleRegistry& registry,
                           const EmbeddingProvider& provider) const {
    if (registry.raw_dim() != config_.raw_dim)
        throw DimensionError("model run: registry raw dim != configured raw dim");
    RunCtx ctx;
    ctx.f_q = encode_task(t, q, provider);
    ctx.role_count = static_cast<int>(registry.role_count());
    if (ctx.role_count > 0) {
        Array z({ctx.role_count, config_.raw_dim});
        for (int k = 0; k < ctx.role_count; ++k) {
            const Array& row = registry.role(static_cast<size_t>(k)).base_embedding;
            for (int c = 0; c < config_.raw_dim; ++c)
                z.at(k, c) = row[static_cast<size_t>(c)];
        }
        ctx.projected_roles = apply_mlp_rows(
            t, {"mlp_role.w1", "mlp_role.b1", "mlp_role.w2", "mlp_role.b2"}, t.input(std::move(z)));
    }
    ctx.projected_end = apply_mlp(t, {"mlp_role.w1", "mlp_role.b1", "mlp_role.w2", "mlp_role.b2"},
                                  t.param(params_, "z_end"));
    return ctx;
}

Var Model::score_roles(Tape& t, Var h_node, const RunCtx& ctx) const {
    Var intent =
        apply_mlp(t, {"mlp_pred_n.w1", "mlp_pred_n.b1", "mlp_pred_n.w2", "mlp_pred_n.b2"}, h_node);
    Var end_score = t.dot(ctx.projected_end, intent);
    if (ctx.role_count == 0) return end_score;
    return t.concat(t.matvec(*ctx.projected_roles, intent), end_score);
}

Var Model::initial_edge_hidden(Tape& t, Var h_node) const {
    return apply_mlp(
        t, {"mlp_node2edge.w1", "mlp_node2edge.b1", "mlp_node2edge.w2", "mlp_node2edge.b2"},
        h_node);
}

Var Model::edge_step(Tape& t, Var h_prev, int category) const {
    if (category < 0 || category > 2) throw InputError("edge_step: category must be 0, 1 or 2");
    Array onehot({3});
    onehot[static_cast<size_t>(category)] = 1.0f;
    return nd::gru_cell(t, pull_gru(t, "gru_edge"), t.input(std::move(onehot)), h_prev);
}

Var Model::edge_logit(Tape& t, Var h_edge) const {
    return apply_mlp(t, {"mlp_pred_e.w1", "mlp_pred_e.b1", "mlp_pred_e.w2", "mlp_pred_e.b2"},
                     h_edge);
}

}  // namespace topogen
