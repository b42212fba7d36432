#include "topogen/training.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "topogen/io_util.hpp"

namespace topogen {

using nd::Array;
using nd::GradMap;
using nd::Tape;
using nd::Var;

std::string to_string(TrainPhase p) {
    return p == TrainPhase::cold_start ? "cold-start" : "fine-tune";
}

void TrainConfig::validate() const {
    if (alpha < 0.0f || alpha > 1.0f) throw ConfigError("train config: alpha must lie in [0, 1]");
    if (lr_phase1 < 0.0f || lr_phase2 < 0.0f)
        throw ConfigError("train config: learning rates must be non-negative");
    if (lr_phase2 > lr_phase1)
        throw ConfigError("train config: phase-2 learning rate must not exceed phase 1");
    if (epochs_phase1 < 0 || epochs_phase2 < 0)
        throw ConfigError("train config: epoch counts must be non-negative");
    if (batch_size < 1) throw ConfigError("train config: batch size must be >= 1");
    if (clip_norm < 0.0f) throw ConfigError("train config: clip norm must be non-negative");
    if (stop_loss < 0.0f) throw ConfigError("train config: stop loss must be non-negative");
}

LossParts example_loss(const Model& model, Tape& t, const TrainingExample& ex,
                       const RoleRegistry& registry, const EmbeddingProvider& provider,
                       float alpha) {
    const CollabGraph& graph = ex.graph;
    const int n = graph.node_count();
    if (n < 1) throw ValidationError("example_loss: graph has no nodes");
    if (n > model.config().n_max)
        throw CapacityError("example_loss: graph has " + std::to_string(n) +
                            " nodes, model capacity is " + std::to_string(model.config().n_max));

    Model::RunCtx ctx = model.begin(t, ex.query, registry, provider);
    const int end_index = ctx.role_count;
    const int model_n_max = model.config().n_max;
    std::vector<int> order = canonical_order(graph);

    CollabGraph relabeled;
    Var h_hist = model.initial_history(t);
    Var h_node = model.initial_node_hidden(t);
    Var l_node;
    Var l_edge;
    bool have_edge_loss = false;

    for (int p = 1; p <= n + 1; ++p) {
        const bool is_end_step = p == n + 1;
        int ridx = end_index;
        if (!is_end_step) {
            int orig = order[static_cast<size_t>(p) - 1];
            const std::string& role = graph.roles[static_cast<size_t>(orig) - 1];
            ridx = registry.find(role);
            if (ridx < 0)
                throw LookupError("example_loss: role '" + role + "' not in registry (query: " +
                                  ex.query.text + ")");
        }

        Var f_edge = t.input(Model::edge_feature(relabeled, p, model_n_max));
        auto [f_cont, gate] = model.fuse_context(t, h_hist, ctx.f_q);
        (void)gate;
        h_node = model.node_step(t, f_cont, f_edge, h_node);
        Var scores = model.score_roles(t, h_node, ctx);
        Var nll = t.cross_entropy(scores, ridx);
        l_node = p == 1 ? nll : t.add(l_node, nll);
        if (is_end_step) break;

        int orig = order[static_cast<size_t>(p) - 1];
        relabeled.add_node(graph.roles[static_cast<size_t>(orig) - 1]);
        if (p >= 2) {
            Var h_edge = model.initial_edge_hidden(t, h_node);
            int category = Model::kEdgeStart;
            for (int j = p - 1; j >= 1; --j) {
                h_edge = model.edge_step(t, h_edge, category);
                Var logit = model.edge_logit(t, h_edge);
                bool present = graph.has_edge(order[static_cast<size_t>(j) - 1], orig);
                Var nle = t.bce_logit(logit, present ? 1 : 0);
                l_edge = have_edge_loss ? t.add(l_edge, nle) : nle;
                have_edge_loss = true;
                if (present) relabeled.add_edge(j, p);
                category = present ? Model::kEdgePresent : Model::kEdgeAbsent;
            }
        }
        h_hist = model.history_step(t, h_hist, ridx, registry);
    }

    if (!have_edge_loss) l_edge = t.input(Array({1}, 0.0f));  // single-node graph
    LossParts parts;
    parts.node = l_node;
    parts.edge = l_edge;
    parts.total = t.add_scaled(l_node, alpha, l_edge, 1.0f - alpha);
    return parts;
}

namespace {

// Mean over per-example grads, in place.
void accumulate(GradMap& into, const GradMap& grads) {
    for (auto& [name, acc] : into) {
        auto it = grads.find(name);
        if (it == grads.end()) continue;  // example did not touch this leaf
        const Array& g = it->second;
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }
}

void scale_grads(GradMap& grads, float factor) {
    for (auto& [name, g] : grads) {
        (void)name;
        for (size_t i = 0; i < g.size(); ++i) g[i] *= factor;
    }
}

double global_norm(const GradMap& grads) {
    double sq = 0.0;
    for (const auto& [name, g] : grads) {
        (void)name;
        for (size_t i = 0; i < g.size(); ++i)
            sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
    }
    return std::sqrt(sq);
}

}  // namespace

TrainReport train_phase(Model& model, const std::vector<TrainingExample>& dataset,
                        const TrainConfig& cfg, TrainPhase phase, const RoleRegistry& registry,
                        const EmbeddingProvider& provider) {
    cfg.validate();
    if (dataset.empty()) throw InputError("train_phase: dataset is empty");

    const float lr = phase == TrainPhase::cold_start ? cfg.lr_phase1 : cfg.lr_phase2;
    const int epochs = phase == TrainPhase::cold_start ? cfg.epochs_phase1 : cfg.epochs_phase2;
    Rng shuffle_rng(seed_for(cfg.seed, "train-" + to_string(phase)));

    TrainReport report;
    auto started = std::chrono::steady_clock::now();

    std::vector<size_t> indices(dataset.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle_rng.shuffle(indices);
        EpochStats stats;
        for (size_t start = 0; start < indices.size(); start += static_cast<size_t>(cfg.batch_size)) {
            size_t stop = std::min(indices.size(), start + static_cast<size_t>(cfg.batch_size));
            GradMap batch_grads = model.params().zero_grads();
            for (size_t b = start; b < stop; ++b) {
                size_t idx = indices[b];
                Tape t;
                LossParts parts =
                    example_loss(model, t, dataset[idx], registry, provider, cfg.alpha);
                float total = t.scalar(parts.total);
                if (!std::isfinite(total))
                    throw NumericError("train_phase: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", example " + std::to_string(idx) +
                                       " (query: " + dataset[idx].query.text + ")");
                stats.mean_total += total;
                stats.mean_node += t.scalar(parts.node);
                stats.mean_edge += t.scalar(parts.edge);
                accumulate(batch_grads, t.backward(parts.total));
            }
            scale_grads(batch_grads, 1.0f / static_cast<float>(stop - start));
            if (cfg.clip_norm > 0.0f) {
                double norm = global_norm(batch_grads);
                if (norm > static_cast<double>(cfg.clip_norm))
                    scale_grads(batch_grads,
                                static_cast<float>(static_cast<double>(cfg.clip_norm) / norm));
            }
            model.params().adam_step(batch_grads, lr);
        }
        stats.mean_total /= static_cast<double>(dataset.size());
        stats.mean_node /= static_cast<double>(dataset.size());
        stats.mean_edge /= static_cast<double>(dataset.size());
        report.epochs.push_back(stats);
        if (cfg.stop_loss > 0.0f && stats.mean_total < static_cast<double>(cfg.stop_loss)) break;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

EvalSummary evaluate(const Model& model, const std::vector<TrainingExample>& dataset,
                     const RoleRegistry& registry, const EmbeddingProvider& provider) {
    if (dataset.empty()) throw InputError("evaluate: dataset is empty");
    EvalSummary summary;
    for (const auto& ex : dataset) {
        double lp = guided_log_prob(model, ex.query, registry, provider, ex.graph,
                                    canonical_order(ex.graph));
        summary.mean_log_prob += lp;
        summary.mean_by_source[ex.source] += lp;
        summary.count_by_source[ex.source] += 1;
    }
    summary.mean_log_prob /= static_cast<double>(dataset.size());
    for (auto& [source, total] : summary.mean_by_source)
        total /= static_cast<double>(summary.count_by_source[source]);
    return summary;
}

// --- checkpointing ---------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian; add byte swapping for this platform");

namespace {

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::string& base_path, const Model& model,
                     const RoleRegistry& registry) {
    const ModelConfig& cfg = model.config();
    nlohmann::json manifest{
        {"format_version", 1},
        {"model",
         {{"embed_dim", cfg.embed_dim},
          {"raw_dim", cfg.raw_dim},
          {"node_hidden", cfg.node_hidden},
          {"edge_hidden", cfg.edge_hidden},
          {"metric_dim", cfg.metric_dim},
          {"n_max", cfg.n_max}}},
        {"registry",
         {{"role_count", registry.role_count()},
          {"fingerprint", hex64(registry.fingerprint(registry.role_count()))}}}};

    nlohmann::json params = nlohmann::json::array();
    std::string payload;
    for (const std::string& name : model.params().names()) {
        const Array& value = model.params().at(name);
        params.push_back({{"name", name}, {"shape", value.shape()}});
        payload.append(reinterpret_cast<const char*>(value.data()),
                       value.size() * sizeof(float));
    }
    manifest["params"] = std::move(params);

    write_file_atomic(base_path + ".json", manifest.dump(2) + "\n");
    write_file_atomic(base_path + ".bin", payload);
}

Model load_checkpoint(const std::string& base_path, const RoleRegistry& registry) {
    nlohmann::json manifest = nlohmann::json::parse(read_file(base_path + ".json"), nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object())
        throw ValidationError("checkpoint: unreadable manifest " + base_path + ".json");
    if (manifest.value("format_version", 0) != 1)
        throw ValidationError("checkpoint: unsupported format version");

    const auto& mj = manifest.at("model");
    ModelConfig cfg;
    cfg.embed_dim = mj.at("embed_dim").get<int>();
    cfg.raw_dim = mj.at("raw_dim").get<int>();
    cfg.node_hidden = mj.at("node_hidden").get<int>();
    cfg.edge_hidden = mj.at("edge_hidden").get<int>();
    cfg.metric_dim = mj.at("metric_dim").get<int>();
    cfg.n_max = mj.at("n_max").get<int>();

    const auto& rj = manifest.at("registry");
    size_t role_count = rj.at("role_count").get<size_t>();
    std::string fingerprint = rj.at("fingerprint").get<std::string>();
    if (registry.role_count() < role_count)
        throw ConflictError("checkpoint: registry has " + std::to_string(registry.role_count()) +
                            " roles, checkpoint expects at least " + std::to_string(role_count));
    if (hex64(registry.fingerprint(role_count)) != fingerprint)
        throw ConflictError(
            "checkpoint: role pool does not match the one this checkpoint was trained on");

    Model model(cfg, registry, /*seed=*/0);
    const auto& pj = manifest.at("params");
    if (pj.size() != model.params().count())
        throw ValidationError("checkpoint: parameter list does not match the model layout");

    std::string payload = read_file(base_path + ".bin");
    size_t offset = 0;
    size_t i = 0;
    for (const std::string& name : model.params().names()) {
        const auto& entry = pj.at(i++);
        if (entry.at("name").get<std::string>() != name)
            throw ValidationError("checkpoint: parameter order mismatch at '" + name + "'");
        Array& value = model.params().at(name);
        if (entry.at("shape").get<std::vector<int>>() != value.shape())
            throw ValidationError("checkpoint: shape mismatch for '" + name + "'");
        size_t bytes = value.size() * sizeof(float);
        if (offset + bytes > payload.size())
            throw ValidationError("checkpoint: payload shorter than manifest promises");
        std::memcpy(value.data(), payload.data() + offset, bytes);
        offset += bytes;
    }
    if (offset != payload.size())
        throw ValidationError("checkpoint: payload longer than manifest promises");
    model.params().reset_optimizer();
    return model;
}

void write_train_report(const std::string& path, const TrainReport& report) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : report.epochs)
        epochs.push_back({{"mean_total", e.mean_total},
                          {"mean_node", e.mean_node},
                          {"mean_edge", e.mean_edge}});
    nlohmann::json j{{"epochs", std::move(epochs)},
                     {"final_mean_total", report.final_mean_total()},
                     {"wall_seconds", report.wall_seconds},
                     {"checkpoint", report.checkpoint_path}};
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace topogen
