#pragma once

#include <map>
#include <string>
#include <vector>

#include "topogen/curriculum.hpp"
#include "topogen/generator.hpp"

namespace topogen {

enum class TrainPhase { cold_start, fine_tune };
std::string to_string(TrainPhase p);

struct TrainConfig {
    float alpha = 0.2f;  // node-loss weight in alpha*L_node + (1-alpha)*L_edge
    float lr_phase1 = 1e-3f;
    float lr_phase2 = 2e-4f;
    int epochs_phase1 = 300;
    int epochs_phase2 = 150;
    int batch_size = 8;
    uint64_t seed = 0;
    float clip_norm = 5.0f;  // global gradient-norm clip; 0 disables
    float stop_loss = 0.0f;  // stop early once epoch mean total drops below; 0 disables

    void validate() const;
};

struct EpochStats {
    double mean_total = 0.0;
    double mean_node = 0.0;
    double mean_edge = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double wall_seconds = 0.0;
    std::string checkpoint_path;

    double final_mean_total() const {
        return epochs.empty() ? 0.0 : epochs.back().mean_total;
    }
};

// Teacher-forced losses for one example on the caller's tape, linearized in
// canonical order. L_node covers every role pick plus the terminal END;
// L_edge covers every incoming-edge slot; both are sums over steps.
struct LossParts {
    nd::Var total;
    nd::Var node;
    nd::Var edge;
};
LossParts example_loss(const Model& model, nd::Tape& t, const TrainingExample& ex,
                       const RoleRegistry& registry, const EmbeddingProvider& provider,
                       float alpha);

// Seeded mini-batch Adam over the dataset; deterministic given (model,
// dataset, cfg, phase). Throws NumericError naming the offending example on
// a non-finite loss.
TrainReport train_phase(Model& model, const std::vector<TrainingExample>& dataset,
                        const TrainConfig& cfg, TrainPhase phase, const RoleRegistry& registry,
                        const EmbeddingProvider& provider);

struct EvalSummary {
    double mean_log_prob = 0.0;
    std::map<std::string, double> mean_by_source;
    std::map<std::string, int> count_by_source;
};
EvalSummary evaluate(const Model& model, const std::vector<TrainingExample>& dataset,
                     const RoleRegistry& registry, const EmbeddingProvider& provider);

// Checkpoint = <base>.json manifest (format version, model config, named
// parameter shapes, registry prefix fingerprint) + <base>.bin payload of
// little-endian float32 in manifest order.
void save_checkpoint(const std::string& base_path, const Model& model,
                     const RoleRegistry& registry);
// Rebuilds the model against `registry`, which must contain the manifest's
// role prefix (extensions beyond it are fine). Optimizer state starts fresh.
Model load_checkpoint(const std::string& base_path, const RoleRegistry& registry);

void write_train_report(const std::string& path, const TrainReport& report);

}  // namespace topogen
