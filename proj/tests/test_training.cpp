#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "topogen/errors.hpp"
#include "topogen/generator.hpp"
#include "topogen/io_util.hpp"
#include "topogen/training.hpp"

#include <json.hpp>

using namespace topogen;
using nd::Array;

namespace {

const std::vector<std::pair<std::string, std::string>> kRoles = {
    {"Planner", "Breaks the task into steps."},
    {"Coder", "Writes program code."},
    {"Reviewer", "Checks output for errors."},
};

ModelConfig tiny_cfg() {
    ModelConfig c;
    c.embed_dim = c.raw_dim = 16;
    c.node_hidden = c.edge_hidden = c.metric_dim = 16;
    c.n_max = 4;
    return c;
}

struct Fixture {
    HashedEmbedding provider{16};
    RoleRegistry registry;
    Model model;

    explicit Fixture(uint64_t seed = 5)
        : registry(RoleRegistry::create(kRoles, provider, 1)), model(tiny_cfg(), registry, seed) {}

    void force_uniform() {
        for (const char* name : {"mlp_role.w2", "mlp_role.b2", "mlp_pred_e.w2", "mlp_pred_e.b2"})
            for (float& v : model.params().at(name).raw()) v = 0.0f;
    }
};

TrainingExample chain_example(const std::string& query) {
    TrainingExample ex;
    ex.query = TaskQuery(query);
    ex.graph.add_node("Planner");
    ex.graph.add_node("Coder");
    ex.graph.add_node("Reviewer");
    ex.graph.add_edge(1, 2);
    ex.graph.add_edge(2, 3);
    ex.source = "exp";
    return ex;
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("example_loss: uniform-forced closed form") {
    Fixture f;
    f.force_uniform();
    TrainingExample ex = chain_example("closed form");

    nd::Tape t;
    LossParts parts = example_loss(f.model, t, ex, f.registry, f.provider, 0.2f);
    // N = 3 picks plus END, uniform over 4 outcomes; 3 Bernoulli slots
    double l_node = 4.0 * std::log(4.0);
    double l_edge = 3.0 * std::log(2.0);
    CHECK(t.scalar(parts.node) == doctest::Approx(l_node).epsilon(1e-6));
    CHECK(t.scalar(parts.edge) == doctest::Approx(l_edge).epsilon(1e-6));
    CHECK(t.scalar(parts.total) ==
          doctest::Approx(0.2 * l_node + 0.8 * l_edge).epsilon(1e-6));
}

TEST_CASE("example_loss: alpha 1 keeps only the node term") {
    Fixture f;
    TrainingExample ex = chain_example("alpha one");
    nd::Tape t;
    LossParts parts = example_loss(f.model, t, ex, f.registry, f.provider, 1.0f);
    CHECK(t.scalar(parts.total) == t.scalar(parts.node));

    nd::GradMap grads = t.backward(parts.total);
    // edge-head parameters see zero gradient when the edge loss has no weight
    for (const char* name : {"mlp_pred_e.w1", "mlp_pred_e.b1", "mlp_pred_e.w2", "mlp_pred_e.b2"})
        for (float g : grads.at(name).raw()) CHECK(g == 0.0f);
    // while the role head still learns
    double role_norm = 0;
    for (float g : grads.at("mlp_role.w1").raw()) role_norm += std::abs(g);
    CHECK(role_norm > 0.0);
}

TEST_CASE("example_loss: oversized graphs are rejected upfront") {
    Fixture f;
    TrainingExample ex;
    ex.query = TaskQuery("too big");
    for (int i = 0; i < 5; ++i) ex.graph.add_node("Coder");  // n_max is 4
    nd::Tape t;
    CHECK_THROWS_AS(example_loss(f.model, t, ex, f.registry, f.provider, 0.2f), CapacityError);
}

TEST_CASE("train_phase: learning rate zero leaves parameters bitwise unchanged") {
    Fixture f;
    std::vector<std::vector<float>> before;
    for (const std::string& name : f.model.params().names())
        before.push_back(f.model.params().at(name).raw());

    TrainConfig cfg;
    cfg.lr_phase1 = 0.0f;
    cfg.lr_phase2 = 0.0f;
    cfg.epochs_phase1 = 3;
    cfg.seed = 9;
    // lr ordering only matters when both are positive
    train_phase(f.model, {chain_example("frozen")}, cfg, TrainPhase::cold_start, f.registry,
                f.provider);
    size_t i = 0;
    for (const std::string& name : f.model.params().names())
        CHECK(f.model.params().at(name).raw() == before[i++]);
}

TEST_CASE("train_phase: same seed gives bitwise-identical checkpoints") {
    TrainConfig cfg;
    cfg.epochs_phase1 = 5;
    cfg.batch_size = 2;
    cfg.seed = 17;
    std::vector<TrainingExample> data = {chain_example("one"), chain_example("two"),
                                         chain_example("three")};

    std::string base_a = "/tmp/topogen_ck_a", base_b = "/tmp/topogen_ck_b";
    for (const std::string& base : {base_a, base_b}) {
        Fixture f(33);
        train_phase(f.model, data, cfg, TrainPhase::cold_start, f.registry, f.provider);
        save_checkpoint(base, f.model, f.registry);
    }
    CHECK(read_all(base_a + ".bin") == read_all(base_b + ".bin"));
    CHECK(read_all(base_a + ".json") == read_all(base_b + ".json"));
    for (const std::string& base : {base_a, base_b}) {
        std::remove((base + ".bin").c_str());
        std::remove((base + ".json").c_str());
    }
}

TEST_CASE("train_phase: training reduces the loss on a small dataset") {
    Fixture f(21);
    std::vector<TrainingExample> data = {chain_example("reduce the loss")};
    TrainConfig cfg;
    cfg.lr_phase1 = 0.01f;
    cfg.lr_phase2 = 0.002f;
    cfg.epochs_phase1 = 60;
    cfg.batch_size = 1;
    cfg.seed = 2;
    TrainReport rep = train_phase(f.model, data, cfg, TrainPhase::cold_start, f.registry,
                                  f.provider);
    REQUIRE(rep.epochs.size() == 60);
    CHECK(rep.epochs.back().mean_total < rep.epochs.front().mean_total);
    CHECK(rep.wall_seconds > 0.0);
}

TEST_CASE("train_phase: stop_loss ends the run early") {
    Fixture f(21);
    TrainConfig cfg;
    cfg.lr_phase1 = 0.01f;
    cfg.lr_phase2 = 0.002f;
    cfg.epochs_phase1 = 500;
    cfg.batch_size = 1;
    cfg.stop_loss = 1.0f;
    cfg.seed = 2;
    TrainReport rep = train_phase(f.model, {chain_example("stop early")}, cfg,
                                  TrainPhase::cold_start, f.registry, f.provider);
    CHECK(rep.epochs.size() < 500);
    CHECK(rep.final_mean_total() < 1.0);
}

TEST_CASE("train_phase: non-finite loss names the offending example") {
    Fixture f;
    f.model.params().at("task_ffn.w")[0] = std::numeric_limits<float>::quiet_NaN();
    TrainConfig cfg;
    cfg.epochs_phase1 = 1;
    cfg.seed = 1;
    try {
        train_phase(f.model, {chain_example("the poisoned one")}, cfg, TrainPhase::cold_start,
                    f.registry, f.provider);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("the poisoned one") != std::string::npos);
    }
}

TEST_CASE("train_phase: phase selects epochs and learning rate") {
    TrainConfig cfg;
    cfg.epochs_phase1 = 4;
    cfg.epochs_phase2 = 2;
    cfg.seed = 3;
    Fixture f(5);
    TrainReport p2 = train_phase(f.model, {chain_example("fine tune")}, cfg, TrainPhase::fine_tune,
                                 f.registry, f.provider);
    CHECK(p2.epochs.size() == 2);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.lr_phase2 = cfg.lr_phase1 * 2.0f;  // fine-tune rate may not exceed phase 1
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.lr_phase1 = -1e-3f;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.alpha = 1.5f;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.epochs_phase1 = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("evaluate: single example equals its guided log prob") {
    Fixture f;
    TrainingExample ex = chain_example("evaluate me");
    EvalSummary s = evaluate(f.model, {ex}, f.registry, f.provider);
    double direct = guided_log_prob(f.model, ex.query, f.registry, f.provider, ex.graph,
                                    canonical_order(ex.graph), true);
    CHECK(s.mean_log_prob == doctest::Approx(direct).epsilon(1e-12));
    CHECK(s.mean_log_prob <= 0.0);
    CHECK(s.count_by_source.at("exp") == 1);
}

TEST_CASE("evaluate: uniform-forced model matches the loss closed form") {
    Fixture f;
    f.force_uniform();
    TrainingExample ex = chain_example("uniform eval");
    EvalSummary s = evaluate(f.model, {ex}, f.registry, f.provider);
    CHECK(s.mean_log_prob == doctest::Approx(-(4.0 * std::log(4.0) + 3.0 * std::log(2.0)))
                                 .epsilon(1e-9));
}

TEST_CASE("checkpoints: round trip restores every parameter bitwise") {
    Fixture f(41);
    std::string base = "/tmp/topogen_ck_rt";
    save_checkpoint(base, f.model, f.registry);
    Model back = load_checkpoint(base, f.registry);
    CHECK(back.config().n_max == f.model.config().n_max);
    for (const std::string& name : f.model.params().names())
        CHECK(back.params().at(name).raw() == f.model.params().at(name).raw());
    CHECK(back.params().step_count() == 0);  // fresh optimizer

    // scoring agrees end to end
    TrainingExample ex = chain_example("after reload");
    double a = guided_log_prob(f.model, ex.query, f.registry, f.provider, ex.graph, {1, 2, 3},
                               true);
    double b = guided_log_prob(back, ex.query, f.registry, f.provider, ex.graph, {1, 2, 3}, true);
    CHECK(a == b);
    std::remove((base + ".json").c_str());
    std::remove((base + ".bin").c_str());
}

TEST_CASE("checkpoints: extended registries load, reordered ones do not") {
    Fixture f(43);
    std::string base = "/tmp/topogen_ck_ext";
    save_checkpoint(base, f.model, f.registry);

    RoleRegistry wider = f.registry.extended({{"Lawyer", "Provides legal analysis."}}, f.provider);
    CHECK_NOTHROW(load_checkpoint(base, wider));

    RoleRegistry other = RoleRegistry::create(
        {{"Coder", "Writes program code."}, {"Planner", "Breaks the task into steps."}},
        f.provider, 1);
    CHECK_THROWS_AS(load_checkpoint(base, other), ConflictError);

    RoleRegistry fewer = RoleRegistry::create({{"Planner", "Breaks the task into steps."}},
                                              f.provider, 1);
    CHECK_THROWS_AS(load_checkpoint(base, fewer), ConflictError);
    std::remove((base + ".json").c_str());
    std::remove((base + ".bin").c_str());
}

TEST_CASE("checkpoints: corrupt payloads are rejected") {
    Fixture f(47);
    std::string base = "/tmp/topogen_ck_bad";
    save_checkpoint(base, f.model, f.registry);
    std::string bin = read_all(base + ".bin");
    write_file_atomic(base + ".bin", bin.substr(0, bin.size() - 8));
    CHECK_THROWS_AS(load_checkpoint(base, f.registry), ValidationError);
    std::remove((base + ".json").c_str());
    std::remove((base + ".bin").c_str());
    CHECK_THROWS_AS(load_checkpoint(base, f.registry), IoError);
}

TEST_CASE("train report file carries the loss curve") {
    TrainReport rep;
    rep.epochs = {{2.0, 1.5, 0.5}, {1.0, 0.7, 0.3}};
    rep.wall_seconds = 1.25;
    rep.checkpoint_path = "somewhere/cold-start";
    std::string path = "/tmp/topogen_report.json";
    write_train_report(path, rep);
    nlohmann::json j = nlohmann::json::parse(read_all(path));
    CHECK(j["epochs"].size() == 2);
    CHECK(j["epochs"][1]["mean_total"].get<double>() == doctest::Approx(1.0));
    CHECK(j["final_mean_total"].get<double>() == doctest::Approx(1.0));
    CHECK(j["checkpoint"] == "somewhere/cold-start");
    std::remove(path.c_str());
}
