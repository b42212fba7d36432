// Command-line front end: data synthesis, two-phase training, graph
// generation, execution against a mock or remote backend, evaluation, DOT
// export, and role-pool extension. One JSON config file supplies defaults;
// flags override per invocation. Every stochastic step derives its seed from
// the root seed via a fixed label, so reruns are byte-identical.

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topogen/curriculum.hpp"
#include "topogen/generator.hpp"
#include "topogen/io_util.hpp"
#include "topogen/runtime.hpp"
#include "topogen/training.hpp"

namespace {

using namespace topogen;

// ---------------------------------------------------------------------------
// configuration

struct RunConfig {
    uint64_t seed = 0;
    std::string role_pool;
    std::string task_suite;

    std::string embedding_mode = "hashed";  // hashed | file
    int embedding_dim = 384;
    std::string embedding_file;

    ModelConfig model;
    TrainConfig train;

    std::string decode_mode = "greedy";  // greedy | sample
    double temperature = 1.0;
    double edge_threshold = 0.5;
    int decode_n_max = 10;
    int generate_retries = 8;

    std::vector<ConfigBlueprint> complex_configs;
    std::vector<ConfigBlueprint> simple_configs;
    double replay_fraction = 0.25;
    std::string exploration_out = "d_exp.jsonl";
    std::string efficiency_out = "d_eff.jsonl";

    int rounds = 3;
    std::string strategy = "summarizer";
    int terminal_node = 0;

    std::string backend_mode = "mock";  // mock | remote
    RemoteConfig remote;

    std::string eval_out = "eval_report.json";
    int baseline_agent_num = 4;

    std::string checkpoint_dir = "checkpoints";
    std::string report_dir = "reports";
};

std::vector<ConfigBlueprint> blueprints_from(const nlohmann::json& arr, const char* what) {
    if (!arr.is_array()) throw ConfigError(std::string("config: ") + what + " must be an array");
    std::vector<ConfigBlueprint> out;
    for (const auto& el : arr) out.push_back(blueprint_from_json_text(el.dump()));
    return out;
}

RunConfig load_config(const std::string& path) {
    RunConfig rc;
    if (path.empty()) return rc;
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("config: " + path + " is not a JSON object");

    rc.seed = j.value("seed", rc.seed);
    rc.role_pool = j.value("role_pool", rc.role_pool);
    rc.task_suite = j.value("task_suite", rc.task_suite);

    if (j.contains("embedding")) {
        const auto& e = j["embedding"];
        rc.embedding_mode = e.value("mode", rc.embedding_mode);
        rc.embedding_dim = e.value("dim", rc.embedding_dim);
        rc.embedding_file = e.value("file", rc.embedding_file);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        rc.model.embed_dim = m.value("embed_dim", rc.model.embed_dim);
        rc.model.raw_dim = m.value("raw_dim", rc.model.raw_dim);
        rc.model.node_hidden = m.value("node_hidden", rc.model.node_hidden);
        rc.model.edge_hidden = m.value("edge_hidden", rc.model.edge_hidden);
        rc.model.metric_dim = m.value("metric_dim", rc.model.metric_dim);
        rc.model.n_max = m.value("n_max", rc.model.n_max);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        rc.train.alpha = t.value("alpha", rc.train.alpha);
        rc.train.lr_phase1 = t.value("lr_phase1", rc.train.lr_phase1);
        rc.train.lr_phase2 = t.value("lr_phase2", rc.train.lr_phase2);
        rc.train.epochs_phase1 = t.value("epochs_phase1", rc.train.epochs_phase1);
        rc.train.epochs_phase2 = t.value("epochs_phase2", rc.train.epochs_phase2);
        rc.train.batch_size = t.value("batch_size", rc.train.batch_size);
        rc.train.clip_norm = t.value("clip_norm", rc.train.clip_norm);
        rc.train.stop_loss = t.value("stop_loss", rc.train.stop_loss);
    }
    if (j.contains("decode")) {
        const auto& d = j["decode"];
        rc.decode_mode = d.value("mode", rc.decode_mode);
        rc.temperature = d.value("temperature", rc.temperature);
        rc.edge_threshold = d.value("edge_threshold", rc.edge_threshold);
        rc.decode_n_max = d.value("n_max", rc.decode_n_max);
        rc.generate_retries = d.value("retries", rc.generate_retries);
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        if (s.contains("complex_configs"))
            rc.complex_configs = blueprints_from(s["complex_configs"], "synth.complex_configs");
        if (s.contains("simple_configs"))
            rc.simple_configs = blueprints_from(s["simple_configs"], "synth.simple_configs");
        rc.replay_fraction = s.value("replay_fraction", rc.replay_fraction);
        rc.exploration_out = s.value("exploration_out", rc.exploration_out);
        rc.efficiency_out = s.value("efficiency_out", rc.efficiency_out);
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        rc.rounds = r.value("rounds", rc.rounds);
        rc.strategy = r.value("strategy", rc.strategy);
        rc.terminal_node = r.value("terminal_node", rc.terminal_node);
    }
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        rc.backend_mode = b.value("mode", rc.backend_mode);
        if (b.contains("remote")) {
            const auto& r = b["remote"];
            rc.remote.base_url = r.value("base_url", rc.remote.base_url);
            rc.remote.model = r.value("model", rc.remote.model);
            rc.remote.api_key_env = r.value("api_key_env", rc.remote.api_key_env);
            rc.remote.timeout_seconds = r.value("timeout_seconds", rc.remote.timeout_seconds);
            rc.remote.max_retries = r.value("max_retries", rc.remote.max_retries);
            rc.remote.temperature = r.value("temperature", rc.remote.temperature);
        }
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        rc.eval_out = e.value("out", rc.eval_out);
        rc.baseline_agent_num = e.value("baseline_agent_num", rc.baseline_agent_num);
    }
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        rc.checkpoint_dir = p.value("checkpoint_dir", rc.checkpoint_dir);
        rc.report_dir = p.value("report_dir", rc.report_dir);
    }
    return rc;
}

// ---------------------------------------------------------------------------
// shared plumbing

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& rc) {
    if (rc.embedding_mode == "hashed")
        return std::make_unique<HashedEmbedding>(rc.embedding_dim);
    if (rc.embedding_mode == "file") {
        if (rc.embedding_file.empty())
            throw ConfigError("config: embedding.mode=file needs embedding.file");
        return std::make_unique<FileEmbedding>(
            FileEmbedding::load(rc.embedding_file, rc.embedding_dim));
    }
    throw ConfigError("config: unknown embedding mode '" + rc.embedding_mode + "'");
}

RoleRegistry load_registry(const RunConfig& rc, const EmbeddingProvider& provider) {
    if (rc.role_pool.empty()) throw ConfigError("config: role_pool path is not set");
    if (!file_exists(rc.role_pool)) throw IoError("role pool not found: " + rc.role_pool);
    return RoleRegistry::load_pool(rc.role_pool, provider, seed_for(rc.seed, "registry"));
}

std::vector<TaskSpec> load_tasks(const RunConfig& rc) {
    if (rc.task_suite.empty()) throw ConfigError("config: task_suite path is not set");
    if (!file_exists(rc.task_suite)) throw IoError("task suite not found: " + rc.task_suite);
    std::vector<TaskSpec> tasks = read_task_suite(rc.task_suite);
    if (tasks.empty()) throw InputError("task suite " + rc.task_suite + " is empty");
    return tasks;
}

std::unique_ptr<AgentBackend> make_backend(const RunConfig& rc) {
    if (rc.backend_mode == "mock")
        return std::make_unique<MockBackend>(seed_for(rc.seed, "mock-backend"));
    if (rc.backend_mode == "remote") return std::make_unique<RemoteBackend>(rc.remote);
    throw ConfigError("config: unknown backend mode '" + rc.backend_mode + "'");
}

DecodePolicy make_policy(const RunConfig& rc) {
    DecodePolicy p;
    if (rc.decode_mode == "greedy") {
        p.mode = DecodePolicy::Mode::greedy;
    } else if (rc.decode_mode == "sample") {
        p.mode = DecodePolicy::Mode::sample;
    } else {
        throw ConfigError("config: unknown decode mode '" + rc.decode_mode + "'");
    }
    p.temperature = rc.temperature;
    p.edge_threshold = rc.edge_threshold;
    p.n_max = rc.decode_n_max;
    return p;
}

std::string ckpt_base(const RunConfig& rc, TrainPhase phase) {
    return rc.checkpoint_dir + "/" + to_string(phase);
}

// fine-tune checkpoint when present, cold-start otherwise.
std::string default_checkpoint(const RunConfig& rc) {
    std::string fine = ckpt_base(rc, TrainPhase::fine_tune);
    if (file_exists(fine + ".json")) return fine;
    return ckpt_base(rc, TrainPhase::cold_start);
}

Model load_model(const std::string& base, const RoleRegistry& registry) {
    if (!file_exists(base + ".json"))
        throw IoError("checkpoint not found: " + base + ".json (train first?)");
    return load_checkpoint(base, registry);
}

// Generation with retry-on-empty: sampling gets a fresh derived seed per
// attempt; greedy is deterministic, so an empty first step is final.
std::pair<CollabGraph, GenerationTrace> generate_with_retries(
    const Model& model, const TaskQuery& q, const RoleRegistry& registry,
    const EmbeddingProvider& provider, DecodePolicy policy, uint64_t seed, int retries) {
    int attempts = policy.mode == DecodePolicy::Mode::greedy ? 1 : std::max(1, retries);
    for (int a = 0;; ++a) {
        policy.seed = seed_for(seed, "generate-attempt-" + std::to_string(a));
        try {
            return generate(model, q, registry, provider, policy);
        } catch (const EmptyTopologyError&) {
            if (a + 1 >= attempts) throw;
        }
    }
}

// ---------------------------------------------------------------------------
// commands

int cmd_synth(const RunConfig& rc) {
    auto provider = make_provider(rc);
    RoleRegistry registry = load_registry(rc, *provider);
    std::vector<TaskSpec> tasks = load_tasks(rc);
    if (rc.complex_configs.empty())
        throw ConfigError("config: synth.complex_configs is empty");

    SuccessOracle oracle = rule_based_success;
    SynthStats exp_stats;
    std::vector<TrainingExample> exploration = synth_exploration(
        tasks, rc.complex_configs, registry, oracle, seed_for(rc.seed, "synth-exp"), &exp_stats);

    std::vector<TrainingExample> simple = synth_exploration(
        tasks, rc.simple_configs, registry, oracle, seed_for(rc.seed, "synth-simple"));

    std::vector<TrainingExample> pruned;
    for (const TrainingExample& ex : exploration) {
        const TaskSpec* task = nullptr;
        for (const TaskSpec& t : tasks)
            if (t.query == ex.query.text) {
                task = &t;
                break;
            }
        if (task == nullptr) continue;
        for (TrainingExample& v : prune_variants(ex, *task, oracle)) pruned.push_back(std::move(v));
    }

    std::vector<TrainingExample> efficiency = assemble_efficiency(
        simple, pruned, exploration, rc.replay_fraction, seed_for(rc.seed, "synth-eff"));

    write_dataset(rc.exploration_out, exploration);
    write_dataset(rc.efficiency_out, efficiency);

    size_t n_simple = 0, n_pruned = 0, n_replay = 0;
    for (const auto& ex : efficiency) {
        if (ex.source == "simple") ++n_simple;
        if (ex.source == "pruned") ++n_pruned;
        if (ex.source == "replay") ++n_replay;
    }
    std::cout << "wrote " << rc.exploration_out << ": " << exploration.size()
              << " exploration examples (attempted " << exp_stats.attempted << ", oracle errors "
              << exp_stats.oracle_errors << ")\n";
    std::cout << "wrote " << rc.efficiency_out << ": " << efficiency.size()
              << " efficiency examples (simple=" << n_simple << ", pruned=" << n_pruned
              << ", replay=" << n_replay << ")\n";
    return 0;
}

int cmd_train(const RunConfig& rc, const std::string& phase_name, const std::string& dataset_override) {
    TrainPhase phase;
    if (phase_name == "cold-start") {
        phase = TrainPhase::cold_start;
    } else if (phase_name == "fine-tune") {
        phase = TrainPhase::fine_tune;
    } else {
        throw ConfigError("train: unknown phase '" + phase_name + "'");
    }

    auto provider = make_provider(rc);
    if (provider->raw_dim() != rc.model.raw_dim)
        throw ConfigError("config: embedding dim " + std::to_string(provider->raw_dim()) +
                          " != model raw_dim " + std::to_string(rc.model.raw_dim));
    RoleRegistry registry = load_registry(rc, *provider);

    std::string dataset_path = dataset_override;
    if (dataset_path.empty())
        dataset_path = phase == TrainPhase::cold_start ? rc.exploration_out : rc.efficiency_out;
    if (!file_exists(dataset_path)) throw IoError("dataset not found: " + dataset_path);
    std::vector<TrainingExample> dataset = read_dataset(dataset_path);

    Model model = phase == TrainPhase::cold_start
                      ? Model(rc.model, registry, seed_for(rc.seed, "model"))
                      : load_model(ckpt_base(rc, TrainPhase::cold_start), registry);

    TrainConfig cfg = rc.train;
    cfg.seed = seed_for(rc.seed, "train");
    TrainReport report = train_phase(model, dataset, cfg, phase, registry, *provider);

    std::string base = ckpt_base(rc, phase);
    save_checkpoint(base, model, registry);
    report.checkpoint_path = base;
    write_train_report(rc.report_dir + "/train-" + to_string(phase) + ".json", report);

    std::cout << "trained " << to_string(phase) << " on " << dataset.size() << " examples, "
              << report.epochs.size() << " epochs, final mean loss " << report.final_mean_total()
              << "\n";
    std::cout << "checkpoint: " << base << ".json\n";
    return 0;
}

int cmd_generate(const RunConfig& rc, const std::string& query, const std::string& checkpoint,
                 const std::string& out, const std::string& dot_out) {
    auto provider = make_provider(rc);
    RoleRegistry registry = load_registry(rc, *provider);
    Model model =
        load_model(checkpoint.empty() ? default_checkpoint(rc) : checkpoint, registry);

    auto [graph, trace] =
        generate_with_retries(model, TaskQuery(query), registry, *provider, make_policy(rc),
                              seed_for(rc.seed, "generate"), rc.generate_retries);

    save_graph(out, graph);
    if (!dot_out.empty()) write_file_atomic(dot_out, to_dot(graph));
    std::cout << "nodes: " << graph.node_count() << "\nedges: " << graph.edge_count()
              << "\nlog_prob: " << trace.total_log_prob << "\nwrote " << out << "\n";
    return 0;
}

int cmd_run(const RunConfig& rc, const std::string& graph_file, std::string query,
            const std::string& task_id, const std::string& out) {
    CollabGraph graph = load_graph(graph_file);
    if (query.empty()) query = graph.query;
    if (query.empty())
        throw InputError("run: no query given and the graph file carries none");

    auto provider = make_provider(rc);
    RoleRegistry registry = load_registry(rc, *provider);
    auto backend = make_backend(rc);

    ExecutionOptions opt;
    opt.rounds = rc.rounds;
    opt.strategy = aggregation_from_string(rc.strategy);
    opt.terminal_node = rc.terminal_node;

    Transcript transcript = execute(graph, TaskQuery(query), opt, *backend, &registry);
    save_transcript(out, transcript);

    std::cout << "final: " << transcript.final_output << "\n";
    std::cout << "prompt_tokens: " << transcript.total_prompt_tokens << "\n";
    if (!task_id.empty()) {
        std::vector<TaskSpec> tasks = load_tasks(rc);
        const TaskSpec* task = nullptr;
        for (const TaskSpec& t : tasks)
            if (t.id == task_id) task = &t;
        if (task == nullptr) throw LookupError("run: task '" + task_id + "' not in suite");
        std::cout << "success: " << (runtime_success(transcript, *task) ? 1 : 0) << "\n";
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_eval(const RunConfig& rc, const std::string& checkpoint, const std::string& topology) {
    auto provider = make_provider(rc);
    RoleRegistry registry = load_registry(rc, *provider);
    std::vector<TaskSpec> tasks = load_tasks(rc);
    auto backend = make_backend(rc);

    std::optional<Model> model;
    std::optional<Topology> baseline;
    if (topology.empty()) {
        model.emplace(
            load_model(checkpoint.empty() ? default_checkpoint(rc) : checkpoint, registry));
    } else {
        baseline = topology_from_string(topology);
    }

    ExecutionOptions opt;
    opt.rounds = rc.rounds;
    opt.strategy = aggregation_from_string(rc.strategy);
    opt.terminal_node = rc.terminal_node;

    nlohmann::json rows = nlohmann::json::array();
    int successes = 0, generated = 0;
    double sum_nodes = 0, sum_edges = 0, sum_tokens = 0;
    for (const TaskSpec& task : tasks) {
        CollabGraph graph;
        bool have_graph = true;
        if (baseline) {
            ConfigBlueprint bp;
            bp.topology = *baseline;
            bp.agent_num = rc.baseline_agent_num;
            graph = build_graph(bp, registry, seed_for(rc.seed, "eval-baseline-" + task.id));
            graph.query = task.query;
        } else {
            try {
                graph = generate_with_retries(*model, TaskQuery(task.query), registry, *provider,
                                              make_policy(rc), seed_for(rc.seed, "eval-" + task.id),
                                              rc.generate_retries)
                            .first;
            } catch (const EmptyTopologyError&) {
                have_graph = false;
            }
        }

        nlohmann::json row{{"id", task.id}, {"generated", have_graph}};
        if (have_graph) {
            Transcript transcript = execute(graph, TaskQuery(task.query), opt, *backend, &registry);
            bool ok = runtime_success(transcript, task);
            successes += ok ? 1 : 0;
            ++generated;
            sum_nodes += graph.node_count();
            sum_edges += static_cast<double>(graph.edge_count());
            sum_tokens += static_cast<double>(transcript.total_prompt_tokens);
            row["success"] = ok ? 1 : 0;
            row["nodes"] = graph.node_count();
            row["edges"] = graph.edge_count();
            row["prompt_tokens"] = transcript.total_prompt_tokens;
        } else {
            row["success"] = 0;
        }
        rows.push_back(std::move(row));
    }

    nlohmann::json report{
        {"topology", topology.empty() ? "model" : topology},
        {"tasks", std::move(rows)},
        {"success_rate", tasks.empty() ? 0.0 : static_cast<double>(successes) / tasks.size()},
        {"mean_nodes", generated > 0 ? sum_nodes / generated : 0.0},
        {"mean_edges", generated > 0 ? sum_edges / generated : 0.0},
        {"mean_prompt_tokens", generated > 0 ? sum_tokens / generated : 0.0}};
    write_file_atomic(rc.eval_out, report.dump(2) + "\n");
    std::cout << "success_rate: " << report["success_rate"].get<double>() << "\n"
              << "mean_nodes: " << report["mean_nodes"].get<double>() << "\n"
              << "mean_edges: " << report["mean_edges"].get<double>() << "\n"
              << "mean_prompt_tokens: " << report["mean_prompt_tokens"].get<double>() << "\n"
              << "wrote " << rc.eval_out << "\n";
    return 0;
}

int cmd_export_dot(const std::string& graph_file, const std::string& out) {
    CollabGraph graph = load_graph(graph_file);
    validate_dag(graph);
    write_file_atomic(out, to_dot(graph));
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_extend_roles(const RunConfig& rc, const std::vector<std::string>& additions,
                     const std::string& out) {
    if (additions.empty()) throw InputError("extend-roles: nothing to add (use --add)");
    auto provider = make_provider(rc);
    RoleRegistry registry = load_registry(rc, *provider);

    std::vector<std::pair<std::string, std::string>> new_roles;
    for (const std::string& spec : additions) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InputError("extend-roles: expected name=description, got '" + spec + "'");
        new_roles.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
    }
    RoleRegistry extended = registry.extended(new_roles, *provider);
    std::string target = out.empty() ? rc.role_pool : out;
    extended.save_pool(target);
    std::cout << "role pool now has " << extended.role_count() << " roles; wrote " << target
              << "\n";
    return 0;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const NumericError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const EmptyTopologyError*>(&e) != nullptr) return 4;
    if (dynamic_cast<const BackendError*>(&e) != nullptr) return 5;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collaboration-topology generator pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");
    uint64_t seed_flag = 0;
    CLI::Option* seed_opt = app.add_option("--seed", seed_flag, "root seed override");
    std::string role_pool_flag;
    CLI::Option* pool_opt = app.add_option("--role-pool", role_pool_flag, "role pool JSON");
    std::string suite_flag;
    CLI::Option* suite_opt = app.add_option("--task-suite", suite_flag, "task suite JSON");

    // synth-data
    CLI::App* synth = app.add_subcommand("synth-data", "synthesize training datasets")->fallthrough();

    // train
    CLI::App* train = app.add_subcommand("train", "run one training phase")->fallthrough();
    std::string phase;
    train->add_option("--phase", phase, "cold-start or fine-tune")->required();
    std::string dataset_flag;
    train->add_option("--dataset", dataset_flag, "dataset path override");
    int epochs_flag = 0;
    CLI::Option* epochs_opt = train->add_option("--epochs", epochs_flag, "epoch count override");
    double stop_loss_flag = 0.0;
    CLI::Option* stop_opt =
        train->add_option("--stop-loss", stop_loss_flag, "early-stop mean loss override");

    // generate
    CLI::App* gen = app.add_subcommand("generate", "generate a graph for a query")->fallthrough();
    std::string query_flag;
    gen->add_option("--query", query_flag, "task query text")->required();
    std::string gen_out = "graph.json";
    gen->add_option("--out", gen_out, "output graph path");
    std::string gen_dot;
    gen->add_option("--export-dot", gen_dot, "also write DOT here");
    std::string ckpt_flag;
    gen->add_option("--checkpoint", ckpt_flag, "checkpoint base path override");
    std::string mode_flag;
    CLI::Option* mode_opt = gen->add_option("--mode", mode_flag, "greedy or sample");
    int nmax_flag = 0;
    CLI::Option* nmax_opt = gen->add_option("--n-max", nmax_flag, "node-count cap override");
    double temp_flag = 0.0;
    CLI::Option* temp_opt = gen->add_option("--temperature", temp_flag, "sampling temperature");

    // run
    CLI::App* run = app.add_subcommand("run", "execute a graph against the backend")->fallthrough();
    std::string run_graph;
    run->add_option("--graph", run_graph, "graph JSON file")->required();
    std::string run_query;
    run->add_option("--query", run_query, "query override (defaults to the graph's)");
    std::string run_task;
    run->add_option("--task", run_task, "judge success against this task id");
    std::string run_out = "transcript.json";
    run->add_option("--out", run_out, "transcript output path");
    int rounds_flag = 0;
    CLI::Option* rounds_opt = run->add_option("--rounds", rounds_flag, "message rounds override");
    std::string strat_flag;
    CLI::Option* strat_opt = run->add_option("--strategy", strat_flag, "aggregation strategy");
    int terminal_flag = 0;
    CLI::Option* terminal_opt =
        run->add_option("--terminal-node", terminal_flag, "terminal-agent node id");

    // eval
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate over the task suite")->fallthrough();
    std::string eval_ckpt;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint base path override");
    std::string eval_topology;
    eval_cmd->add_option("--topology", eval_topology,
                         "fixed-topology baseline instead of the model");
    std::string eval_out_flag;
    CLI::Option* eval_out_opt = eval_cmd->add_option("--out", eval_out_flag, "report path");

    // export-dot
    CLI::App* dot = app.add_subcommand("export-dot", "convert a graph file to DOT")->fallthrough();
    std::string dot_graph;
    dot->add_option("--graph", dot_graph, "graph JSON file")->required();
    std::string dot_out = "graph.dot";
    dot->add_option("--out", dot_out, "DOT output path");

    // extend-roles
    CLI::App* extend = app.add_subcommand("extend-roles", "append roles to the pool")->fallthrough();
    std::vector<std::string> add_flags;
    extend->add_option("--add", add_flags, "new role as name=description (repeatable)");
    std::string extend_out;
    extend->add_option("--out", extend_out, "output pool path (defaults to the input pool)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig rc = load_config(config_path);
        if (seed_opt->count() > 0) rc.seed = seed_flag;
        if (pool_opt->count() > 0) rc.role_pool = role_pool_flag;
        if (suite_opt->count() > 0) rc.task_suite = suite_flag;

        if (synth->parsed()) return cmd_synth(rc);
        if (train->parsed()) {
            if (epochs_opt->count() > 0) {
                rc.train.epochs_phase1 = epochs_flag;
                rc.train.epochs_phase2 = epochs_flag;
            }
            if (stop_opt->count() > 0) rc.train.stop_loss = static_cast<float>(stop_loss_flag);
            return cmd_train(rc, phase, dataset_flag);
        }
        if (gen->parsed()) {
            if (mode_opt->count() > 0) rc.decode_mode = mode_flag;
            if (nmax_opt->count() > 0) rc.decode_n_max = nmax_flag;
            if (temp_opt->count() > 0) rc.temperature = temp_flag;
            return cmd_generate(rc, query_flag, ckpt_flag, gen_out, gen_dot);
        }
        if (run->parsed()) {
            if (rounds_opt->count() > 0) rc.rounds = rounds_flag;
            if (strat_opt->count() > 0) rc.strategy = strat_flag;
            if (terminal_opt->count() > 0) rc.terminal_node = terminal_flag;
            return cmd_run(rc, run_graph, run_query, run_task, run_out);
        }
        if (eval_cmd->parsed()) {
            if (eval_out_opt->count() > 0) rc.eval_out = eval_out_flag;
            return cmd_eval(rc, eval_ckpt, eval_topology);
        }
        if (dot->parsed()) return cmd_export_dot(dot_graph, dot_out);
        if (extend->parsed()) return cmd_extend_roles(rc, add_flags, extend_out);
        std::cerr << "error: no command given\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
