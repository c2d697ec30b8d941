// sec-harness: run SEC and baseline prompting strategies over benchmark
// datasets, offline via replay fixtures or against any OpenAI-compatible
// endpoint.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "sec/analysis.hpp"
#include "sec/errors.hpp"
#include "sec/runner.hpp"
#include "sec/util.hpp"

namespace fs = std::filesystem;
using namespace sec;

namespace {

struct RunFlags {
    std::string task;
    std::string strategy;
    std::string dataset;
    std::string out_dir;
    std::string backend_kind = "replay";
    std::string fixture;
    std::string base_url = "https://api.openai.com";
    std::string api_key_env = "OPENAI_API_KEY";
    std::string model = "gpt-3.5-turbo";
    std::string cache_dir;
    std::string icl_demos;
    std::string checker_cmd;
    std::string perturbation = RetryPolicy{}.perturbation_template;
    int shots = -1;
    int max_attempts = 5;
    double retry_temperature = 1.0;
    double base_temperature = 0.0;
    int concurrency = 4;
    double checker_timeout = 10.0;
    int limit = -1;
    uint64_t seed = 0;
    int max_tokens = -1;
    double timeout = 120.0;
    int transport_retries = 3;
    bool strict = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags, bool live_only) {
    cmd->add_option("--task", flags.task, "Benchmark task: gsm8k, math, arc, mmlu, ceval, humaneval, base5")
        ->required();
    cmd->add_option("--strategy", flags.strategy,
                    "Prompting strategy: zero-shot, zero-shot-cot, icl, cot-icl, sec, cot-sec")
        ->required();
    cmd->add_option("--dataset", flags.dataset, "Dataset JSONL path")->required();
    cmd->add_option("--out", flags.out_dir, "Output directory for report.json and summary.csv")
        ->required();
    if (!live_only) {
        cmd->add_option("--backend", flags.backend_kind, "Backend kind: http or replay")
            ->check(CLI::IsMember({"http", "replay"}));
        cmd->add_option("--fixture", flags.fixture, "Replay fixture JSONL (replay backend)");
    }
    cmd->add_option("--base-url", flags.base_url, "OpenAI-compatible endpoint base URL");
    cmd->add_option("--api-key-env", flags.api_key_env,
                    "Environment variable holding the API key");
    cmd->add_option("--model", flags.model, "Model identifier sent to the provider");
    cmd->add_option("--shots,-k", flags.shots,
                    "Shot count k; defaults to the task's published count");
    cmd->add_option("--max-attempts", flags.max_attempts,
                    "Generation attempts before giving up (or falling back)");
    cmd->add_option("--retry-temperature", flags.retry_temperature,
                    "Sampling temperature for generation retries");
    cmd->add_option("--base-temperature", flags.base_temperature,
                    "Sampling temperature for the first generation attempt");
    cmd->add_option("--perturbation", flags.perturbation,
                    "Retry line appended to the prompt; {attempt} is the attempt number");
    cmd->add_option("--concurrency", flags.concurrency, "Worker pool size");
    cmd->add_option("--cache-dir", flags.cache_dir, "Response cache directory (resumable runs)");
    cmd->add_option("--icl-demos", flags.icl_demos,
                    "Human demonstrations JSONL (required for icl/cot-icl)");
    cmd->add_option("--checker-cmd", flags.checker_cmd,
                    "External checker command for code answers");
    cmd->add_option("--checker-timeout", flags.checker_timeout, "Checker timeout in seconds");
    cmd->add_option("--limit", flags.limit, "Process only the first N cases");
    cmd->add_option("--seed", flags.seed, "Seed echoed into the report");
    cmd->add_option("--max-tokens", flags.max_tokens, "max_tokens sent with each request");
    cmd->add_option("--timeout", flags.timeout, "HTTP timeout in seconds");
    cmd->add_option("--transport-retries", flags.transport_retries,
                    "Transport retry budget for network/5xx failures");
    cmd->add_flag("--strict", flags.strict, "Exit 2 when any item fails");
}

RunConfig to_config(const RunFlags& flags) {
    RunConfig config;
    config.task_id = task_id_from_string(flags.task);
    config.strategy = strategy_from_string(flags.strategy);
    if (flags.shots >= 0) config.k = flags.shots;
    config.policy.max_attempts = flags.max_attempts;
    config.policy.retry_temperature = flags.retry_temperature;
    config.policy.base_temperature = flags.base_temperature;
    config.policy.perturbation_template = flags.perturbation;
    config.backend.kind = flags.backend_kind == "http" ? BackendKind::http : BackendKind::replay;
    config.backend.base_url = flags.base_url;
    config.backend.api_key_env = flags.api_key_env;
    config.backend.fixture_path = flags.fixture;
    config.backend.timeout_seconds = flags.timeout;
    config.backend.max_transport_retries = flags.transport_retries;
    config.model = flags.model;
    config.dataset_path = flags.dataset;
    config.icl_demos_path = flags.icl_demos;
    if (flags.limit >= 0) config.limit = flags.limit;
    config.concurrency = flags.concurrency;
    config.cache_dir = flags.cache_dir;
    config.checker_cmd = flags.checker_cmd;
    config.checker_timeout = flags.checker_timeout;
    config.seed = flags.seed;
    if (flags.max_tokens > 0) config.max_tokens = flags.max_tokens;
    return config;
}

void print_summary(const RunReport& report) {
    const json& c = report.config_echo;
    std::cout << "task=" << c.value("task", "?") << " strategy=" << c.value("strategy", "?")
              << " k=" << c.value("k", 0) << " n=" << report.n_total
              << " accuracy=" << report.accuracy << " fallback=" << report.n_fallback
              << " failed=" << report.n_failed << "\n";
    for (const auto& [name, s] : report.per_subtopic)
        std::cout << "  subtopic " << name << ": n=" << s.n << " accuracy=" << s.accuracy
                  << "\n";
}

int finish_run(const RunReport& report, const std::string& out_dir, bool strict) {
    write_report(report, out_dir);
    print_summary(report);
    std::cout << "report written to " << (fs::path(out_dir) / "report.json").string() << "\n";
    if (strict && report.n_failed > 0) return 2;
    return 0;
}

RunReport load_report(const std::string& path) {
    return report_from_json(json::parse(read_file(path)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SEC prompting evaluation harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI sections per subcommand)");

    RunFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "Evaluate one strategy over a dataset");
    run_cmd->configurable();
    add_run_flags(run_cmd, run_flags, false);

    RunFlags sweep_flags;
    std::vector<int> k_values;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run the same setup across shot counts");
    sweep_cmd->configurable();
    add_run_flags(sweep_cmd, sweep_flags, false);
    sweep_cmd->add_option("--k-values", k_values, "Shot counts to sweep, e.g. 1 2 3 4 5")
        ->required()
        ->delimiter(',');

    std::string cmp_a, cmp_b, cmp_out;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Cross-tabulate correctness of two runs");
    compare_cmd->add_option("--a", cmp_a, "First report.json")->required();
    compare_cmd->add_option("--b", cmp_b, "Second report.json")->required();
    compare_cmd->add_option("--out", cmp_out, "Where to write transition.json");

    std::string sim_report, sim_provider, sim_out;
    CLI::App* sim_cmd =
        app.add_subcommand("similarity", "Demo-to-test question similarity of a run");
    sim_cmd->add_option("--report", sim_report, "report.json of a SEC/ICL run")->required();
    sim_cmd->add_option("--provider-cmd", sim_provider,
                        "External scorer: JSON {a,b} per stdin line, one real per stdout line");
    sim_cmd->add_option("--out", sim_out, "Where to write similarity.json");

    int b5_n = 200;
    uint64_t b5_seed = 0;
    std::string b5_out;
    CLI::App* b5_cmd = app.add_subcommand("gen-base5", "Generate base-5 addition problems");
    b5_cmd->add_option("--n", b5_n, "Number of problems");
    b5_cmd->add_option("--seed", b5_seed, "Generator seed");
    b5_cmd->add_option("--out", b5_out, "Output JSONL path")->required();

    RunFlags rec_flags;
    std::string record_to;
    CLI::App* rec_cmd = app.add_subcommand(
        "record-fixture", "Run live while recording every call as a replay fixture");
    add_run_flags(rec_cmd, rec_flags, true);
    rec_cmd->add_option("--record-to", record_to, "Fixture JSONL to append")->required();

    std::string rep_path, rep_csv;
    CLI::App* report_cmd = app.add_subcommand("report", "Print the summary of a saved report");
    report_cmd->add_option("--report", rep_path, "report.json path")->required();
    report_cmd->add_option("--csv", rep_csv, "Also write summary.csv here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            return finish_run(run_dataset(to_config(run_flags)), run_flags.out_dir,
                              run_flags.strict);
        }
        if (*sweep_cmd) {
            auto runs = shot_sweep(to_config(sweep_flags), k_values);
            std::string csv = "task,strategy,k,n,accuracy,n_fallback,n_failed\n";
            for (const auto& [k, report] : runs) {
                fs::path dir = fs::path(sweep_flags.out_dir) / ("k" + std::to_string(k));
                write_report(report, dir.string());
                print_summary(report);
                std::string row = report_summary_csv(report);
                csv += row.substr(row.find('\n') + 1);
            }
            atomic_write_file((fs::path(sweep_flags.out_dir) / "sweep.csv").string(), csv);
            std::cout << "sweep written to " << sweep_flags.out_dir << "\n";
            return 0;
        }
        if (*compare_cmd) {
            TransitionTable t = compare_runs(load_report(cmp_a), load_report(cmp_b));
            std::cout << "both_correct=" << t.both_correct << " a_only=" << t.a_only
                      << " b_only=" << t.b_only << " both_wrong=" << t.both_wrong
                      << " total=" << t.total() << "\n";
            if (!cmp_out.empty())
                atomic_write_file(cmp_out, transition_to_json(t).dump(2) + "\n");
            return 0;
        }
        if (*sim_cmd) {
            SimilarityReport sim = similarity_scores(load_report(sim_report), sim_provider);
            json j;
            j["provider"] = sim.provider;
            j["fallback_warning"] = sim.fallback_warning;
            j["mean_overall"] = sim.mean_overall;
            j["mean_per_shot"] = sim.mean_per_shot;
            json per_item = json::object();
            for (const auto& [id, scores] : sim.per_item) per_item[id] = scores;
            j["per_item"] = per_item;
            std::cout << "provider=" << sim.provider << " mean_overall=" << sim.mean_overall
                      << "\n";
            for (size_t i = 0; i < sim.mean_per_shot.size(); ++i)
                std::cout << "  shot " << i + 1 << ": " << sim.mean_per_shot[i] << "\n";
            if (!sim_out.empty()) atomic_write_file(sim_out, j.dump(2) + "\n");
            return 0;
        }
        if (*b5_cmd) {
            auto cases = generate_base5_dataset(b5_n, b5_seed);
            atomic_write_file(b5_out, serialize_dataset(cases));
            std::cout << "wrote " << cases.size() << " cases to " << b5_out << "\n";
            return 0;
        }
        if (*rec_cmd) {
            RunConfig config = to_config(rec_flags);
            config.backend.kind = BackendKind::http;
            config.cache_dir.clear();  // recording must see every logical request
            auto live = make_backend(config.backend);
            auto recorder = std::make_shared<RecordingBackend>(record_to, live);
            RunReport report = run_dataset(config, recorder);
            std::cout << "fixture recorded to " << record_to << "\n";
            return finish_run(report, rec_flags.out_dir, rec_flags.strict);
        }
        if (*report_cmd) {
            RunReport report = load_report(rep_path);
            print_summary(report);
            if (!rep_csv.empty()) atomic_write_file(rep_csv, report_summary_csv(report));
            return 0;
        }
    } catch (const FatalConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
