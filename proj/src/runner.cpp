#include "sec/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>
#include <thread>

#include "sec/errors.hpp"
#include "sec/subprocess.hpp"
#include "sec/util.hpp"

namespace sec {

namespace {

json config_to_json(const RunConfig& config, int resolved_k) {
    json j;
    j["task"] = to_string(config.task_id);
    j["strategy"] = to_string(config.strategy);
    j["k"] = resolved_k;
    j["model"] = config.model;
    j["policy"] = {{"max_attempts", config.policy.max_attempts},
                   {"retry_temperature", config.policy.retry_temperature},
                   {"base_temperature", config.policy.base_temperature},
                   {"perturbation_template", config.policy.perturbation_template}};
    j["backend"] = {{"kind", config.backend.kind == BackendKind::http ? "http" : "replay"},
                    {"base_url", config.backend.base_url},
                    {"api_key_env", config.backend.api_key_env},
                    {"fixture_path", config.backend.fixture_path},
                    {"timeout_seconds", config.backend.timeout_seconds},
                    {"max_transport_retries", config.backend.max_transport_retries}};
    j["dataset"] = config.dataset_path;
    j["icl_demos"] = config.icl_demos_path;
    if (config.limit) j["limit"] = *config.limit;
    j["concurrency"] = config.concurrency;
    j["cache_dir"] = config.cache_dir;
    j["checker_cmd"] = config.checker_cmd;
    j["checker_timeout"] = config.checker_timeout;
    j["seed"] = config.seed;
    if (config.max_tokens) j["max_tokens"] = *config.max_tokens;
    return j;
}

Strategy zero_shot_equivalent(Strategy s, const TaskSpec& task) {
    if (is_cot(s) && task.supports_cot) return Strategy::zero_shot_cot;
    return Strategy::zero_shot;
}

}  // namespace

bool check_code(ItemRecord& record, const TestCase& test_case, const std::string& checker_cmd,
                double timeout_seconds) {
    if (checker_cmd.empty()) throw CheckerRequired("no checker command configured");
    json doc;
    doc["prompt"] = test_case.question;
    doc["body"] = record.result.final_answer ? record.result.final_answer->code_text : "";
    auto aux_value = [&](const char* key) {
        auto it = test_case.aux.find(key);
        return it == test_case.aux.end() ? std::string() : it->second;
    };
    doc["test"] = aux_value("test");
    doc["entry_point"] = aux_value("entry_point");

    SubprocessResult sub = run_subprocess(checker_cmd, doc.dump(), timeout_seconds);
    if (sub.timed_out) {
        record.checker_timed_out = true;
        record.result.correct = false;
        return false;
    }
    record.result.correct = sub.exit_code == 0;
    return *record.result.correct;
}

RunReport run_dataset(const RunConfig& config, std::shared_ptr<Backend> backend_override) {
    if (config.task_id == TaskId::custom)
        throw FatalConfig("custom tasks are not runnable from the builtin catalog");
    TaskSpec task = builtin_task(config.task_id);
    int k = config.k.value_or(task.default_shots);
    if (k < 0) throw FatalConfig("k must be non-negative");

    Strategy strategy = config.strategy;
    if (k == 0) strategy = zero_shot_equivalent(config.strategy, task);

    if (config.dataset_path.empty()) throw FatalConfig("missing dataset path (--dataset)");
    std::vector<TestCase> cases;
    try {
        cases = load_dataset(config.dataset_path, task);
    } catch (const SchemaError& e) {
        throw FatalConfig("dataset rejected: " + std::string(e.what()));
    } catch (const IoError& e) {
        throw FatalConfig(e.what());
    }
    if (config.limit) {
        if (*config.limit <= 0) throw FatalConfig("limit must be positive (empty run rejected)");
        if (static_cast<size_t>(*config.limit) < cases.size())
            cases.resize(static_cast<size_t>(*config.limit));
    }
    if (cases.empty()) throw FatalConfig("dataset is empty");

    std::vector<Demonstration> icl_demos;
    if (is_icl(strategy)) {
        if (config.icl_demos_path.empty())
            throw FatalConfig("ICL strategies need a demonstrations file (--icl-demos)");
        try {
            icl_demos = load_demos_file(config.icl_demos_path);
            if (static_cast<int>(icl_demos.size()) < k)
                throw FatalConfig("demos file holds " + std::to_string(icl_demos.size()) +
                                  " demonstrations but k is " + std::to_string(k));
            icl_demos.resize(static_cast<size_t>(k));
            for (auto& d : icl_demos) d = validate_demo_answer(d, task.answer_domain);
        } catch (const FatalConfig&) {
            throw;
        } catch (const Error& e) {
            throw FatalConfig("ICL demos rejected: " + std::string(e.what()));
        }
    }

    std::shared_ptr<Backend> backend = backend_override;
    if (!backend) backend = make_backend(config.backend);
    if (!config.cache_dir.empty())
        backend = std::make_shared<CachingBackend>(config.cache_dir, backend);

    ItemOptions options;
    options.model = config.model;
    options.max_tokens = config.max_tokens;

    std::vector<ItemRecord> records(cases.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < cases.size();) {
            const TestCase& c = cases[i];
            ItemRecord& rec = records[i];
            rec.id = c.id;
            rec.question = c.question;
            rec.gold_answer = c.gold_answer;
            rec.subtopic = c.subtopic;
            auto started = std::chrono::steady_clock::now();
            try {
                rec.result = run_item(c, task, strategy, k, config.policy, *backend, icl_demos,
                                      options);
                if (task.answer_domain.kind == AnswerKind::code_body &&
                    !config.checker_cmd.empty() && rec.result.final_answer)
                    check_code(rec, c, config.checker_cmd, config.checker_timeout);
            } catch (const ItemFailed& e) {
                rec.failed = true;
                rec.failure = e.stage + ": " + e.cause;
                rec.result.demo_provenance = DemoProvenance::failed;
                rec.result.demos.clear();
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.failure = std::string("unexpected: ") + e.what();
                rec.result.demo_provenance = DemoProvenance::failed;
                rec.result.demos.clear();
            }
            rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                          started)
                                .count();
        }
    };
    int n_workers = std::max(1, config.concurrency);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::sort(records.begin(), records.end(),
              [](const ItemRecord& a, const ItemRecord& b) { return a.id < b.id; });

    RunReport report;
    report.config_echo = config_to_json(config, k);
    report.records = std::move(records);
    report.n_total = static_cast<int>(report.records.size());
    bool any_subtopic = false;
    for (const auto& rec : report.records) {
        if (rec.result.correct.value_or(false)) ++report.n_correct;
        if (rec.failed) ++report.n_failed;
        if (rec.result.demo_provenance == DemoProvenance::vanilla_fallback) ++report.n_fallback;
        if (!rec.subtopic.empty()) any_subtopic = true;
    }
    report.accuracy = report.n_total > 0
                          ? static_cast<double>(report.n_correct) / report.n_total
                          : 0.0;
    if (any_subtopic) {
        for (const auto& rec : report.records) {
            std::string key = rec.subtopic.empty() ? "(unspecified)" : rec.subtopic;
            SubtopicStats& s = report.per_subtopic[key];
            ++s.n;
            if (rec.result.correct.value_or(false)) ++s.n_correct;
        }
        for (auto& [key, s] : report.per_subtopic)
            s.accuracy = s.n > 0 ? static_cast<double>(s.n_correct) / s.n : 0.0;
    }
    return report;
}

TransitionTable compare_runs(const RunReport& a, const RunReport& b) {
    std::map<std::string, bool> b_correct;
    for (const auto& rec : b.records) b_correct[rec.id] = rec.result.correct.value_or(false);
    if (a.records.size() != b_correct.size())
        throw IdMismatch("runs cover different numbers of cases");
    TransitionTable t;
    for (const auto& rec : a.records) {
        auto it = b_correct.find(rec.id);
        if (it == b_correct.end()) throw IdMismatch("case " + rec.id + " missing from run b");
        bool ca = rec.result.correct.value_or(false);
        bool cb = it->second;
        if (ca && cb) {
            ++t.both_correct;
            t.ids_both_correct.push_back(rec.id);
        } else if (ca) {
            ++t.a_only;
            t.ids_a_only.push_back(rec.id);
        } else if (cb) {
            ++t.b_only;
            t.ids_b_only.push_back(rec.id);
        } else {
            ++t.both_wrong;
            t.ids_both_wrong.push_back(rec.id);
        }
    }
    return t;
}

std::vector<std::pair<int, RunReport>> shot_sweep(const RunConfig& config,
                                                  std::vector<int> k_values,
                                                  std::shared_ptr<Backend> backend_override) {
    if (k_values.empty()) throw FatalConfig("shot sweep needs at least one k");
    std::vector<int> ks;
    for (int k : k_values) {
        if (k < 0) throw FatalConfig("k must be non-negative");
        if (std::find(ks.begin(), ks.end(), k) != ks.end()) {
            std::cerr << "warning: duplicate k=" << k << " dropped from sweep\n";
            continue;
        }
        ks.push_back(k);
    }
    std::sort(ks.begin(), ks.end());
    std::vector<std::pair<int, RunReport>> out;
    for (int k : ks) {
        RunConfig per_k = config;
        per_k.k = k;
        out.emplace_back(k, run_dataset(per_k, backend_override));
    }
    return out;
}

json report_to_json(const RunReport& report) {
    json j;
    j["config"] = report.config_echo;
    j["n_total"] = report.n_total;
    j["n_correct"] = report.n_correct;
    j["accuracy"] = report.accuracy;
    j["n_fallback"] = report.n_fallback;
    j["n_failed"] = report.n_failed;
    json subtopics = json::object();
    for (const auto& [key, s] : report.per_subtopic)
        subtopics[key] = {{"n", s.n}, {"n_correct", s.n_correct}, {"accuracy", s.accuracy}};
    j["per_subtopic"] = subtopics;
    json records = json::array();
    for (const auto& rec : report.records) {
        json r;
        r["id"] = rec.id;
        r["question"] = rec.question;
        r["gold"] = rec.gold_answer;
        if (!rec.subtopic.empty()) r["subtopic"] = rec.subtopic;
        r["wall_time"] = rec.wall_time;
        if (rec.failed) {
            r["failed"] = true;
            r["failure"] = rec.failure;
        }
        if (rec.checker_timed_out) r["checker_timed_out"] = true;
        json res;
        json demos = json::array();
        for (const auto& d : rec.result.demos) demos.push_back(demonstration_to_json(d));
        res["demos"] = demos;
        res["demo_provenance"] = to_string(rec.result.demo_provenance);
        res["generation_attempts"] = rec.result.generation_attempts;
        res["final_raw"] = rec.result.final_raw;
        if (rec.result.final_answer) {
            const NormalizedAnswer& a = *rec.result.final_answer;
            json na;
            na["kind"] = to_string(a.kind);
            switch (a.kind) {
                case AnswerKind::integer: na["value"] = a.integer_value; break;
                case AnswerKind::math_expression: na["value"] = a.expr_canonical; break;
                case AnswerKind::choice_label: na["value"] = a.label; break;
                case AnswerKind::code_body: na["value"] = a.code_text; break;
            }
            res["final_answer"] = na;
        }
        if (rec.result.correct) res["correct"] = *rec.result.correct;
        json log = json::array();
        for (const auto& entry : rec.result.request_log)
            log.push_back({{"key", entry.key}, {"purpose", to_string(entry.purpose)}});
        res["request_log"] = log;
        r["result"] = res;
        records.push_back(r);
    }
    j["records"] = records;
    return j;
}

RunReport report_from_json(const json& j) {
    RunReport report;
    report.config_echo = j.value("config", json::object());
    report.n_total = j.value("n_total", 0);
    report.n_correct = j.value("n_correct", 0);
    report.accuracy = j.value("accuracy", 0.0);
    report.n_fallback = j.value("n_fallback", 0);
    report.n_failed = j.value("n_failed", 0);
    if (j.contains("per_subtopic")) {
        for (auto it = j["per_subtopic"].begin(); it != j["per_subtopic"].end(); ++it) {
            SubtopicStats s;
            s.n = it.value().value("n", 0);
            s.n_correct = it.value().value("n_correct", 0);
            s.accuracy = it.value().value("accuracy", 0.0);
            report.per_subtopic[it.key()] = s;
        }
    }
    for (const auto& r : j.value("records", json::array())) {
        ItemRecord rec;
        rec.id = r.at("id").get<std::string>();
        rec.question = r.value("question", "");
        rec.gold_answer = r.value("gold", "");
        rec.subtopic = r.value("subtopic", "");
        rec.wall_time = r.value("wall_time", 0.0);
        rec.failed = r.value("failed", false);
        rec.failure = r.value("failure", "");
        rec.checker_timed_out = r.value("checker_timed_out", false);
        const json& res = r.at("result");
        for (const auto& d : res.value("demos", json::array()))
            rec.result.demos.push_back(demonstration_from_json(d));
        rec.result.demo_provenance =
            demo_provenance_from_string(res.value("demo_provenance", "none"));
        rec.result.generation_attempts = res.value("generation_attempts", 0);
        rec.result.final_raw = res.value("final_raw", "");
        if (res.contains("final_answer")) {
            const auto& na = res["final_answer"];
            NormalizedAnswer a;
            a.kind = answer_kind_from_string(na.at("kind").get<std::string>());
            switch (a.kind) {
                case AnswerKind::integer: a.integer_value = na.at("value").get<int64_t>(); break;
                case AnswerKind::math_expression:
                    a.expr_canonical = na.at("value").get<std::string>();
                    break;
                case AnswerKind::choice_label: a.label = na.at("value").get<std::string>(); break;
                case AnswerKind::code_body:
                    a.code_text = na.at("value").get<std::string>();
                    break;
            }
            rec.result.final_answer = a;
        }
        if (res.contains("correct")) rec.result.correct = res["correct"].get<bool>();
        for (const auto& entry : res.value("request_log", json::array()))
            rec.result.request_log.push_back(
                {entry.at("key").get<std::string>(),
                 entry.value("purpose", "inference") == std::string("generation")
                     ? PromptPurpose::demo_generation
                     : PromptPurpose::inference});
        report.records.push_back(std::move(rec));
    }
    return report;
}

std::string report_summary_csv(const RunReport& report) {
    std::string csv = "task,strategy,k,n,accuracy,n_fallback,n_failed\n";
    const json& c = report.config_echo;
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.6f", report.accuracy);
    csv += c.value("task", "") + "," + c.value("strategy", "") + "," +
           std::to_string(c.value("k", 0)) + "," + std::to_string(report.n_total) + "," + acc +
           "," + std::to_string(report.n_fallback) + "," + std::to_string(report.n_failed) + "\n";
    return csv;
}

json transition_to_json(const TransitionTable& t) {
    json j;
    j["both_correct"] = t.both_correct;
    j["a_only"] = t.a_only;
    j["b_only"] = t.b_only;
    j["both_wrong"] = t.both_wrong;
    j["n_total"] = t.total();
    j["ids"] = {{"both_correct", t.ids_both_correct},
                {"a_only", t.ids_a_only},
                {"b_only", t.ids_b_only},
                {"both_wrong", t.ids_both_wrong}};
    return j;
}

void write_report(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    atomic_write_file((fs::path(out_dir) / "report.json").string(),
                      report_to_json(report).dump(2) + "\n");
    atomic_write_file((fs::path(out_dir) / "summary.csv").string(), report_summary_csv(report));
}

}  // namespace sec
