#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sec/pipeline.hpp"

namespace sec {

struct RunConfig {
    TaskId task_id = TaskId::gsm8k;
    Strategy strategy = Strategy::zero_shot;
    // absent: the task's default; explicit 0: zero-shot-equivalent rendering
    std::optional<int> k;
    RetryPolicy policy;
    BackendConfig backend;
    std::string model = "gpt-3.5-turbo";
    std::string dataset_path;
    std::string icl_demos_path;
    std::optional<int> limit;
    int concurrency = 4;
    std::string cache_dir;  // empty disables caching
    std::string checker_cmd;
    double checker_timeout = 10.0;
    uint64_t seed = 0;
    std::optional<int> max_tokens;
};

struct ItemRecord {
    std::string id;
    std::string question;
    std::string gold_answer;
    std::string subtopic;
    SecItemResult result;
    double wall_time = 0.0;  // seconds; excluded from report comparisons
    bool failed = false;
    std::string failure;  // stage and cause, when failed
    bool checker_timed_out = false;
};

struct SubtopicStats {
    int n = 0;
    int n_correct = 0;
    double accuracy = 0.0;
};

struct RunReport {
    json config_echo;
    int n_total = 0;
    int n_correct = 0;
    double accuracy = 0.0;
    int n_fallback = 0;
    int n_failed = 0;
    std::map<std::string, SubtopicStats> per_subtopic;
    std::vector<ItemRecord> records;  // sorted by case id
};

// Processes the dataset with a bounded worker pool. Per-item failures are
// recorded, never thrown; failed items count as incorrect. A non-null
// backend_override replaces the configured backend (recording, tests).
RunReport run_dataset(const RunConfig& config,
                      std::shared_ptr<Backend> backend_override = nullptr);

// External checker contract: JSON {prompt, body, test, entry_point} on
// stdin; exit 0 means correct. Timeouts mark the record and judge it
// incorrect. Returns the verdict and updates the record in place.
bool check_code(ItemRecord& record, const TestCase& test_case, const std::string& checker_cmd,
                double timeout_seconds);

struct TransitionTable {
    int both_correct = 0;
    int a_only = 0;  // correct in a, wrong in b
    int b_only = 0;
    int both_wrong = 0;
    std::vector<std::string> ids_both_correct, ids_a_only, ids_b_only, ids_both_wrong;

    int total() const { return both_correct + a_only + b_only + both_wrong; }
};

// Correct/incorrect cross-tabulation of two runs over the same id set.
// Throws IdMismatch when the sets differ.
TransitionTable compare_runs(const RunReport& a, const RunReport& b);

// One run per k over a shared cache; duplicates are dropped with a warning
// and reports come back ordered by k.
std::vector<std::pair<int, RunReport>> shot_sweep(
    const RunConfig& config, std::vector<int> k_values,
    std::shared_ptr<Backend> backend_override = nullptr);

json report_to_json(const RunReport& report);
RunReport report_from_json(const json& j);
std::string report_summary_csv(const RunReport& report);
json transition_to_json(const TransitionTable& table);

// report.json plus summary.csv, written atomically under out_dir.
void write_report(const RunReport& report, const std::string& out_dir);

}  // namespace sec
