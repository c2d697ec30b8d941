#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sec/backend.hpp"
#include "sec/prompt.hpp"

namespace sec {

enum class DemoProvenance { model_generated, vanilla_fallback, failed, none };

const char* to_string(DemoProvenance p);
DemoProvenance demo_provenance_from_string(const std::string& s);

struct RequestLogEntry {
    std::string key;  // request key of the issued call
    PromptPurpose purpose = PromptPurpose::inference;

    bool operator==(const RequestLogEntry&) const = default;
};

struct SecItemResult {
    std::vector<Demonstration> demos;
    DemoProvenance demo_provenance = DemoProvenance::none;
    int generation_attempts = 0;
    std::string final_raw;
    std::optional<NormalizedAnswer> final_answer;
    std::optional<bool> correct;
    std::vector<RequestLogEntry> request_log;
};

struct GenerationResult {
    std::vector<Demonstration> demos;
    int attempts = 0;
};

// Attempt 0 uses the base temperature and the unperturbed prompt; each retry
// appends the perturbation line and samples at the retry temperature. An
// attempt succeeds only when parsing yields exactly k demos and every one
// passes answer validation. Throws GenerationExhausted.
GenerationResult generate_demonstrations(const TestCase& test_case, const TaskSpec& task,
                                         bool cot, int k, const RetryPolicy& policy,
                                         Backend& backend, const std::string& model,
                                         std::vector<RequestLogEntry>* request_log = nullptr);

struct ItemOptions {
    std::string model = "gpt-3.5-turbo";
    std::optional<int> max_tokens;
    // When set, code-domain items skip in-process correctness (the runner
    // judges them through the external checker).
    bool defer_code_judgement = true;
};

// The full per-item pipeline: demo generation (SEC), the CoT-to-vanilla
// fallback, inference, answer extraction and correctness. Throws ItemFailed
// when the fallback also exhausts or inference fails terminally.
SecItemResult run_item(const TestCase& test_case, const TaskSpec& task, Strategy strategy, int k,
                       const RetryPolicy& policy, Backend& backend,
                       const std::vector<Demonstration>& icl_demos = {},
                       const ItemOptions& options = {});

}  // namespace sec
