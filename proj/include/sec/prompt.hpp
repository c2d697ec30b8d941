#pragma once

#include <string>
#include <vector>

#include "sec/chat.hpp"
#include "sec/demo_format.hpp"
#include "sec/task.hpp"

namespace sec {

enum class Strategy { zero_shot, zero_shot_cot, vanilla_icl, cot_icl, vanilla_sec, cot_sec };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);  // CLI names: zero-shot, icl, sec, ...

bool is_cot(Strategy s);
bool is_sec(Strategy s);
bool is_icl(Strategy s);

enum class PromptPurpose { demo_generation, inference };

const char* to_string(PromptPurpose p);

struct PromptBundle {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    PromptPurpose purpose = PromptPurpose::inference;
    int shots_expected = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    double retry_temperature = 1.0;
    double base_temperature = 0.0;
    std::string perturbation_template =
        "Attempt {attempt}: please strictly follow the output format.";
};

// The demonstration-generation prompt: test input, then the generation
// instruction (subcategory spliced in), then the output-format instruction
// rendered for k shots. attempt > 0 appends the retry perturbation line and
// switches to the retry temperature.
PromptBundle build_generation_prompt(const TestCase& test_case, const TaskSpec& task, bool cot,
                                     int k, int attempt, const RetryPolicy& policy = {});

// The inference prompt: demos in input order, then the test question. CoT
// strategies end with "Solution:", vanilla ones with "Answer:"; zero-shot
// CoT ends with the step-by-step trigger.
PromptBundle build_inference_prompt(const TestCase& test_case, const TaskSpec& task,
                                    Strategy strategy, const std::vector<Demonstration>& demos,
                                    int k);

}  // namespace sec
