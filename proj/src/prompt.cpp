#include "sec/prompt.hpp"

#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::zero_shot: return "zero-shot";
        case Strategy::zero_shot_cot: return "zero-shot-cot";
        case Strategy::vanilla_icl: return "icl";
        case Strategy::cot_icl: return "cot-icl";
        case Strategy::vanilla_sec: return "sec";
        case Strategy::cot_sec: return "cot-sec";
    }
    return "zero-shot";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "zero-shot") return Strategy::zero_shot;
    if (s == "zero-shot-cot") return Strategy::zero_shot_cot;
    if (s == "icl") return Strategy::vanilla_icl;
    if (s == "cot-icl") return Strategy::cot_icl;
    if (s == "sec") return Strategy::vanilla_sec;
    if (s == "cot-sec") return Strategy::cot_sec;
    throw FatalConfig("unknown strategy: " + s +
                      " (expected zero-shot, zero-shot-cot, icl, cot-icl, sec or cot-sec)");
}

bool is_cot(Strategy s) {
    return s == Strategy::zero_shot_cot || s == Strategy::cot_icl || s == Strategy::cot_sec;
}

bool is_sec(Strategy s) { return s == Strategy::vanilla_sec || s == Strategy::cot_sec; }

bool is_icl(Strategy s) { return s == Strategy::vanilla_icl || s == Strategy::cot_icl; }

const char* to_string(PromptPurpose p) {
    return p == PromptPurpose::demo_generation ? "generation" : "inference";
}

namespace {

std::string choice_lines(const std::vector<std::string>& labels,
                         const std::vector<std::string>& texts) {
    std::string out;
    for (size_t i = 0; i < labels.size() && i < texts.size(); ++i)
        out += labels[i] + ". " + texts[i] + "\n";
    return out;
}

// One demo (or the trailing test block, when demo == nullptr) in the
// inference prompt's question/answer shape.
std::string inference_block(const std::string& question,
                            const std::vector<std::string>& labels,
                            const std::vector<std::string>& texts, const Demonstration* demo,
                            bool cot) {
    std::string out = "Question: " + question + "\n";
    out += choice_lines(labels, texts);
    if (demo) {
        if (demo->rationale) out += "Solution: " + *demo->rationale + "\n";
        std::string shown = demo->normalized_answer ? answer_display(*demo->normalized_answer)
                                                    : demo->raw_answer;
        out += "Answer: " + shown + "\n";
    } else {
        out += cot ? "Solution:" : "Answer:";
    }
    return out;
}

}  // namespace

PromptBundle build_generation_prompt(const TestCase& test_case, const TaskSpec& task, bool cot,
                                     int k, int attempt, const RetryPolicy& policy) {
    if (cot && !task.supports_cot)
        throw CotUnsupported("task " + std::string(to_string(task.task_id)) +
                             " has no CoT generation prompt");
    if (k < 1) throw std::invalid_argument("k must be at least 1");

    const InstructionSpec& instruction =
        cot ? *task.gen_instruction_cot : task.gen_instruction_vanilla;
    const FormatTemplate& tmpl = cot ? *task.format_template_cot : task.format_template_vanilla;

    std::string content = test_case.question;
    if (!test_case.choice_labels.empty())
        content += "\n" + choice_lines(test_case.choice_labels, test_case.choice_texts);
    content += "\n\n";
    content += render_gen_instruction(instruction, k, test_case.subtopic);
    content += tmpl.continuation ? " " : "\n";
    content += render_format_instruction(tmpl, k);
    if (attempt > 0) {
        std::string line = policy.perturbation_template;
        size_t pos = line.find("{attempt}");
        if (pos != std::string::npos) line.replace(pos, 9, std::to_string(attempt));
        content += "\n" + line;
    }

    PromptBundle bundle;
    bundle.messages = {{Role::user, content}};
    bundle.temperature = attempt == 0 ? policy.base_temperature : policy.retry_temperature;
    bundle.purpose = PromptPurpose::demo_generation;
    bundle.shots_expected = k;
    return bundle;
}

PromptBundle build_inference_prompt(const TestCase& test_case, const TaskSpec& task,
                                    Strategy strategy, const std::vector<Demonstration>& demos,
                                    int k) {
    if (is_cot(strategy) && !task.supports_cot)
        throw CotUnsupported("task " + std::string(to_string(task.task_id)) +
                             " does not support CoT");
    const bool zero_shot = strategy == Strategy::zero_shot || strategy == Strategy::zero_shot_cot;
    if (zero_shot && !demos.empty())
        throw ShotCountMismatch("zero-shot strategies take no demonstrations");
    if (!zero_shot && static_cast<int>(demos.size()) != k)
        throw ShotCountMismatch("expected " + std::to_string(k) + " demonstrations, got " +
                                std::to_string(demos.size()));

    std::string content;
    for (const auto& demo : demos) {
        content += inference_block(demo.question, demo.choice_labels, demo.choice_texts, &demo,
                                   is_cot(strategy));
        content += "\n";
    }
    content += inference_block(test_case.question, test_case.choice_labels,
                               test_case.choice_texts, nullptr, is_cot(strategy));
    if (strategy == Strategy::zero_shot_cot) content += " Let's think step by step";

    PromptBundle bundle;
    bundle.messages = {{Role::user, content}};
    bundle.temperature = 0.0;
    bundle.purpose = PromptPurpose::inference;
    bundle.shots_expected = static_cast<int>(demos.size());
    return bundle;
}

}  // namespace sec
