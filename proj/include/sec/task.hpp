#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sec/answers.hpp"
#include "sec/demo_format.hpp"

namespace sec {

enum class TaskId { gsm8k, math, arc, mmlu, ceval, humaneval, base5, custom };

const char* to_string(TaskId id);
TaskId task_id_from_string(const std::string& s);

// Generation instruction with its spelled-out shot count; the count token is
// re-rendered from k at prompt-build time so k stays a free parameter.
struct InstructionSpec {
    std::string text;         // verbatim instruction
    std::string count_token;  // the count as it appears in the text
    bool count_as_word = true;
};

struct TaskSpec {
    TaskId task_id = TaskId::custom;
    AnswerDomain answer_domain;
    int default_shots = 4;
    InstructionSpec gen_instruction_vanilla;
    std::optional<InstructionSpec> gen_instruction_cot;
    FormatTemplate format_template_vanilla;
    std::optional<FormatTemplate> format_template_cot;
    bool supports_cot = true;
    std::optional<std::string> subtopic_field;  // spliced into the "{}" placeholder
};

struct TestCase {
    std::string id;
    std::string question;
    std::string gold_answer;
    std::vector<std::string> choice_labels;  // parallel with choice_texts
    std::vector<std::string> choice_texts;
    std::string subtopic;
    std::map<std::string, std::string> aux;  // e.g. HumanEval entry_point, test
};

TaskSpec builtin_task(TaskId id);
TaskSpec builtin_task(const std::string& name);

// The instruction text with the shot count re-rendered for k and the "{}"
// subcategory placeholder filled in.
std::string render_gen_instruction(const InstructionSpec& spec, int k,
                                   const std::string& subtopic);

// JSONL, one case per line; blank lines are ignored. Validates each case
// against the task's answer domain. Throws IoError/SchemaError.
std::vector<TestCase> load_dataset(const std::string& path, const TaskSpec& task);

std::string serialize_case(const TestCase& c);
std::string serialize_dataset(const std::vector<TestCase>& cases);

// n uniformly random 3-digit base-5 addition problems from a seeded
// generator; identical (n, seed) gives an identical dataset.
std::vector<TestCase> generate_base5_dataset(int n, uint64_t seed);

// Digit-wise base-5 addition over numeral strings (most significant first).
std::string base5_add(const std::string& x, const std::string& y);

// The task's domain with the label set narrowed to the case's own choices
// when it has any.
AnswerDomain effective_domain(const TaskSpec& task, const TestCase& c);

}  // namespace sec
