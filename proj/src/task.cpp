#include "sec/task.hpp"

#include <random>

#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

const char* to_string(TaskId id) {
    switch (id) {
        case TaskId::gsm8k: return "gsm8k";
        case TaskId::math: return "math";
        case TaskId::arc: return "arc";
        case TaskId::mmlu: return "mmlu";
        case TaskId::ceval: return "ceval";
        case TaskId::humaneval: return "humaneval";
        case TaskId::base5: return "base5";
        case TaskId::custom: return "custom";
    }
    return "custom";
}

TaskId task_id_from_string(const std::string& s) {
    if (s == "gsm8k") return TaskId::gsm8k;
    if (s == "math") return TaskId::math;
    if (s == "arc") return TaskId::arc;
    if (s == "mmlu") return TaskId::mmlu;
    if (s == "ceval" || s == "c-eval") return TaskId::ceval;
    if (s == "humaneval") return TaskId::humaneval;
    if (s == "base5") return TaskId::base5;
    if (s == "custom") return TaskId::custom;
    throw UnknownTask("unknown task: " + s);
}

// ---------------------------------------------------------------------------
// builtin specs

namespace {

FieldSpec field(const char* label, ValueKind kind, const char* placeholder) {
    return FieldSpec{label, kind, placeholder};
}

FormatTemplate gsm8k_vanilla_template() {
    FormatTemplate t;
    t.separator = 0;
    t.instruction_prefix = "in the following form ";
    t.continuation = true;
    t.fields = {field("Q{i}", ValueKind::text, "{question}"),
                field("A{i}", ValueKind::answer, "{answer}")};
    return t;
}

FormatTemplate gsm8k_cot_template() {
    FormatTemplate t;
    t.separator = 1;
    t.instruction_prefix = "in the following form ";
    t.continuation = true;
    t.fields = {field("Q{i}", ValueKind::text, "{question}"),
                field("S{i}", ValueKind::rationale, "{solution}"),
                field("A{i}", ValueKind::answer, "{answer}")};
    return t;
}

FormatTemplate math_vanilla_template() {
    FormatTemplate t;
    t.block_open = "[[";
    t.block_close = "]]";
    t.instruction_prefix = "Please output in the following form ";
    t.fields = {field("Question{i}", ValueKind::text, "{question}"),
                field("Answer{i}", ValueKind::latex_answer, "$answer in Latex$")};
    return t;
}

FormatTemplate math_cot_template() {
    FormatTemplate t = math_vanilla_template();
    t.fields = {field("Question{i}", ValueKind::text, "{question}"),
                field("Sol{i}", ValueKind::rationale, "[step by step solution]"),
                field("Answer{i}", ValueKind::latex_answer, "$answer in Latex$")};
    return t;
}

FormatTemplate arc_vanilla_template() {
    FormatTemplate t;
    t.block_open = "[[";
    t.block_close = "]]";
    t.instruction_prefix = "in the following form ";
    t.continuation = true;
    t.fields = {field("Question{i}", ValueKind::text, "{question}"),
                field("Label{i}", ValueKind::label_list, "[choice labels]"),
                field("Text{i}", ValueKind::text_list, "[choice text]"),
                field("Ans{i}", ValueKind::answer, "{answer label}")};
    return t;
}

FormatTemplate arc_cot_template() {
    FormatTemplate t = arc_vanilla_template();
    t.fields = {field("Question{i}", ValueKind::text, "{question}"),
                field("Label{i}", ValueKind::label_list, "[choice labels]"),
                field("Text{i}", ValueKind::text_list, "[choice text]"),
                field("Sol{i}", ValueKind::rationale, "{the explanation of the right answer}"),
                field("Ans{i}", ValueKind::answer, "{answer label}")};
    return t;
}

FormatTemplate mmlu_vanilla_template() {
    FormatTemplate t;
    t.block_open = "[[";
    t.block_close = "]]";
    t.instruction_prefix = "Please output in the following form ";
    t.fields = {field("Question{i}", ValueKind::text, "[question]"),
                field("Label{i}", ValueKind::label_list, "[choice labels]"),
                field("Text{i}", ValueKind::text_list, "[choice text]"),
                field("Ans{i}", ValueKind::answer, "[A or B or C or D]")};
    return t;
}

FormatTemplate mmlu_cot_template() {
    FormatTemplate t = mmlu_vanilla_template();
    t.fields = {field("Question{i}", ValueKind::text, "[question]"),
                field("Label{i}", ValueKind::label_list, "[choice labels]"),
                field("Text{i}", ValueKind::text_list, "[choice text]"),
                field("Sol{i}", ValueKind::rationale, "[reason to choose your answer]"),
                field("Ans{i}", ValueKind::answer, "[A or B or C or D]")};
    return t;
}

FormatTemplate ceval_vanilla_template() {
    FormatTemplate t;
    t.block_open = "[[";
    t.block_close = "]]";
    t.locale = Locale::zh;
    t.instruction_prefix = "请以以下格式输出答案：";
    t.fields = {field("题目{i}", ValueKind::text, "[题目]"),
                field("选项标签{i}", ValueKind::label_list, "[选项标签]"),
                field("选项内容{i}", ValueKind::text_list, "[选项内容]"),
                field("答案{i}", ValueKind::answer, "[A或B或C或D]")};
    return t;
}

FormatTemplate ceval_cot_template() {
    FormatTemplate t = ceval_vanilla_template();
    t.fields = {field("题目{i}", ValueKind::text, "[题目]"),
                field("选项标签{i}", ValueKind::label_list, "[选项标签]"),
                field("选项内容{i}", ValueKind::text_list, "[选项内容]"),
                field("解析{i}", ValueKind::rationale, "[逐步的推导出答案的过程]"),
                field("答案{i}", ValueKind::answer, "[A或B或C或D]")};
    return t;
}

FormatTemplate humaneval_template() {
    FormatTemplate t;
    t.instruction_prefix = "Please output in the following form: ";
    t.fields = {field("[[Function Header{i}]]", ValueKind::text, "{function header}"),
                field("[[Function Body{i}]]", ValueKind::code, "{function body}")};
    return t;
}

std::vector<std::string> abcd() { return {"A", "B", "C", "D"}; }

}  // namespace

TaskSpec builtin_task(TaskId id) {
    TaskSpec t;
    t.task_id = id;
    switch (id) {
        case TaskId::gsm8k:
            t.answer_domain = {AnswerKind::integer, {}};
            t.default_shots = 5;
            t.gen_instruction_vanilla = {
                "Please generate five similar questions with integer answer", "five", true};
            t.gen_instruction_cot = InstructionSpec{
                "Please generate five similar questions with step by step reasoning process "
                "and an integer answer",
                "five", true};
            t.format_template_vanilla = gsm8k_vanilla_template();
            t.format_template_cot = gsm8k_cot_template();
            return t;
        case TaskId::math:
            t.answer_domain = {AnswerKind::math_expression, {}};
            t.default_shots = 4;
            t.gen_instruction_vanilla = {
                "Please follwing the above question, generate five similar questions with its "
                "answer in Latex.",
                "five", true};
            t.gen_instruction_cot = InstructionSpec{
                "Please follwing the above question, generate 5 similar questions with its "
                "step by step solution and answer in Latex.",
                "5", false};
            t.format_template_vanilla = math_vanilla_template();
            t.format_template_cot = math_cot_template();
            return t;
        case TaskId::arc:
            t.answer_domain = {AnswerKind::choice_label, abcd()};
            t.default_shots = 5;
            t.gen_instruction_vanilla = {
                "Follwing the above question, generate five similar multiple choice science "
                "questions with its choice labels, choice text and an answer label",
                "five", true};
            t.gen_instruction_cot = InstructionSpec{
                "Follwing the above question, generate ten similar multiple choice science "
                "questions with its choice labels, choice text, the explanation of the right "
                "answer and an answer label",
                "ten", true};
            t.format_template_vanilla = arc_vanilla_template();
            t.format_template_cot = arc_cot_template();
            return t;
        case TaskId::mmlu:
            t.answer_domain = {AnswerKind::choice_label, abcd()};
            t.default_shots = 4;
            t.subtopic_field = "subtopic";
            t.gen_instruction_vanilla = {
                "Please follwing the above question, create five similar multiple choice {} "
                "questions with its choice labels, choice text and an answer label (A or B or "
                "C or D). Note that each question should be complete and can be answered "
                "independently.",
                "five", true};
            t.gen_instruction_cot = InstructionSpec{
                "Follwing the above question, generate five similar multiple choice {} "
                "questions with its choice labels, choice text, the step by step reason to "
                "choose your answer and an answer label (A or B or C or D). Note that each "
                "question should be complete and can be answered independently.",
                "five", true};
            t.format_template_vanilla = mmlu_vanilla_template();
            t.format_template_cot = mmlu_cot_template();
            return t;
        case TaskId::ceval:
            t.answer_domain = {AnswerKind::choice_label, abcd()};
            t.default_shots = 4;
            t.subtopic_field = "subtopic";
            t.gen_instruction_vanilla = {
                "请模仿上面的问题，生成5个相似的关于{}考试的单项选择题，和这个这个题目的选项标签，"
                "选项内容和答案。每个问题必须是完整且能被独立回答的。",
                "5", false};
            t.gen_instruction_cot = InstructionSpec{
                "请模仿上面的问题，生成5个相似的关于{}考试的单项选择题，和这个这个题目的选项标签，"
                "选项内容，逐步的推导出答案的过程和正确答案。每个问题必须是完整且能被独立回答的。",
                "5", false};
            t.format_template_vanilla = ceval_vanilla_template();
            t.format_template_cot = ceval_cot_template();
            return t;
        case TaskId::humaneval:
            t.answer_domain = {AnswerKind::code_body, {}};
            t.default_shots = 4;
            t.supports_cot = false;
            t.gen_instruction_vanilla = {
                "Following the example, generate 5 similar function headers with its function "
                "body in python.",
                "5", false};
            t.format_template_vanilla = humaneval_template();
            return t;
        case TaskId::base5:
            // synthetic stress set; shares the GSM8K integer pipeline
            t.answer_domain = {AnswerKind::integer, {}};
            t.default_shots = 5;
            t.gen_instruction_vanilla = {
                "Please generate five similar questions with integer answer", "five", true};
            t.gen_instruction_cot = InstructionSpec{
                "Please generate five similar questions with step by step reasoning process "
                "and an integer answer",
                "five", true};
            t.format_template_vanilla = gsm8k_vanilla_template();
            t.format_template_cot = gsm8k_cot_template();
            return t;
        case TaskId::custom:
            break;
    }
    throw UnknownTask("no builtin spec for task: " + std::string(to_string(id)));
}

TaskSpec builtin_task(const std::string& name) { return builtin_task(task_id_from_string(name)); }

std::string render_gen_instruction(const InstructionSpec& spec, int k,
                                   const std::string& subtopic) {
    std::string out = spec.text;
    if (!spec.count_token.empty()) {
        size_t pos = out.find(spec.count_token);
        if (pos != std::string::npos)
            out.replace(pos, spec.count_token.size(),
                        spec.count_as_word ? count_word(k) : std::to_string(k));
    }
    size_t brace = out.find("{}");
    if (brace != std::string::npos) out.replace(brace, 2, subtopic);
    return out;
}

// ---------------------------------------------------------------------------
// dataset loading

namespace {

using json = nlohmann::ordered_json;

std::string require_string(const json& j, const char* key, int line) {
    if (!j.contains(key) || !j[key].is_string())
        throw SchemaError(std::string("case is missing string field \"") + key + "\"", line, key);
    return j[key].get<std::string>();
}

}  // namespace

std::vector<TestCase> load_dataset(const std::string& path, const TaskSpec& task) {
    std::string text = read_file(path);
    std::vector<TestCase> cases;
    int line_no = 0;
    const bool wants_choices = task.answer_domain.kind == AnswerKind::choice_label;
    for (const auto& line : split(text, "\n")) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw SchemaError("invalid JSON: " + std::string(e.what()), line_no);
        }
        TestCase c;
        c.id = require_string(j, "id", line_no);
        c.question = require_string(j, "question", line_no);
        c.gold_answer = require_string(j, "answer", line_no);
        if (j.contains("choices")) {
            const auto& ch = j["choices"];
            if (!ch.is_object() || !ch.contains("labels") || !ch.contains("texts"))
                throw SchemaError("choices must hold labels and texts", line_no, "choices");
            c.choice_labels = ch["labels"].get<std::vector<std::string>>();
            c.choice_texts = ch["texts"].get<std::vector<std::string>>();
            if (c.choice_labels.size() != c.choice_texts.size())
                throw SchemaError("choices labels/texts differ in length", line_no, "choices");
        }
        if (wants_choices && c.choice_labels.empty())
            throw SchemaError("choice task requires \"choices\"", line_no, "choices");
        if (!wants_choices && !c.choice_labels.empty())
            throw SchemaError("task without choice answers has \"choices\"", line_no, "choices");
        if (j.contains("subtopic")) c.subtopic = j["subtopic"].get<std::string>();
        if (j.contains("aux")) {
            for (auto it = j["aux"].begin(); it != j["aux"].end(); ++it) {
                if (!it.value().is_string())
                    throw SchemaError("aux values must be strings", line_no, "aux");
                c.aux[it.key()] = it.value().get<std::string>();
            }
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

std::string serialize_case(const TestCase& c) {
    json j;
    j["id"] = c.id;
    j["question"] = c.question;
    j["answer"] = c.gold_answer;
    if (!c.choice_labels.empty())
        j["choices"] = {{"labels", c.choice_labels}, {"texts", c.choice_texts}};
    if (!c.subtopic.empty()) j["subtopic"] = c.subtopic;
    if (!c.aux.empty()) {
        json aux = json::object();
        for (const auto& [k, v] : c.aux) aux[k] = v;
        j["aux"] = aux;
    }
    return j.dump();
}

std::string serialize_dataset(const std::vector<TestCase>& cases) {
    std::string out;
    for (const auto& c : cases) {
        out += serialize_case(c);
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// base-5 generator

std::string base5_add(const std::string& x, const std::string& y) {
    std::string a(x.rbegin(), x.rend());
    std::string b(y.rbegin(), y.rend());
    std::string sum;
    int carry = 0;
    for (size_t i = 0; i < a.size() || i < b.size() || carry; ++i) {
        int da = i < a.size() ? a[i] - '0' : 0;
        int db = i < b.size() ? b[i] - '0' : 0;
        int s = da + db + carry;
        carry = s / 5;
        sum.push_back(static_cast<char>('0' + s % 5));
    }
    return {sum.rbegin(), sum.rend()};
}

std::vector<TestCase> generate_base5_dataset(int n, uint64_t seed) {
    if (n < 1) throw FatalConfig("base-5 dataset size must be at least 1");
    std::mt19937_64 rng(seed);
    // exact uniform digits via rejection, independent of library distributions
    auto draw = [&rng](uint64_t range) {
        uint64_t bound = UINT64_MAX - UINT64_MAX % range;
        uint64_t v;
        do {
            v = rng();
        } while (v >= bound);
        return v % range;
    };
    auto numeral = [&] {
        std::string s;
        s.push_back(static_cast<char>('1' + draw(4)));  // leading digit nonzero
        s.push_back(static_cast<char>('0' + draw(5)));
        s.push_back(static_cast<char>('0' + draw(5)));
        return s;
    };
    std::vector<TestCase> cases;
    cases.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::string x = numeral();
        std::string y = numeral();
        TestCase c;
        char id[24];
        std::snprintf(id, sizeof(id), "base5-%04d", i + 1);
        c.id = id;
        c.question = "What is " + x + " + " + y + " in base 5?";
        c.gold_answer = base5_add(x, y);
        cases.push_back(std::move(c));
    }
    return cases;
}

AnswerDomain effective_domain(const TaskSpec& task, const TestCase& c) {
    AnswerDomain d = task.answer_domain;
    if (d.kind == AnswerKind::choice_label && !c.choice_labels.empty())
        d.labels = c.choice_labels;
    return d;
}

}  // namespace sec
