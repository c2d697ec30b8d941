#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "sec/answers.hpp"

namespace sec {

enum class ValueKind { text, latex_answer, label_list, text_list, rationale, answer, code };

enum class Locale { en, zh };

struct FieldSpec {
    std::string label_template;  // "{i}" stands for the 1-based shot index
    ValueKind kind = ValueKind::text;
    std::string placeholder;     // shown in the rendered format instruction
};

struct FormatTemplate {
    std::string block_open;   // "[[" or empty
    std::string block_close;  // "]]" or empty
    std::vector<FieldSpec> fields;
    int separator = 1;        // blank lines between blocks
    Locale locale = Locale::en;
    std::string instruction_prefix;  // e.g. "Please output in the following form "
    bool continuation = false;  // instruction continues the generation sentence

    bool has_kind(ValueKind kind) const;
};

std::string render_label(const FieldSpec& field, int index);

// The output-format instruction for k shots: first block, ellipsis, k-th
// block, in the template's canonical shape (literal "\n" markers as text).
std::string render_format_instruction(const FormatTemplate& tmpl, int k);

enum class Provenance { model_generated, human_crafted, vanilla_fallback };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct Demonstration {
    int index = 0;  // 1-based, unique within a set
    std::string question;
    std::optional<std::string> rationale;  // present iff a CoT template
    std::string raw_answer;
    std::optional<NormalizedAnswer> normalized_answer;
    std::vector<std::string> choice_labels;  // parallel with choice_texts
    std::vector<std::string> choice_texts;
    Provenance provenance = Provenance::model_generated;

    bool operator==(const Demonstration&) const = default;
};

// Strict pass first (exact labels, delimiters, indices 1..k in order); on
// failure a lenient pass tolerates case changes, missing block delimiters,
// full-width colons and reordered label/text fields. Throws ParseError.
std::vector<Demonstration> parse_demonstrations(const std::string& raw,
                                                const FormatTemplate& tmpl, int k);

struct ParseOutcome {
    std::vector<Demonstration> demos;
    bool lenient_used = false;
};

ParseOutcome parse_demonstrations_detailed(const std::string& raw, const FormatTemplate& tmpl,
                                           int k);

// Canonical text: exact labels, a single space after each colon, blank-line
// separators as the template specifies. Throws InvariantViolation.
std::string render_demonstrations(const std::vector<Demonstration>& demos,
                                  const FormatTemplate& tmpl);

// Answer span of a final inference output: the text after the last
// case-insensitive "the answer is", else the last non-empty line. Total.
std::string extract_final_answer_text(const std::string& raw, bool cot);

nlohmann::ordered_json demonstration_to_json(const Demonstration& demo);
Demonstration demonstration_from_json(const nlohmann::ordered_json& j);

// Human-crafted demos file: JSONL of Demonstration records; provenance is
// forced to human_crafted on load.
std::vector<Demonstration> load_demos_file(const std::string& path);

}  // namespace sec
