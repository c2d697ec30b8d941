#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sec {

enum class AnswerKind { integer, math_expression, choice_label, code_body };

const char* to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(const std::string& s);

struct AnswerDomain {
    AnswerKind kind = AnswerKind::integer;
    std::vector<std::string> labels;  // choice_label only

    bool operator==(const AnswerDomain&) const = default;
};

struct NormalizedAnswer {
    AnswerKind kind = AnswerKind::integer;
    int64_t integer_value = 0;     // integer
    std::string expr_canonical;    // math_expression
    std::string label;             // choice_label
    std::string code_text;         // code_body

    bool operator==(const NormalizedAnswer&) const = default;
};

// Text form of the answer as fed back into prompts (e.g. "6" for a rounded
// integer, the canonical expression for math).
std::string answer_display(const NormalizedAnswer& answer);

// First maximal numeric token (optional sign, comma thousand-separators,
// optional decimal part), rounded to the nearest integer with ties away
// from zero. Throws NoNumberFound.
NormalizedAnswer extract_numeric_integer(const std::string& answer_text);

// Canonicalizes a LaTeX-ish math answer via a fixed, ordered rule table
// (documented in docs/formats.md). Total: empty input yields the empty
// canonical form. Idempotent.
NormalizedAnswer normalize_math_expression(const std::string& answer_text);

// First standalone label token ("B", "(C)", "A."); when none is present and
// choice texts are supplied, falls back to an exact match of a choice text.
// Throws NoLabelFound.
NormalizedAnswer extract_choice_label(const std::string& answer_text,
                                      const std::vector<std::string>& labels,
                                      const std::vector<std::string>& texts = {});

// Strips markdown fences and one repeated function header; indentation of
// the body is preserved. Throws EmptyBody.
NormalizedAnswer extract_code_body(const std::string& raw);

struct Demonstration;

// Runs the domain's extractor on raw_answer and returns a copy with
// normalized_answer populated. Throws ValidationFailed; never touches
// question/rationale.
Demonstration validate_demo_answer(const Demonstration& demo, const AnswerDomain& domain);

// Exact-match correctness; gold goes through the same normalization path.
// Code answers need the external checker (eval-runner) and raise
// CheckerRequired here.
bool is_correct(const NormalizedAnswer& predicted, const std::string& gold,
                const AnswerDomain& domain);

// The domain's extractor applied to free text (used for both gold answers
// and final outputs). Throws the extractor's error.
NormalizedAnswer normalize_for_domain(const std::string& text, const AnswerDomain& domain);

}  // namespace sec
