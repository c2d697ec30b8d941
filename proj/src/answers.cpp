#include "sec/answers.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "sec/demo_format.hpp"
#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

const char* to_string(AnswerKind kind) {
    switch (kind) {
        case AnswerKind::integer: return "integer";
        case AnswerKind::math_expression: return "math_expression";
        case AnswerKind::choice_label: return "choice_label";
        case AnswerKind::code_body: return "code_body";
    }
    return "integer";
}

AnswerKind answer_kind_from_string(const std::string& s) {
    if (s == "integer") return AnswerKind::integer;
    if (s == "math_expression") return AnswerKind::math_expression;
    if (s == "choice_label") return AnswerKind::choice_label;
    if (s == "code_body") return AnswerKind::code_body;
    throw SchemaError("unknown answer kind: " + s);
}

std::string answer_display(const NormalizedAnswer& answer) {
    switch (answer.kind) {
        case AnswerKind::integer: return std::to_string(answer.integer_value);
        case AnswerKind::math_expression: return answer.expr_canonical;
        case AnswerKind::choice_label: return answer.label;
        case AnswerKind::code_body: return answer.code_text;
    }
    return {};
}

// ---------------------------------------------------------------------------
// integer extraction

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Scans one numeric token starting at `pos` (which must point at a digit or
// at a sign/dot immediately followed by a digit). Returns one-past-the-end.
size_t scan_numeric_token(const std::string& s, size_t pos, std::string& digits_out,
                          std::string& frac_out, bool& negative) {
    size_t i = pos;
    negative = false;
    if (s[i] == '+' || s[i] == '-') {
        negative = s[i] == '-';
        ++i;
    }
    digits_out.clear();
    frac_out.clear();
    while (i < s.size() && is_digit(s[i])) digits_out.push_back(s[i++]);
    // comma counts only as a thousand separator: ",ddd" not followed by a
    // fourth digit
    while (!digits_out.empty() && i < s.size() && s[i] == ',') {
        bool group = i + 4 <= s.size() && is_digit(s[i + 1]) && is_digit(s[i + 2]) &&
                     is_digit(s[i + 3]) && (i + 4 == s.size() || !is_digit(s[i + 4]));
        if (!group) break;
        digits_out.append(s, i + 1, 3);
        i += 4;
    }
    if (i < s.size() && s[i] == '.' && i + 1 < s.size() && is_digit(s[i + 1])) {
        ++i;
        while (i < s.size() && is_digit(s[i])) frac_out.push_back(s[i++]);
    }
    return i;
}

int64_t round_token(const std::string& digits, const std::string& frac, bool negative) {
    std::string trimmed = digits;
    size_t nz = trimmed.find_first_not_of('0');
    trimmed = nz == std::string::npos ? "" : trimmed.substr(nz);
    int64_t value = 0;
    if (trimmed.size() > 18) {
        // out of exact int64 range; fall back to floating point
        long double v = std::strtold((digits + "." + (frac.empty() ? "0" : frac)).c_str(), nullptr);
        value = static_cast<int64_t>(std::llroundl(v));
    } else {
        for (char c : trimmed) value = value * 10 + (c - '0');
        if (!frac.empty() && frac[0] >= '5') ++value;  // ties away from zero
    }
    return negative ? -value : value;
}

}  // namespace

NormalizedAnswer extract_numeric_integer(const std::string& answer_text) {
    for (size_t i = 0; i < answer_text.size(); ++i) {
        char c = answer_text[i];
        bool starts_number = is_digit(c) ||
                             ((c == '+' || c == '-') && i + 1 < answer_text.size() &&
                              is_digit(answer_text[i + 1])) ||
                             (c == '.' && i + 1 < answer_text.size() &&
                              is_digit(answer_text[i + 1]));
        if (!starts_number) continue;
        if (c == '.') {
            // bare ".5": treat as 0.5
            std::string frac;
            size_t j = i + 1;
            while (j < answer_text.size() && is_digit(answer_text[j]))
                frac.push_back(answer_text[j++]);
            return {AnswerKind::integer, round_token("0", frac, false), "", "", ""};
        }
        std::string digits, frac;
        bool negative = false;
        scan_numeric_token(answer_text, i, digits, frac, negative);
        if (digits.empty()) continue;
        return {AnswerKind::integer, round_token(digits, frac, negative), "", "", ""};
    }
    throw NoNumberFound("no numeric token in: " + answer_text.substr(0, 80));
}

// ---------------------------------------------------------------------------
// math expression canonicalization

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    if (from.empty()) return;
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string strip_outer(std::string s) {
    // surrounding whitespace, "$" delimiters, and one final period
    for (;;) {
        std::string before = s;
        s = trim(s);
        while (!s.empty() && s.front() == '$') s.erase(0, 1);
        while (!s.empty() && s.back() == '$') s.pop_back();
        s = trim(s);
        if (!s.empty() && s.back() == '.') s.pop_back();
        if (s == before) return s;
    }
}

// \frac12 -> \frac{1}{2}; \frac{1}2 -> \frac{1}{2}; leaves braced args alone.
std::string brace_frac_args(const std::string& s) {
    std::string out;
    size_t i = 0;
    const std::string frac = "\\frac";
    while (i < s.size()) {
        if (s.compare(i, frac.size(), frac) == 0) {
            out += frac;
            i += frac.size();
            for (int arg = 0; arg < 2 && i < s.size(); ++arg) {
                while (i < s.size() && s[i] == ' ') ++i;
                if (i >= s.size()) break;
                if (s[i] == '{') {
                    int depth = 0;
                    size_t start = i;
                    while (i < s.size()) {
                        if (s[i] == '{') ++depth;
                        if (s[i] == '}') {
                            --depth;
                            if (depth == 0) {
                                ++i;
                                break;
                            }
                        }
                        ++i;
                    }
                    out.append(s, start, i - start);
                } else if (s[i] == '\\') {
                    size_t start = i++;
                    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
                    out += "{" + s.substr(start, i - start) + "}";
                } else {
                    out += "{";
                    out.push_back(s[i++]);
                    out += "}";
                }
            }
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::string drop_text_groups(const std::string& s) {
    std::string out;
    size_t i = 0;
    const std::string text = "\\text{";
    while (i < s.size()) {
        if (s.compare(i, text.size(), text) == 0) {
            size_t j = i + text.size();
            int depth = 1;
            while (j < s.size() && depth > 0) {
                if (s[j] == '{') ++depth;
                if (s[j] == '}') --depth;
                ++j;
            }
            i = j;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::string drop_trailing_units(std::string s) {
    static const char* units[] = {"square units", "square unit", "sq units", "units", "unit",
                                  "degrees", "degree"};
    std::string lowered = to_lower(s);
    for (const char* u : units) {
        if (ends_with(lowered, u)) {
            s.erase(s.size() - std::string(u).size());
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            break;
        }
    }
    return s;
}

// "0.5" -> ".5" unless the zero continues a longer number ("10.5" stays).
std::string dotted_form(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '0' && i + 1 < s.size() && s[i + 1] == '.' && (i == 0 || !is_digit(s[i - 1])) &&
            i + 2 < s.size() && is_digit(s[i + 2])) {
            continue;  // drop the redundant leading zero
        }
        out.push_back(s[i]);
    }
    return out;
}

bool plain_int(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!is_digit(c)) return false;
    return true;
}

}  // namespace

NormalizedAnswer normalize_math_expression(const std::string& answer_text) {
    std::string s = strip_outer(answer_text);
    replace_all(s, "\\left", "");
    replace_all(s, "\\right", "");
    replace_all(s, "\\tfrac", "\\frac");
    replace_all(s, "\\dfrac", "\\frac");
    s = brace_frac_args(s);
    s = drop_text_groups(s);
    replace_all(s, "\\!", "");
    replace_all(s, "°", "");  // degree sign
    replace_all(s, "\\%", "");
    s = drop_trailing_units(s);
    s = dotted_form(s);
    // collapse internal whitespace entirely; spacing is not significant in
    // the compared expressions
    std::string compact;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
    // a plain a/b fraction is the same answer as \frac{a}{b}
    size_t slash = compact.find('/');
    if (slash != std::string::npos) {
        std::string num = compact.substr(0, slash);
        std::string den = compact.substr(slash + 1);
        bool neg = !num.empty() && num[0] == '-';
        if (plain_int(neg ? num.substr(1) : num) && plain_int(den))
            compact = (neg ? "-" : "") + ("\\frac{" + (neg ? num.substr(1) : num) + "}{" + den + "}");
    }
    return {AnswerKind::math_expression, 0, compact, "", ""};
}

// ---------------------------------------------------------------------------
// choice labels

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

}  // namespace

NormalizedAnswer extract_choice_label(const std::string& answer_text,
                                      const std::vector<std::string>& labels,
                                      const std::vector<std::string>& texts) {
    if (labels.empty()) throw NoLabelFound("empty label set");
    size_t best = std::string::npos;
    std::string best_label;
    for (const auto& label : labels) {
        if (label.empty()) continue;
        size_t pos = 0;
        while ((pos = answer_text.find(label, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !is_word_char(answer_text[pos - 1]);
            size_t end = pos + label.size();
            bool right_ok = end >= answer_text.size() || !is_word_char(answer_text[end]);
            if (left_ok && right_ok) {
                if (pos < best) {
                    best = pos;
                    best_label = label;
                }
                break;
            }
            ++pos;
        }
    }
    if (best != std::string::npos)
        return {AnswerKind::choice_label, 0, "", best_label, ""};

    // models sometimes answer with the option content instead of its label
    if (!texts.empty()) {
        std::string wanted = trim(answer_text);
        for (size_t i = 0; i < texts.size() && i < labels.size(); ++i) {
            if (trim(texts[i]) == wanted)
                return {AnswerKind::choice_label, 0, "", labels[i], ""};
        }
    }
    throw NoLabelFound("no label token in: " + answer_text.substr(0, 80));
}

// ---------------------------------------------------------------------------
// code bodies

NormalizedAnswer extract_code_body(const std::string& raw) {
    std::vector<std::string> lines = split(raw, "\n");
    // drop markdown fences wherever they appear as whole lines
    std::vector<std::string> kept;
    for (auto& line : lines) {
        std::string t = trim(line);
        if (starts_with(t, "```")) continue;
        kept.push_back(line);
    }
    // strip leading blank lines, then one repeated header line
    size_t begin = 0;
    while (begin < kept.size() && trim(kept[begin]).empty()) ++begin;
    if (begin < kept.size()) {
        const std::string& first = kept[begin];
        if (starts_with(first, "def ") && ends_with(trim(first), ":")) ++begin;
    }
    while (begin < kept.size() && trim(kept[begin]).empty()) ++begin;
    size_t end = kept.size();
    while (end > begin && trim(kept[end - 1]).empty()) --end;
    if (begin >= end) throw EmptyBody("no code body in output");
    std::string body;
    for (size_t i = begin; i < end; ++i) {
        if (i > begin) body.push_back('\n');
        body += kept[i];
    }
    return {AnswerKind::code_body, 0, "", "", body};
}

// ---------------------------------------------------------------------------
// validation and correctness

NormalizedAnswer normalize_for_domain(const std::string& text, const AnswerDomain& domain) {
    switch (domain.kind) {
        case AnswerKind::integer: return extract_numeric_integer(text);
        case AnswerKind::math_expression: return normalize_math_expression(text);
        case AnswerKind::choice_label: return extract_choice_label(text, domain.labels);
        case AnswerKind::code_body: return extract_code_body(text);
    }
    throw Error("unreachable answer kind");
}

Demonstration validate_demo_answer(const Demonstration& demo, const AnswerDomain& domain) {
    Demonstration out = demo;
    try {
        if (domain.kind == AnswerKind::choice_label) {
            out.normalized_answer =
                extract_choice_label(demo.raw_answer, domain.labels, demo.choice_texts);
        } else {
            out.normalized_answer = normalize_for_domain(demo.raw_answer, domain);
        }
        if (domain.kind == AnswerKind::math_expression &&
            out.normalized_answer->expr_canonical.empty())
            throw ValidationFailed(demo.index, "empty canonical expression");
    } catch (const ValidationFailed&) {
        throw;
    } catch (const Error& e) {
        throw ValidationFailed(demo.index, e.what());
    }
    return out;
}

bool is_correct(const NormalizedAnswer& predicted, const std::string& gold,
                const AnswerDomain& domain) {
    if (domain.kind == AnswerKind::code_body)
        throw CheckerRequired("code answers are judged by the external checker command");
    NormalizedAnswer gold_norm = normalize_for_domain(gold, domain);
    switch (domain.kind) {
        case AnswerKind::integer: return predicted.integer_value == gold_norm.integer_value;
        case AnswerKind::math_expression:
            return predicted.expr_canonical == gold_norm.expr_canonical;
        case AnswerKind::choice_label: return predicted.label == gold_norm.label;
        case AnswerKind::code_body: break;
    }
    return false;
}

}  // namespace sec
