#include "sec/demo_format.hpp"

#include <algorithm>

#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

bool FormatTemplate::has_kind(ValueKind kind) const {
    for (const auto& f : fields)
        if (f.kind == kind) return true;
    return false;
}

std::string render_label(const FieldSpec& field, int index) {
    std::string out = field.label_template;
    size_t pos = out.find("{i}");
    if (pos != std::string::npos) out.replace(pos, 3, std::to_string(index));
    return out;
}

std::string render_format_instruction(const FormatTemplate& tmpl, int k) {
    auto block = [&](int i) {
        std::vector<std::string> parts;
        for (const auto& f : tmpl.fields)
            parts.push_back(render_label(f, i) + ":" + f.placeholder);
        return tmpl.block_open + join(parts, " \\n ") + tmpl.block_close;
    };
    const std::string gap = tmpl.separator == 0 ? " \\n " : " \\n\\n ";
    const std::string trailing =
        tmpl.locale == Locale::zh ? "。" : (tmpl.separator == 0 ? " \\n." : " \\n\\n.");
    std::string out = tmpl.instruction_prefix + block(1);
    if (k == 2) {
        out += gap + block(k);
    } else if (k > 2) {
        out += gap + "..." + gap + block(k);
    }
    return out + trailing;
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::model_generated: return "model_generated";
        case Provenance::human_crafted: return "human_crafted";
        case Provenance::vanilla_fallback: return "vanilla_fallback";
    }
    return "model_generated";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "model_generated") return Provenance::model_generated;
    if (s == "human_crafted") return Provenance::human_crafted;
    if (s == "vanilla_fallback") return Provenance::vanilla_fallback;
    throw SchemaError("unknown provenance: " + s);
}

// ---------------------------------------------------------------------------
// parsing

namespace {

constexpr const char* kFullwidthColon = "\xEF\xBC\x9A";

struct LabelHit {
    int shot = 0;
    int field = 0;
    size_t label_pos = 0;
    size_t value_start = 0;
};

// Exact label at the start of a line, immediately followed by ':'. When the
// template opens blocks with a delimiter, the first field's label must sit
// directly after it.
bool strict_find(const std::string& raw, const std::string& label, size_t from,
                 const FormatTemplate& tmpl, bool first_field, LabelHit* hit) {
    size_t pos = from;
    while ((pos = raw.find(label, pos)) != std::string::npos) {
        size_t after = pos + label.size();
        if (after >= raw.size() || raw[after] != ':') {
            ++pos;
            continue;
        }
        size_t line_start = pos;
        if (first_field && !tmpl.block_open.empty()) {
            if (pos < tmpl.block_open.size() ||
                raw.compare(pos - tmpl.block_open.size(), tmpl.block_open.size(),
                            tmpl.block_open) != 0) {
                ++pos;
                continue;
            }
            line_start = pos - tmpl.block_open.size();
        }
        if (line_start != 0 && raw[line_start - 1] != '\n') {
            ++pos;
            continue;
        }
        hit->label_pos = pos;
        hit->value_start = after + 1;
        return true;
    }
    return false;
}

// Case-insensitive label, optional spaces before an ASCII or full-width
// colon; no line-start or delimiter requirement.
bool lenient_find(const std::string& raw, const std::string& label, size_t from, LabelHit* hit) {
    size_t pos = from;
    while ((pos = ifind(raw, label, pos)) != std::string::npos) {
        size_t after = pos + label.size();
        while (after < raw.size() && (raw[after] == ' ' || raw[after] == '\t')) ++after;
        if (after < raw.size() && raw[after] == ':') {
            hit->label_pos = pos;
            hit->value_start = after + 1;
            return true;
        }
        if (after + 3 <= raw.size() && raw.compare(after, 3, kFullwidthColon) == 0) {
            hit->label_pos = pos;
            hit->value_start = after + 3;
            return true;
        }
        ++pos;
    }
    return false;
}

std::string rstrip(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

std::string lstrip(std::string s) {
    size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    return s.substr(b);
}

std::vector<std::string> split_list(const std::string& value, bool strict) {
    std::string v = trim(value);
    if (!strict && v.size() >= 2 && v.front() == '[' && v.back() == ']')
        v = trim(v.substr(1, v.size() - 2));
    std::vector<std::string> items;
    if (strict) {
        for (auto& item : split(v, ", ")) items.push_back(item);
    } else {
        // tolerate missing spaces and Chinese commas
        std::string norm = v;
        size_t pos = 0;
        while ((pos = norm.find("\xEF\xBC\x8C", pos)) != std::string::npos)
            norm.replace(pos, 3, ",");
        for (auto& item : split(norm, ",")) items.push_back(trim(item));
    }
    return items;
}

struct PassResult {
    std::vector<Demonstration> demos;
    bool ok = false;
    ParseReason reason = ParseReason::missing_field;
    std::string snippet;
    int shot = -1;
};

PassResult run_pass(const std::string& raw, const FormatTemplate& tmpl, int k, bool strict) {
    PassResult res;
    const int nfields = static_cast<int>(tmpl.fields.size());
    std::vector<LabelHit> hits;
    hits.reserve(static_cast<size_t>(k) * nfields);

    size_t cursor = 0;
    for (int shot = 1; shot <= k; ++shot) {
        size_t shot_max_end = cursor;
        std::vector<LabelHit> shot_hits;
        for (int f = 0; f < nfields; ++f) {
            const std::string label = render_label(tmpl.fields[f], shot);
            // strict walks fields in template order; lenient searches the
            // whole shot region so reordered fields still resolve
            size_t from = (strict && f > 0) ? shot_max_end : cursor;
            LabelHit hit;
            bool found = strict ? strict_find(raw, label, from, tmpl, f == 0, &hit)
                                : lenient_find(raw, label, from, &hit);
            if (!found) {
                res.reason = f == 0 ? ParseReason::count_mismatch : ParseReason::missing_field;
                res.snippet = "expected label '" + label + "'";
                res.shot = shot;
                return res;
            }
            hit.shot = shot;
            hit.field = f;
            shot_max_end = std::max(shot_max_end, hit.value_start);
            shot_hits.push_back(hit);
        }
        // shots themselves must appear in order
        std::sort(shot_hits.begin(), shot_hits.end(),
                  [](const LabelHit& a, const LabelHit& b) { return a.label_pos < b.label_pos; });
        if (!hits.empty() && shot_hits.front().label_pos < hits.back().label_pos) {
            res.reason = ParseReason::count_mismatch;
            res.snippet = "shot " + std::to_string(shot) + " appears before its predecessor";
            res.shot = shot;
            return res;
        }
        for (auto& h : shot_hits) hits.push_back(h);
        cursor = shot_max_end;
    }

    // one block too many is as wrong as one too few
    if (!tmpl.fields.empty()) {
        const std::string extra = render_label(tmpl.fields[0], k + 1);
        LabelHit hit;
        bool found = strict ? strict_find(raw, extra, cursor, tmpl, true, &hit)
                            : lenient_find(raw, extra, cursor, &hit);
        if (found) {
            res.reason = ParseReason::count_mismatch;
            res.snippet = "found block " + std::to_string(k + 1) + " but expected " +
                          std::to_string(k);
            res.shot = k + 1;
            return res;
        }
    }

    // slice raw values between consecutive label positions
    std::vector<std::string> values(hits.size());
    for (size_t j = 0; j < hits.size(); ++j) {
        size_t end = j + 1 < hits.size() ? hits[j + 1].label_pos : raw.size();
        // the next label may carry its block-open delimiter with it
        if (j + 1 < hits.size() && hits[j + 1].field == 0 && !tmpl.block_open.empty()) {
            size_t open_pos = hits[j + 1].label_pos;
            if (open_pos >= tmpl.block_open.size() &&
                raw.compare(open_pos - tmpl.block_open.size(), tmpl.block_open.size(),
                            tmpl.block_open) == 0)
                end = open_pos - tmpl.block_open.size();
        }
        values[j] = raw.substr(hits[j].value_start, end - hits[j].value_start);
    }

    std::vector<Demonstration> demos(static_cast<size_t>(k));
    for (size_t j = 0; j < hits.size(); ++j) {
        const LabelHit& hit = hits[j];
        const FieldSpec& field = tmpl.fields[static_cast<size_t>(hit.field)];
        Demonstration& demo = demos[static_cast<size_t>(hit.shot - 1)];
        demo.index = hit.shot;

        std::string value = rstrip(values[j]);
        bool last_field_of_block = hit.field == nfields - 1;
        bool had_close = false;
        if (!tmpl.block_close.empty() && ends_with(value, tmpl.block_close)) {
            value = rstrip(value.substr(0, value.size() - tmpl.block_close.size()));
            had_close = true;
        }
        if (strict && last_field_of_block && !tmpl.block_close.empty() && !had_close) {
            res.reason = ParseReason::bad_delimiter;
            res.snippet = value.substr(value.size() > 80 ? value.size() - 80 : 0);
            res.shot = hit.shot;
            return res;
        }

        if (field.kind == ValueKind::code) {
            if (starts_with(value, "\r\n"))
                value = value.substr(2);
            else if (starts_with(value, "\n"))
                value = value.substr(1);
            else
                value = lstrip(value);
        } else {
            value = lstrip(value);
        }

        if (value.empty()) {
            res.reason = ParseReason::empty_value;
            res.snippet = "empty value for '" + render_label(field, hit.shot) + "'";
            res.shot = hit.shot;
            return res;
        }

        switch (field.kind) {
            case ValueKind::text:
                demo.question = value;
                break;
            case ValueKind::rationale:
                demo.rationale = value;
                break;
            case ValueKind::answer:
            case ValueKind::latex_answer:
            case ValueKind::code:
                demo.raw_answer = value;
                break;
            case ValueKind::label_list:
                demo.choice_labels = split_list(value, strict);
                break;
            case ValueKind::text_list:
                demo.choice_texts = split_list(value, strict);
                break;
        }
    }

    for (auto& demo : demos) {
        if (demo.question.empty() || demo.raw_answer.empty()) {
            res.reason = ParseReason::empty_value;
            res.snippet = "shot " + std::to_string(demo.index) + " has an empty field";
            res.shot = demo.index;
            return res;
        }
        if (tmpl.has_kind(ValueKind::label_list)) {
            if (demo.choice_labels.empty() ||
                demo.choice_labels.size() != demo.choice_texts.size()) {
                res.reason = ParseReason::count_mismatch;
                res.snippet = "choice labels and texts are not parallel";
                res.shot = demo.index;
                return res;
            }
            for (const auto& item : demo.choice_labels)
                if (item.empty()) {
                    res.reason = ParseReason::empty_value;
                    res.snippet = "empty choice label";
                    res.shot = demo.index;
                    return res;
                }
            for (const auto& item : demo.choice_texts)
                if (item.empty()) {
                    res.reason = ParseReason::empty_value;
                    res.snippet = "empty choice text";
                    res.shot = demo.index;
                    return res;
                }
        }
    }

    res.ok = true;
    res.demos = std::move(demos);
    return res;
}

}  // namespace

ParseOutcome parse_demonstrations_detailed(const std::string& raw, const FormatTemplate& tmpl,
                                           int k) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    PassResult strict_pass = run_pass(raw, tmpl, k, true);
    if (strict_pass.ok) return {std::move(strict_pass.demos), false};
    PassResult lenient_pass = run_pass(raw, tmpl, k, false);
    if (lenient_pass.ok) return {std::move(lenient_pass.demos), true};
    throw ParseError(lenient_pass.reason, lenient_pass.snippet, lenient_pass.shot);
}

std::vector<Demonstration> parse_demonstrations(const std::string& raw,
                                                const FormatTemplate& tmpl, int k) {
    return parse_demonstrations_detailed(raw, tmpl, k).demos;
}

// ---------------------------------------------------------------------------
// rendering

std::string render_demonstrations(const std::vector<Demonstration>& demos,
                                  const FormatTemplate& tmpl) {
    if (demos.empty()) throw InvariantViolation("cannot render an empty demonstration set");
    for (size_t i = 0; i < demos.size(); ++i) {
        const Demonstration& d = demos[i];
        if (d.index != static_cast<int>(i) + 1)
            throw InvariantViolation("demonstration indices must be contiguous from 1");
        if (d.question.empty() || d.raw_answer.empty())
            throw InvariantViolation("demonstration " + std::to_string(d.index) +
                                     " is missing its question or answer");
        if (tmpl.has_kind(ValueKind::rationale) != d.rationale.has_value())
            throw InvariantViolation("rationale presence must match the template");
        if (tmpl.has_kind(ValueKind::label_list)) {
            if (d.choice_labels.empty() || d.choice_labels.size() != d.choice_texts.size())
                throw InvariantViolation("choice labels/texts must be parallel and non-empty");
        }
    }

    std::string out;
    for (size_t i = 0; i < demos.size(); ++i) {
        const Demonstration& d = demos[i];
        std::string block;
        for (size_t f = 0; f < tmpl.fields.size(); ++f) {
            const FieldSpec& field = tmpl.fields[f];
            std::string value;
            switch (field.kind) {
                case ValueKind::text: value = d.question; break;
                case ValueKind::rationale: value = *d.rationale; break;
                case ValueKind::answer:
                case ValueKind::latex_answer:
                case ValueKind::code: value = d.raw_answer; break;
                case ValueKind::label_list: value = join(d.choice_labels, ", "); break;
                case ValueKind::text_list: value = join(d.choice_texts, ", "); break;
            }
            if (f) block += "\n";
            if (field.kind == ValueKind::code)
                block += render_label(field, d.index) + ":\n" + value;
            else
                block += render_label(field, d.index) + ": " + value;
        }
        out += tmpl.block_open + block + tmpl.block_close + "\n";
        if (i + 1 < demos.size())
            out.append(static_cast<size_t>(tmpl.separator), '\n');
    }
    return out;
}

std::string extract_final_answer_text(const std::string& raw, bool cot) {
    (void)cot;  // the marker rule applies uniformly
    static const std::string marker = "the answer is";
    size_t last = std::string::npos;
    size_t pos = 0;
    while ((pos = ifind(raw, marker, pos)) != std::string::npos) {
        last = pos;
        ++pos;
    }
    if (last != std::string::npos) return trim(raw.substr(last + marker.size()));
    // fall back to the last non-empty line
    std::vector<std::string> lines = split(raw, "\n");
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string t = trim(*it);
        if (!t.empty()) return t;
    }
    return trim(raw);
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::ordered_json demonstration_to_json(const Demonstration& demo) {
    nlohmann::ordered_json j;
    j["index"] = demo.index;
    j["question"] = demo.question;
    if (demo.rationale) j["rationale"] = *demo.rationale;
    j["raw_answer"] = demo.raw_answer;
    if (demo.normalized_answer) {
        const NormalizedAnswer& a = *demo.normalized_answer;
        nlohmann::ordered_json na;
        na["kind"] = to_string(a.kind);
        switch (a.kind) {
            case AnswerKind::integer: na["value"] = a.integer_value; break;
            case AnswerKind::math_expression: na["value"] = a.expr_canonical; break;
            case AnswerKind::choice_label: na["value"] = a.label; break;
            case AnswerKind::code_body: na["value"] = a.code_text; break;
        }
        j["normalized_answer"] = na;
    }
    if (!demo.choice_labels.empty()) {
        j["choice_labels"] = demo.choice_labels;
        j["choice_texts"] = demo.choice_texts;
    }
    j["provenance"] = to_string(demo.provenance);
    return j;
}

Demonstration demonstration_from_json(const nlohmann::ordered_json& j) {
    Demonstration d;
    d.index = j.value("index", 0);
    d.question = j.at("question").get<std::string>();
    if (j.contains("rationale") && !j["rationale"].is_null())
        d.rationale = j["rationale"].get<std::string>();
    d.raw_answer = j.at("raw_answer").get<std::string>();
    if (j.contains("normalized_answer") && !j["normalized_answer"].is_null()) {
        const auto& na = j["normalized_answer"];
        NormalizedAnswer a;
        a.kind = answer_kind_from_string(na.at("kind").get<std::string>());
        switch (a.kind) {
            case AnswerKind::integer: a.integer_value = na.at("value").get<int64_t>(); break;
            case AnswerKind::math_expression:
                a.expr_canonical = na.at("value").get<std::string>();
                break;
            case AnswerKind::choice_label: a.label = na.at("value").get<std::string>(); break;
            case AnswerKind::code_body: a.code_text = na.at("value").get<std::string>(); break;
        }
        d.normalized_answer = a;
    }
    if (j.contains("choice_labels")) {
        d.choice_labels = j["choice_labels"].get<std::vector<std::string>>();
        d.choice_texts = j.value("choice_texts", std::vector<std::string>{});
    }
    if (j.contains("provenance"))
        d.provenance = provenance_from_string(j["provenance"].get<std::string>());
    return d;
}

std::vector<Demonstration> load_demos_file(const std::string& path) {
    std::string text = read_file(path);
    std::vector<Demonstration> demos;
    int line_no = 0;
    for (const auto& line : split(text, "\n")) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            Demonstration d = demonstration_from_json(nlohmann::ordered_json::parse(line));
            d.provenance = Provenance::human_crafted;
            d.index = static_cast<int>(demos.size()) + 1;
            demos.push_back(std::move(d));
        } catch (const std::exception& e) {
            throw SchemaError("bad demos line: " + std::string(e.what()), line_no);
        }
    }
    return demos;
}

}  // namespace sec
