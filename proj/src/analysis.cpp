#include "sec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "sec/errors.hpp"
#include "sec/subprocess.hpp"
#include "sec/util.hpp"

namespace sec {

// ---------------------------------------------------------------------------
// tokenization and cosine

namespace {

bool is_cjk(uint32_t cp) {
    return (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
           (cp >= 0xF900 && cp <= 0xFAFF);
}

bool is_separator(uint32_t cp) {
    if (cp < 128) return !std::isalnum(static_cast<int>(cp));
    if (cp >= 0x2000 && cp <= 0x206F) return true;  // general punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return true;  // CJK punctuation
    if (cp >= 0xFF00 && cp <= 0xFF65) return true;  // full-width punctuation
    return false;
}

// minimal UTF-8 decode; malformed bytes become single-byte codepoints
uint32_t next_codepoint(const std::string& s, size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = c >= 0xF0 ? 3 : c >= 0xE0 ? 2 : 1;
    uint32_t cp = c & (0x3F >> extra);
    size_t j = i + 1;
    for (; j < s.size() && j <= i + static_cast<size_t>(extra); ++j) {
        unsigned char cc = static_cast<unsigned char>(s[j]);
        if ((cc & 0xC0) != 0x80) break;
        cp = (cp << 6) | (cc & 0x3F);
    }
    if (j == i + 1) {
        ++i;
        return c;
    }
    i = j;
    return cp;
}

void append_codepoint(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = next_codepoint(text, i);
        if (is_cjk(cp)) {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
            std::string one;
            append_codepoint(one, cp);
            tokens.push_back(one);
        } else if (is_separator(cp)) {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
        } else {
            if (cp < 128)
                current.push_back(
                    static_cast<char>(std::tolower(static_cast<int>(cp))));
            else
                append_codepoint(current, cp);
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

double tf_cosine(const std::string& a, const std::string& b) {
    std::map<std::string, double> ta, tb;
    for (const auto& tok : tokenize_words(a)) ta[tok] += 1.0;
    for (const auto& tok : tokenize_words(b)) tb[tok] += 1.0;
    if (ta.empty() || tb.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [tok, count] : ta) {
        na += count * count;
        auto it = tb.find(tok);
        if (it != tb.end()) dot += count * it->second;
    }
    for (const auto& [tok, count] : tb) nb += count * count;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

// ---------------------------------------------------------------------------
// similarity

namespace {

std::vector<double> provider_scores(const std::string& provider_cmd,
                                    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::string input;
    for (const auto& [a, b] : pairs) {
        json j;
        j["a"] = a;
        j["b"] = b;
        input += j.dump();
        input += "\n";
    }
    SubprocessResult sub = run_subprocess(provider_cmd, input, 0.0);
    if (sub.timed_out || sub.exit_code != 0)
        throw ProviderError("similarity provider exited with status " +
                            std::to_string(sub.exit_code));
    std::vector<double> scores;
    for (const auto& line : split(sub.stdout_text, "\n")) {
        std::string t = trim(line);
        if (t.empty()) continue;
        try {
            scores.push_back(std::stod(t));
        } catch (const std::exception&) {
            throw ProviderError("similarity provider emitted a non-numeric line: " + t);
        }
    }
    if (scores.size() != pairs.size())
        throw ProviderError("similarity provider returned " + std::to_string(scores.size()) +
                            " scores for " + std::to_string(pairs.size()) + " pairs");
    return scores;
}

}  // namespace

SimilarityReport similarity_scores(const RunReport& report, const std::string& provider_cmd) {
    int k = report.config_echo.value("k", 0);
    if (k < 1) throw ProviderError("similarity needs a run with k >= 1");

    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> ids;
    for (const auto& rec : report.records) {
        if (static_cast<int>(rec.result.demos.size()) != k) continue;  // failed items
        ids.push_back(rec.id);
        for (const auto& demo : rec.result.demos) pairs.emplace_back(demo.question, rec.question);
    }

    SimilarityReport out;
    std::vector<double> scores;
    if (!provider_cmd.empty()) {
        try {
            scores = provider_scores(provider_cmd, pairs);
            out.provider = "external";
        } catch (const ProviderError& e) {
            std::cerr << "warning: " << e.what() << "; falling back to builtin cosine\n";
            out.fallback_warning = true;
        }
    }
    if (scores.empty() && !pairs.empty() && out.provider != "external") {
        scores.reserve(pairs.size());
        for (const auto& [a, b] : pairs) scores.push_back(tf_cosine(a, b));
    }

    out.mean_per_shot.assign(static_cast<size_t>(k), 0.0);
    double total = 0.0;
    size_t cursor = 0;
    for (const auto& id : ids) {
        std::vector<double> per_shot(scores.begin() + static_cast<long>(cursor),
                                     scores.begin() + static_cast<long>(cursor + k));
        cursor += static_cast<size_t>(k);
        for (int s = 0; s < k; ++s) {
            out.mean_per_shot[static_cast<size_t>(s)] += per_shot[static_cast<size_t>(s)];
            total += per_shot[static_cast<size_t>(s)];
        }
        out.per_item[id] = std::move(per_shot);
    }
    if (!ids.empty()) {
        for (auto& m : out.mean_per_shot) m /= static_cast<double>(ids.size());
        out.mean_overall = total / (static_cast<double>(ids.size()) * k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// line complexity

ComplexityStats line_complexity(const RunReport& report) {
    ComplexityStats stats;
    int k = report.config_echo.value("k", 0);
    std::vector<double> sums(static_cast<size_t>(std::max(k, 0)), 0.0);
    std::vector<int> counts(static_cast<size_t>(std::max(k, 0)), 0);
    double final_sum = 0.0;
    int final_count = 0;
    double gold_sum = 0.0;
    int gold_count = 0;
    for (const auto& rec : report.records) {
        for (const auto& demo : rec.result.demos) {
            int shot = demo.index - 1;
            if (shot < 0) continue;
            if (shot >= static_cast<int>(sums.size())) {
                sums.resize(static_cast<size_t>(shot) + 1, 0.0);
                counts.resize(static_cast<size_t>(shot) + 1, 0);
            }
            int lines = count_nonempty_lines(demo.raw_answer);
            if (lines == 0) stats.empty_warning = true;
            sums[static_cast<size_t>(shot)] += lines;
            ++counts[static_cast<size_t>(shot)];
        }
        std::string final_body = rec.result.final_answer &&
                                         rec.result.final_answer->kind == AnswerKind::code_body
                                     ? rec.result.final_answer->code_text
                                     : rec.result.final_raw;
        if (!rec.failed) {
            int lines = count_nonempty_lines(final_body);
            if (lines == 0) stats.empty_warning = true;
            final_sum += lines;
            ++final_count;
        }
        if (!rec.gold_answer.empty()) {
            gold_sum += count_nonempty_lines(rec.gold_answer);
            ++gold_count;
        }
    }
    stats.per_shot_mean_lines.resize(sums.size(), 0.0);
    for (size_t i = 0; i < sums.size(); ++i)
        stats.per_shot_mean_lines[i] = counts[i] > 0 ? sums[i] / counts[i] : 0.0;
    stats.final_output_mean_lines = final_count > 0 ? final_sum / final_count : 0.0;
    if (gold_count > 0) stats.reference_mean_lines = gold_sum / gold_count;
    return stats;
}

// ---------------------------------------------------------------------------
// error labels

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::answer_extraction: return "answer_extraction";
        case ErrorCategory::computation: return "computation";
        case ErrorCategory::question: return "question";
        case ErrorCategory::logical: return "logical";
    }
    return "logical";
}

ErrorCategory error_category_from_string(const std::string& s) {
    if (s == "answer_extraction") return ErrorCategory::answer_extraction;
    if (s == "computation") return ErrorCategory::computation;
    if (s == "question") return ErrorCategory::question;
    if (s == "logical") return ErrorCategory::logical;
    throw SchemaError("unknown error category: " + s);
}

const char* to_string(SeverityBucket b) {
    switch (b) {
        case SeverityBucket::all_correct: return "all_correct";
        case SeverityBucket::minor_error: return "minor_error";
        case SeverityBucket::major_error: return "major_error";
        case SeverityBucket::all_incorrect: return "all_incorrect";
    }
    return "all_correct";
}

SeverityBucket severity_bucket_from_string(const std::string& s) {
    if (s == "all_correct") return SeverityBucket::all_correct;
    if (s == "minor_error") return SeverityBucket::minor_error;
    if (s == "major_error") return SeverityBucket::major_error;
    if (s == "all_incorrect") return SeverityBucket::all_incorrect;
    throw SchemaError("unknown severity bucket: " + s);
}

SeverityBucket bucket_for(int incorrect_count, int k) {
    if (incorrect_count <= 0) return SeverityBucket::all_correct;
    if (incorrect_count >= k) return SeverityBucket::all_incorrect;
    return incorrect_count <= (k - 1) / 2 ? SeverityBucket::minor_error
                                          : SeverityBucket::major_error;
}

json error_label_to_json(const ErrorLabel& label) {
    json j;
    j["case_id"] = label.case_id;
    if (label.shot_index) j["shot_index"] = *label.shot_index;
    j["category"] = to_string(label.category);
    j["note"] = label.note;
    j["severity_bucket"] = to_string(label.severity_bucket);
    if (label.final_correct) j["final_correct"] = *label.final_correct;
    return j;
}

ErrorLabel error_label_from_json(const json& j) {
    ErrorLabel l;
    l.case_id = j.at("case_id").get<std::string>();
    if (j.contains("shot_index")) l.shot_index = j["shot_index"].get<int>();
    l.category = error_category_from_string(j.at("category").get<std::string>());
    l.note = j.value("note", "");
    l.severity_bucket = severity_bucket_from_string(j.at("severity_bucket").get<std::string>());
    if (j.contains("final_correct")) l.final_correct = j["final_correct"].get<bool>();
    return l;
}

int Tabulation::labeled() const {
    int n = 0;
    for (const auto& row : cells)
        for (int cell : row) n += cell;
    return n;
}

LabelStore::LabelStore(std::string path) : path_(std::move(path)) {
    namespace fs = std::filesystem;
    fs::path p(path_);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void LabelStore::append(const ErrorLabel& label) {
    append_line(path_, error_label_to_json(label).dump());
}

std::vector<ErrorLabel> LabelStore::all() const {
    std::vector<ErrorLabel> labels;
    if (!std::filesystem::exists(path_)) return labels;
    int line_no = 0;
    for (const auto& line : split(read_file(path_), "\n")) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            labels.push_back(error_label_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw SchemaError("bad label line: " + std::string(e.what()), line_no);
        }
    }
    return labels;
}

std::vector<ErrorLabel> LabelStore::query(std::optional<ErrorCategory> category,
                                          std::optional<SeverityBucket> bucket,
                                          const std::string& case_id) const {
    std::vector<ErrorLabel> out;
    for (auto& label : all()) {
        if (category && label.category != *category) continue;
        if (bucket && label.severity_bucket != *bucket) continue;
        if (!case_id.empty() && label.case_id != case_id) continue;
        out.push_back(std::move(label));
    }
    return out;
}

Tabulation LabelStore::tabulate() const {
    Tabulation t;
    for (const auto& label : all()) {
        if (!label.final_correct) continue;  // outcome unknown; not tabulated
        int row = *label.final_correct ? 0 : 1;
        t.cells[row][static_cast<int>(label.severity_bucket)] += 1;
    }
    return t;
}

}  // namespace sec
