#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sec/runner.hpp"

namespace sec {

// Unicode-aware word tokens, lowercased; CJK ideographs count one token per
// character so Chinese text compares meaningfully.
std::vector<std::string> tokenize_words(const std::string& text);

// Cosine over raw term-frequency vectors. Symmetric, in [0,1], and exactly
// 1 on identical token multisets.
double tf_cosine(const std::string& a, const std::string& b);

struct SimilarityReport {
    std::map<std::string, std::vector<double>> per_item;  // case id -> per-shot scores
    double mean_overall = 0.0;
    std::vector<double> mean_per_shot;
    std::string provider = "tf_cosine_builtin";
    bool fallback_warning = false;  // external provider failed, builtin used
};

// score(demo_i.question, test.question) for every item that carries a full
// demo set. provider_cmd, when set, must echo one real per stdin line of
// JSON {"a":..., "b":...}; on any provider failure the builtin cosine is
// used and the report is flagged.
SimilarityReport similarity_scores(const RunReport& report,
                                   const std::string& provider_cmd = "");

struct ComplexityStats {
    std::vector<double> per_shot_mean_lines;
    double final_output_mean_lines = 0.0;
    std::optional<double> reference_mean_lines;  // from gold answers, when present
    bool empty_warning = false;                  // some bodies had no lines
};

// Mean non-empty-line counts of demo answers per shot index and of final
// outputs; gold answers provide the canonical-solution reference.
ComplexityStats line_complexity(const RunReport& report);

enum class ErrorCategory { answer_extraction, computation, question, logical };
enum class SeverityBucket { all_correct, minor_error, major_error, all_incorrect };

const char* to_string(ErrorCategory c);
ErrorCategory error_category_from_string(const std::string& s);
const char* to_string(SeverityBucket b);
SeverityBucket severity_bucket_from_string(const std::string& s);

// 0 wrong -> all_correct, all wrong -> all_incorrect; the lower half of the
// remaining range is a minor error (1-2 of 5), the upper half major (3-4).
SeverityBucket bucket_for(int incorrect_count, int k);

struct ErrorLabel {
    std::string case_id;
    std::optional<int> shot_index;  // absent marks the final output
    ErrorCategory category = ErrorCategory::logical;
    std::string note;
    SeverityBucket severity_bucket = SeverityBucket::all_correct;
    std::optional<bool> final_correct;  // outcome of the final prediction
};

json error_label_to_json(const ErrorLabel& label);
ErrorLabel error_label_from_json(const json& j);

struct Tabulation {
    // rows: final prediction correct / incorrect; columns: severity buckets
    int cells[2][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}};
    int labeled() const;
};

// Append-only JSONL store for human error judgments.
class LabelStore {
 public:
    explicit LabelStore(std::string path);

    void append(const ErrorLabel& label);
    std::vector<ErrorLabel> all() const;
    std::vector<ErrorLabel> query(std::optional<ErrorCategory> category,
                                  std::optional<SeverityBucket> bucket,
                                  const std::string& case_id = "") const;
    Tabulation tabulate() const;

 private:
    std::string path_;
};

}  // namespace sec
