#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "sec/analysis.hpp"
#include "sec/errors.hpp"

using namespace sec;
using namespace sec::testing;

namespace {

RunReport sec_report(int k, const std::vector<std::pair<std::string, std::string>>& items,
                     const std::vector<std::vector<std::string>>& demo_questions) {
    RunReport r;
    r.config_echo = {{"k", k}};
    for (size_t i = 0; i < items.size(); ++i) {
        ItemRecord rec;
        rec.id = items[i].first;
        rec.question = items[i].second;
        for (int s = 1; s <= k; ++s) {
            Demonstration d;
            d.index = s;
            d.question = demo_questions[i][static_cast<size_t>(s - 1)];
            d.raw_answer = "1";
            rec.result.demos.push_back(d);
        }
        r.records.push_back(rec);
        ++r.n_total;
    }
    return r;
}

}  // namespace

TEST_CASE("builtin cosine identity, symmetry and range") {
    const std::string q = "How many apples are left after lunch?";
    CHECK(tf_cosine(q, q) == doctest::Approx(1.0).epsilon(1e-12));
    const std::string a = "cats chase the red dot";
    const std::string b = "dogs chase the blue ball";
    CHECK(tf_cosine(a, b) == doctest::Approx(tf_cosine(b, a)).epsilon(1e-15));
    double s = tf_cosine(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
}

TEST_CASE("disjoint vocabularies score zero") {
    CHECK(tf_cosine("alpha beta gamma", "delta epsilon zeta") == 0.0);
    CHECK(tf_cosine("", "anything") == 0.0);
}

TEST_CASE("cosine agrees with a manual dot-product oracle") {
    // a: "the cat sat on the mat"  -> the:2 cat:1 sat:1 on:1 mat:1
    // b: "the dog sat by the door" -> the:2 dog:1 sat:1 by:1 door:1
    // dot = 2*2 (the) + 1*1 (sat) = 5; |a| = |b| = sqrt(4+1+1+1+1) = sqrt(8)
    double expected = 5.0 / 8.0;
    CHECK(tf_cosine("the cat sat on the mat", "the dog sat by the door") ==
          doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("identical token multisets reach exactly one despite reordering") {
    CHECK(tf_cosine("one two two three", "two three one two") ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tokenizer treats cjk characters as single tokens and lowercases ascii") {
    auto tokens = tokenize_words("Hello 世界 Test42");
    REQUIRE(tokens.size() == 4);
    CHECK(tokens[0] == "hello");
    CHECK(tokens[1] == "世");
    CHECK(tokens[2] == "界");
    CHECK(tokens[3] == "test42");
    // full-width punctuation separates
    auto zh = tokenize_words("什么是质数？请回答。");
    CHECK(std::find(zh.begin(), zh.end(), "？") == zh.end());
    CHECK(tf_cosine("什么是质数", "什么是合数") > 0.0);
}

TEST_CASE("similarity report means match brute-force recomputation") {
    RunReport report = sec_report(
        2,
        {{"i1", "how many red apples"}, {"i2", "trains leave the station"}},
        {{"how many green apples", "counting red apples today"},
         {"trains arrive at the station", "buses leave the depot"}});
    SimilarityReport sim = similarity_scores(report);
    REQUIRE(sim.per_item.size() == 2);
    REQUIRE(sim.mean_per_shot.size() == 2);

    double total = 0;
    double shot0 = 0, shot1 = 0;
    for (const auto& [id, scores] : sim.per_item) {
        REQUIRE(scores.size() == 2);
        for (double s : scores) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
            total += s;
        }
        shot0 += scores[0];
        shot1 += scores[1];
    }
    CHECK(sim.mean_overall == doctest::Approx(total / 4.0).epsilon(1e-12));
    CHECK(sim.mean_per_shot[0] == doctest::Approx(shot0 / 2.0).epsilon(1e-12));
    CHECK(sim.mean_per_shot[1] == doctest::Approx(shot1 / 2.0).epsilon(1e-12));
    CHECK(sim.provider == "tf_cosine_builtin");
    CHECK_FALSE(sim.fallback_warning);
}

TEST_CASE("external provider is used when it behaves and abandoned when it fails") {
    RunReport report =
        sec_report(1, {{"i1", "question one"}}, {{"a generated question"}});
    SUBCASE("healthy provider") {
        // echoes 0.25 per input line
        SimilarityReport sim = similarity_scores(report, "while read -r line; do echo 0.25; done");
        CHECK(sim.provider == "external");
        CHECK(sim.per_item["i1"][0] == doctest::Approx(0.25));
        CHECK_FALSE(sim.fallback_warning);
    }
    SUBCASE("failing provider falls back to builtin with a warning") {
        SimilarityReport sim = similarity_scores(report, "exit 1");
        CHECK(sim.provider == "tf_cosine_builtin");
        CHECK(sim.fallback_warning);
        CHECK(sim.per_item.size() == 1);
    }
    SUBCASE("garbled provider output falls back too") {
        SimilarityReport sim = similarity_scores(report, "echo not-a-number");
        CHECK(sim.fallback_warning);
    }
}

TEST_CASE("line complexity means per shot and for final outputs") {
    RunReport r;
    r.config_echo = {{"k", 2}};
    // three items, shot-1 bodies of 7, 7 and 8 lines; shot-2 bodies of 2 lines
    for (int i = 0; i < 3; ++i) {
        ItemRecord rec;
        rec.id = "c" + std::to_string(i);
        rec.gold_answer = "x = 1\ny = 2\nreturn x + y";
        Demonstration d1;
        d1.index = 1;
        d1.question = "q";
        int lines = i == 2 ? 8 : 7;
        std::string body;
        for (int l = 0; l < lines; ++l) body += "line " + std::to_string(l) + "\n";
        d1.raw_answer = body;
        Demonstration d2;
        d2.index = 2;
        d2.question = "q";
        d2.raw_answer = "a\nb";
        rec.result.demos = {d1, d2};
        rec.result.final_raw = "out1\nout2\nout3";
        r.records.push_back(rec);
        ++r.n_total;
    }
    ComplexityStats stats = line_complexity(r);
    REQUIRE(stats.per_shot_mean_lines.size() == 2);
    CHECK(stats.per_shot_mean_lines[0] == doctest::Approx(22.0 / 3.0).epsilon(1e-12));
    CHECK(stats.per_shot_mean_lines[1] == doctest::Approx(2.0));
    CHECK(stats.final_output_mean_lines == doctest::Approx(3.0));
    REQUIRE(stats.reference_mean_lines.has_value());
    CHECK(*stats.reference_mean_lines == doctest::Approx(3.0));
    CHECK_FALSE(stats.empty_warning);
}

TEST_CASE("empty bodies keep a zero mean and raise the warning") {
    RunReport r;
    r.config_echo = {{"k", 1}};
    ItemRecord rec;
    rec.id = "c0";
    Demonstration d;
    d.index = 1;
    d.question = "q";
    d.raw_answer = "   ";
    rec.result.demos = {d};
    rec.result.final_raw = "";
    r.records.push_back(rec);
    r.n_total = 1;
    ComplexityStats stats = line_complexity(r);
    CHECK(stats.per_shot_mean_lines[0] == 0.0);
    CHECK(stats.empty_warning);
}

TEST_CASE("severity buckets follow the 1-2 minor, 3-4 major rule for k=5") {
    CHECK(bucket_for(0, 5) == SeverityBucket::all_correct);
    CHECK(bucket_for(1, 5) == SeverityBucket::minor_error);
    CHECK(bucket_for(2, 5) == SeverityBucket::minor_error);
    CHECK(bucket_for(3, 5) == SeverityBucket::major_error);
    CHECK(bucket_for(4, 5) == SeverityBucket::major_error);
    CHECK(bucket_for(5, 5) == SeverityBucket::all_incorrect);
}

TEST_CASE("label store appends, queries and survives reloads") {
    TempDir dir("labels");
    LabelStore store(dir.file("labels.jsonl"));
    ErrorLabel l1;
    l1.case_id = "g-17";
    l1.shot_index = 2;
    l1.category = ErrorCategory::computation;
    l1.note = "slipped on the subtraction";
    l1.severity_bucket = SeverityBucket::minor_error;
    store.append(l1);
    ErrorLabel l2;
    l2.case_id = "g-18";
    l2.category = ErrorCategory::logical;
    l2.severity_bucket = SeverityBucket::major_error;
    store.append(l2);

    auto by_id = store.query(std::nullopt, std::nullopt, "g-17");
    REQUIRE(by_id.size() == 1);
    CHECK(by_id[0].note == "slipped on the subtraction");
    CHECK(by_id[0].shot_index == 2);

    auto by_cat = store.query(ErrorCategory::logical, std::nullopt);
    REQUIRE(by_cat.size() == 1);
    CHECK(by_cat[0].case_id == "g-18");
    CHECK_FALSE(by_cat[0].shot_index.has_value());  // final-output marker

    LabelStore reopened(dir.file("labels.jsonl"));
    CHECK(reopened.all().size() == 2);
}

TEST_CASE("tabulation reproduces the 13/1/3/3 and 2/5/7/6 rows") {
    TempDir dir("tab");
    LabelStore store(dir.file("labels.jsonl"));
    auto add_row = [&](bool outcome, int all_c, int minor, int major, int all_i) {
        auto add = [&](SeverityBucket bucket, int count) {
            for (int i = 0; i < count; ++i) {
                ErrorLabel l;
                l.case_id = std::string(outcome ? "cor-" : "inc-") + to_string(bucket) + "-" +
                            std::to_string(i);
                l.category = ErrorCategory::logical;
                l.severity_bucket = bucket;
                l.final_correct = outcome;
                store.append(l);
            }
        };
        add(SeverityBucket::all_correct, all_c);
        add(SeverityBucket::minor_error, minor);
        add(SeverityBucket::major_error, major);
        add(SeverityBucket::all_incorrect, all_i);
    };
    add_row(true, 13, 1, 3, 3);
    add_row(false, 2, 5, 7, 6);

    Tabulation t = store.tabulate();
    CHECK(t.cells[0][0] == 13);
    CHECK(t.cells[0][1] == 1);
    CHECK(t.cells[0][2] == 3);
    CHECK(t.cells[0][3] == 3);
    CHECK(t.cells[1][0] == 2);
    CHECK(t.cells[1][1] == 5);
    CHECK(t.cells[1][2] == 7);
    CHECK(t.cells[1][3] == 6);
    CHECK(t.labeled() == 40);
}
