#include <doctest.h>

#include <random>

#include "fuzz.hpp"
#include "sec/answers.hpp"
#include "sec/demo_format.hpp"
#include "sec/errors.hpp"
#include "vectors.hpp"

using namespace sec;
using namespace sec::testing;

TEST_CASE("integer extraction vector suite") {
    for (const auto& c : integer_cases()) {
        CAPTURE(c.in);
        CHECK(extract_numeric_integer(c.in).integer_value == c.expect);
    }
    for (const char* in : integer_error_cases()) {
        CAPTURE(in);
        CHECK_THROWS_AS(extract_numeric_integer(in), NoNumberFound);
    }
}

TEST_CASE("integer extraction ignores thousand separators and currency") {
    CHECK(extract_numeric_integer("$1,250").integer_value ==
          extract_numeric_integer("1250").integer_value);
    CHECK(extract_numeric_integer("$1,250,000").integer_value == 1250000);
}

TEST_CASE("math canonicalization equalities") {
    for (const auto& c : math_equal_cases()) {
        CAPTURE(c.a);
        CAPTURE(c.b);
        CHECK(normalize_math_expression(c.a).expr_canonical ==
              normalize_math_expression(c.b).expr_canonical);
    }
}

TEST_CASE("math canonicalization exact forms") {
    for (const auto& c : math_exact_cases()) {
        CAPTURE(c.in);
        CHECK(normalize_math_expression(c.in).expr_canonical == c.expect);
    }
}

TEST_CASE("math canonicalization is idempotent over the vector corpus and fuzz") {
    auto idempotent = [](const std::string& s) {
        std::string once = normalize_math_expression(s).expr_canonical;
        std::string twice = normalize_math_expression(once).expr_canonical;
        return once == twice;
    };
    for (const auto& c : math_equal_cases()) {
        CHECK(idempotent(c.a));
        CHECK(idempotent(c.b));
    }
    for (const auto& c : math_exact_cases()) CHECK(idempotent(c.in));
    std::mt19937 rng(99);
    for (int i = 0; i < 500; ++i) {
        std::string s = random_text(rng, i % 4 == 0, 0, 40);
        CAPTURE(s);
        CHECK(idempotent(s));
    }
}

TEST_CASE("choice label vector suite") {
    for (const auto& c : choice_cases()) {
        CAPTURE(c.in);
        std::vector<std::string> labels(c.labels.begin(), c.labels.end());
        std::vector<std::string> texts(c.texts.begin(), c.texts.end());
        if (c.expect) {
            CHECK(extract_choice_label(c.in, labels, texts).label == c.expect);
        } else {
            CHECK_THROWS_AS(extract_choice_label(c.in, labels, texts), NoLabelFound);
        }
    }
}

TEST_CASE("code body vector suite") {
    for (const auto& c : code_cases()) {
        CAPTURE(c.in);
        if (c.expect) {
            CHECK(extract_code_body(c.in).code_text == c.expect);
        } else {
            CHECK_THROWS_AS(extract_code_body(c.in), EmptyBody);
        }
    }
}

TEST_CASE("validate_demo_answer populates without touching other fields") {
    Demonstration demo;
    demo.index = 2;
    demo.question = "What is 25/4?";
    demo.rationale = "divide and round";
    demo.raw_answer = "6.25";
    AnswerDomain integers{AnswerKind::integer, {}};
    Demonstration out = validate_demo_answer(demo, integers);
    REQUIRE(out.normalized_answer.has_value());
    CHECK(out.normalized_answer->integer_value == 6);
    CHECK(out.question == demo.question);
    CHECK(out.rationale == demo.rationale);
    CHECK(out.raw_answer == "6.25");
    CHECK_FALSE(demo.normalized_answer.has_value());  // input demo untouched
}

TEST_CASE("validation failures carry the shot index") {
    Demonstration demo;
    demo.index = 3;
    demo.question = "pick";
    demo.raw_answer = "E";
    AnswerDomain choices{AnswerKind::choice_label, {"A", "B", "C", "D"}};
    try {
        validate_demo_answer(demo, choices);
        FAIL("expected ValidationFailed");
    } catch (const ValidationFailed& e) {
        CHECK(e.shot_index == 3);
    }
}

TEST_CASE("validation accepts math and prefers the demo's own choice texts") {
    Demonstration math_demo;
    math_demo.index = 1;
    math_demo.question = "half?";
    math_demo.raw_answer = "\\frac{1}{2}";
    AnswerDomain math{AnswerKind::math_expression, {}};
    CHECK(validate_demo_answer(math_demo, math).normalized_answer->expr_canonical ==
          "\\frac{1}{2}");

    Demonstration content_demo;
    content_demo.index = 1;
    content_demo.question = "color?";
    content_demo.raw_answer = "green plants";
    content_demo.choice_labels = {"A", "B", "C", "D"};
    content_demo.choice_texts = {"red", "green plants", "blue", "none"};
    AnswerDomain choices{AnswerKind::choice_label, {"A", "B", "C", "D"}};
    CHECK(validate_demo_answer(content_demo, choices).normalized_answer->label == "B");
}

TEST_CASE("is_correct per domain") {
    AnswerDomain integers{AnswerKind::integer, {}};
    CHECK(is_correct({AnswerKind::integer, 45, "", "", ""}, "45", integers));
    CHECK_FALSE(is_correct({AnswerKind::integer, 44, "", "", ""}, "45", integers));

    AnswerDomain math{AnswerKind::math_expression, {}};
    CHECK(is_correct(normalize_math_expression("1/2"), "\\frac{1}{2}", math));

    AnswerDomain choices{AnswerKind::choice_label, {"A", "B", "C", "D"}};
    CHECK_FALSE(is_correct({AnswerKind::choice_label, 0, "", "B", ""}, "C", choices));
    CHECK(is_correct({AnswerKind::choice_label, 0, "", "C", ""}, "C", choices));

    AnswerDomain code{AnswerKind::code_body, {}};
    CHECK_THROWS_AS(is_correct({AnswerKind::code_body, 0, "", "", "x"}, "y", code),
                    CheckerRequired);
}

TEST_CASE("is_correct is symmetric once both sides are normalized") {
    AnswerDomain math{AnswerKind::math_expression, {}};
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"0.5", ".5"}, {"1/2", "\\frac{1}{2}"}, {"x+1", "x + 1"}};
    for (const auto& [a, b] : pairs) {
        CHECK(is_correct(normalize_math_expression(a), b, math) ==
              is_correct(normalize_math_expression(b), a, math));
    }
}

TEST_CASE("vector suites meet the minimum per-domain size") {
    CHECK(integer_cases().size() + integer_error_cases().size() >= 30);
    CHECK(math_equal_cases().size() + math_exact_cases().size() >= 30);
    CHECK(choice_cases().size() >= 30);
    CHECK(code_cases().size() >= 30);
}
