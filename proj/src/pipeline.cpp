#include "sec/pipeline.hpp"

#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

const char* to_string(DemoProvenance p) {
    switch (p) {
        case DemoProvenance::model_generated: return "model_generated";
        case DemoProvenance::vanilla_fallback: return "vanilla_fallback";
        case DemoProvenance::failed: return "failed";
        case DemoProvenance::none: return "none";
    }
    return "none";
}

DemoProvenance demo_provenance_from_string(const std::string& s) {
    if (s == "model_generated") return DemoProvenance::model_generated;
    if (s == "vanilla_fallback") return DemoProvenance::vanilla_fallback;
    if (s == "failed") return DemoProvenance::failed;
    if (s == "none") return DemoProvenance::none;
    throw SchemaError("unknown demo provenance: " + s);
}

namespace {

ChatRequest make_request(const PromptBundle& bundle, const std::string& model,
                         const std::optional<int>& max_tokens, const std::string& tag) {
    ChatRequest request;
    request.model = model;
    request.messages = bundle.messages;
    request.temperature = bundle.temperature;
    request.max_tokens = max_tokens;
    request.request_tag = tag;
    return request;
}

}  // namespace

GenerationResult generate_demonstrations(const TestCase& test_case, const TaskSpec& task,
                                         bool cot, int k, const RetryPolicy& policy,
                                         Backend& backend, const std::string& model,
                                         std::vector<RequestLogEntry>* request_log) {
    if (policy.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
    const FormatTemplate& tmpl = cot ? *task.format_template_cot : task.format_template_vanilla;

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        PromptBundle bundle = build_generation_prompt(test_case, task, cot, k, attempt, policy);
        ChatRequest request = make_request(bundle, model, std::nullopt,
                                           "gen-attempt-" + std::to_string(attempt));
        if (request_log)
            request_log->push_back({request_key(request), PromptPurpose::demo_generation});
        ChatResponse response = backend.complete(request);

        try {
            std::vector<Demonstration> demos =
                parse_demonstrations(response.content, tmpl, k);
            std::vector<Demonstration> validated;
            validated.reserve(demos.size());
            for (const auto& demo : demos)
                validated.push_back(validate_demo_answer(demo, task.answer_domain));
            return {std::move(validated), attempt + 1};
        } catch (const ParseError& e) {
            last_error = e.what();
        } catch (const ValidationFailed& e) {
            last_error = e.what();
        }
    }
    throw GenerationExhausted(last_error);
}

SecItemResult run_item(const TestCase& test_case, const TaskSpec& task, Strategy strategy, int k,
                       const RetryPolicy& policy, Backend& backend,
                       const std::vector<Demonstration>& icl_demos, const ItemOptions& options) {
    SecItemResult result;

    if (is_sec(strategy)) {
        const bool want_cot = strategy == Strategy::cot_sec;
        try {
            GenerationResult gen = generate_demonstrations(
                test_case, task, want_cot, k, policy, backend, options.model, &result.request_log);
            result.demos = std::move(gen.demos);
            result.generation_attempts = gen.attempts;
            result.demo_provenance = DemoProvenance::model_generated;
        } catch (const GenerationExhausted& first) {
            if (!want_cot) {
                result.demo_provenance = DemoProvenance::failed;
                throw ItemFailed("generation", first.last_error);
            }
            // CoT generation never conformed; fall back to vanilla demos
            try {
                GenerationResult gen =
                    generate_demonstrations(test_case, task, false, k, policy, backend,
                                            options.model, &result.request_log);
                result.demos = std::move(gen.demos);
                result.generation_attempts = policy.max_attempts + gen.attempts;
                result.demo_provenance = DemoProvenance::vanilla_fallback;
                for (auto& demo : result.demos) demo.provenance = Provenance::vanilla_fallback;
            } catch (const GenerationExhausted& second) {
                result.demo_provenance = DemoProvenance::failed;
                throw ItemFailed("fallback-generation", second.last_error);
            }
        }
    } else if (is_icl(strategy)) {
        if (static_cast<int>(icl_demos.size()) != k)
            throw ItemFailed("configuration", "ICL strategies need exactly " + std::to_string(k) +
                                                  " human demonstrations");
        try {
            for (const auto& demo : icl_demos)
                result.demos.push_back(demo.normalized_answer
                                           ? demo
                                           : validate_demo_answer(demo, task.answer_domain));
        } catch (const ValidationFailed& e) {
            throw ItemFailed("configuration", e.what());
        }
        result.demo_provenance = DemoProvenance::none;
    }

    PromptBundle bundle = build_inference_prompt(test_case, task, strategy, result.demos, k);
    ChatRequest request = make_request(bundle, options.model, options.max_tokens, "inference");
    result.request_log.push_back({request_key(request), PromptPurpose::inference});
    ChatResponse response;
    try {
        response = backend.complete(request);
    } catch (const Error& e) {
        throw ItemFailed("inference", e.what());
    }
    result.final_raw = response.content;

    const AnswerDomain domain = effective_domain(task, test_case);
    std::string answer_span = extract_final_answer_text(result.final_raw, is_cot(strategy));
    try {
        if (domain.kind == AnswerKind::code_body)
            result.final_answer = extract_code_body(result.final_raw);
        else
            result.final_answer = normalize_for_domain(answer_span, domain);
    } catch (const Error&) {
        // unanswerable output: no normalized answer, judged incorrect
        result.final_answer.reset();
        result.correct = false;
        return result;
    }

    if (domain.kind == AnswerKind::code_body && options.defer_code_judgement)
        return result;  // the runner consults the external checker

    result.correct = is_correct(*result.final_answer, test_case.gold_answer, domain);
    return result;
}

}  // namespace sec
