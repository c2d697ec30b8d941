#pragma once

// Turns the bundled transcripts (responses.json) into a keyed replay
// fixture. The responses and the hand-scored expectations are the oracle;
// the requests are reconstructed with the production prompt builder so the
// replay backend can match them exactly under any concurrency.

#include <fstream>
#include <string>

#include "sec/errors.hpp"
#include "sec/pipeline.hpp"
#include "sec/task.hpp"
#include "sec/util.hpp"

namespace sec::testing {

inline std::string e2e_dir() { return std::string(SEC_FIXTURES_DIR) + "/e2e_gsm8k_20"; }

inline nlohmann::ordered_json load_json_file(const std::string& path) {
    return nlohmann::ordered_json::parse(read_file(path));
}

inline std::string joined(const nlohmann::ordered_json& lines) {
    std::string out;
    for (const auto& line : lines) {
        if (!out.empty()) out += "\n";
        out += line.get<std::string>();
    }
    return out;
}

// Writes fixture.jsonl under out_dir and returns its path.
inline std::string build_e2e_fixture(const std::string& out_dir) {
    auto responses = load_json_file(e2e_dir() + "/responses.json");
    const std::string model = responses.at("model").get<std::string>();
    const int k = responses.at("k").get<int>();
    TaskSpec task = builtin_task(TaskId::gsm8k);
    RetryPolicy policy;

    auto dataset = load_dataset(e2e_dir() + "/dataset.jsonl", task);

    auto request_for = [&](const PromptBundle& bundle) {
        ChatRequest r;
        r.model = model;
        r.messages = bundle.messages;
        r.temperature = bundle.temperature;
        return r;
    };

    std::string fixture;
    for (const auto& c : dataset) {
        const auto& item = responses.at("items").at(c.id);
        std::vector<Demonstration> demos;
        bool have_demos = false;

        auto emit_attempts = [&](const nlohmann::ordered_json& attempts, bool cot) {
            for (size_t attempt = 0; attempt < attempts.size(); ++attempt) {
                std::string content = joined(attempts[attempt]);
                ChatRequest req = request_for(build_generation_prompt(
                    c, task, cot, k, static_cast<int>(attempt), policy));
                CacheEntry entry{request_key(req), req, {content, FinishReason::stop, {}}, ""};
                fixture += cache_entry_to_json(entry).dump();
                fixture += "\n";
                if (!have_demos) {
                    try {
                        const FormatTemplate& tmpl =
                            cot ? *task.format_template_cot : task.format_template_vanilla;
                        auto parsed = parse_demonstrations(content, tmpl, k);
                        std::vector<Demonstration> validated;
                        for (const auto& d : parsed)
                            validated.push_back(validate_demo_answer(d, task.answer_domain));
                        demos = std::move(validated);
                        have_demos = true;
                    } catch (const sec::Error&) {
                        // this attempt was authored to fail; the next one runs
                    }
                }
            }
        };

        emit_attempts(item.at("cot_generation"), true);
        if (!have_demos) emit_attempts(item.at("vanilla_generation"), false);

        ChatRequest inf_req =
            request_for(build_inference_prompt(c, task, Strategy::cot_sec, demos, k));
        CacheEntry entry{request_key(inf_req),
                         inf_req,
                         {item.at("inference").get<std::string>(), FinishReason::stop, {}},
                         ""};
        fixture += cache_entry_to_json(entry).dump();
        fixture += "\n";
    }

    std::string path = out_dir + "/fixture.jsonl";
    atomic_write_file(path, fixture);
    return path;
}

}  // namespace sec::testing
