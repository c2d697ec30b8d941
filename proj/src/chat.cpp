#include "sec/chat.hpp"

#include <stdexcept>

#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

const char* to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw SchemaError("unknown message role: " + s);
}

const char* to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::other: return "other";
    }
    return "other";
}

FinishReason finish_reason_from_string(const std::string& s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    return FinishReason::other;
}

void validate_request(const ChatRequest& request) {
    if (request.messages.empty()) throw std::invalid_argument("request has no messages");
    if (request.messages.back().role != Role::user)
        throw std::invalid_argument("last message must be from the user");
    if (request.temperature < 0.0 || request.temperature > 2.0)
        throw std::invalid_argument("temperature outside [0,2]");
    if (request.max_tokens && *request.max_tokens <= 0)
        throw std::invalid_argument("max_tokens must be positive");
}

std::string canonical_request_json(const ChatRequest& request) {
    json j;
    j["model"] = request.model;
    j["messages"] = json::array();
    for (const auto& m : request.messages)
        j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    j["temperature"] = request.temperature;
    if (request.max_tokens) j["max_tokens"] = *request.max_tokens;
    return j.dump();
}

std::string request_key(const ChatRequest& request) {
    return sha256_hex(canonical_request_json(request));
}

json request_to_json(const ChatRequest& request) {
    json j = json::parse(canonical_request_json(request));
    if (!request.request_tag.empty()) j["request_tag"] = request.request_tag;
    return j;
}

ChatRequest request_from_json(const json& j) {
    ChatRequest r;
    r.model = j.at("model").get<std::string>();
    for (const auto& m : j.at("messages"))
        r.messages.push_back(
            {role_from_string(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
    r.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) r.max_tokens = j["max_tokens"].get<int>();
    if (j.contains("request_tag")) r.request_tag = j["request_tag"].get<std::string>();
    return r;
}

json response_to_json(const ChatResponse& response) {
    json j;
    j["content"] = response.content;
    j["finish_reason"] = to_string(response.finish_reason);
    if (response.usage)
        j["usage"] = {{"prompt_tokens", response.usage->prompt_tokens},
                      {"completion_tokens", response.usage->completion_tokens}};
    return j;
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
    if (j.contains("usage") && !j["usage"].is_null())
        r.usage = TokenUsage{j["usage"].value("prompt_tokens", 0),
                             j["usage"].value("completion_tokens", 0)};
    return r;
}

json cache_entry_to_json(const CacheEntry& entry) {
    json j;
    j["key"] = entry.key;
    j["request"] = request_to_json(entry.request);
    j["response"] = response_to_json(entry.response);
    j["created_at"] = entry.created_at;
    return j;
}

CacheEntry cache_entry_from_json(const json& j) {
    CacheEntry e;
    e.request = request_from_json(j.at("request"));
    e.response = response_from_json(j.at("response"));
    // Stored verbatim; consumers decide whether to trust it (the cache
    // verifies it, the replay backend rederives keys from the request).
    e.key = j.value("key", "");
    e.created_at = j.value("created_at", "");
    return e;
}

}  // namespace sec
