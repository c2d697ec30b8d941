#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sec {

using json = nlohmann::ordered_json;

enum class Role { system, user, assistant };

const char* to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<int> max_tokens;
    // Audit-only tag (e.g. "gen-attempt-2"); excluded from the cache key.
    std::string request_tag;

    bool operator==(const ChatRequest&) const = default;
};

enum class FinishReason { stop, length, other };

const char* to_string(FinishReason r);
FinishReason finish_reason_from_string(const std::string& s);

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
    std::optional<TokenUsage> usage;

    bool operator==(const ChatResponse&) const = default;
};

// Throws std::invalid_argument on violated invariants: empty messages,
// last message not from the user, temperature outside [0,2].
void validate_request(const ChatRequest& request);

// Fixed field order, UTF-8, no insignificant whitespace, request_tag omitted.
std::string canonical_request_json(const ChatRequest& request);

// SHA-256 hex of the canonical serialization.
std::string request_key(const ChatRequest& request);

json request_to_json(const ChatRequest& request);     // includes request_tag
ChatRequest request_from_json(const json& j);
json response_to_json(const ChatResponse& response);
ChatResponse response_from_json(const json& j);

struct CacheEntry {
    std::string key;  // request_key(request)
    ChatRequest request;
    ChatResponse response;
    std::string created_at;
};

json cache_entry_to_json(const CacheEntry& entry);
CacheEntry cache_entry_from_json(const json& j);

}  // namespace sec
