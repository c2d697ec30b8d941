#include <httplib.h>

#include "sec/backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "sec/errors.hpp"
#include "sec/util.hpp"

namespace sec {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
    const char* key = config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
        throw AuthError("API key environment variable not set: " + config_.api_key_env);
    api_key_ = key;
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    validate_request(request);

    json body = json::parse(canonical_request_json(request));
    const std::string payload = body.dump();

    int attempts = config_.max_transport_retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            auto backoff = std::chrono::milliseconds(
                static_cast<long>(250.0 * std::pow(2.0, attempt - 1)));
            std::this_thread::sleep_for(backoff);
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(std::chrono::milliseconds(
            static_cast<long>(config_.timeout_seconds * 1000)));
        client.set_read_timeout(std::chrono::milliseconds(
            static_cast<long>(config_.timeout_seconds * 1000)));
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

        auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthError("provider rejected credentials (HTTP " +
                            std::to_string(res->status) + ")");
        if (res->status >= 500) {
            last_error = "server error HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("unexpected HTTP status " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));

        json doc;
        try {
            doc = json::parse(res->body);
        } catch (const std::exception& e) {
            throw SchemaError(std::string("provider payload is not JSON: ") + e.what());
        }
        try {
            const auto& choice = doc.at("choices").at(0);
            ChatResponse out;
            out.content = choice.at("message").at("content").get<std::string>();
            out.finish_reason =
                finish_reason_from_string(choice.value("finish_reason", "other"));
            if (doc.contains("usage") && doc["usage"].is_object())
                out.usage = TokenUsage{doc["usage"].value("prompt_tokens", 0),
                                       doc["usage"].value("completion_tokens", 0)};
            return out;
        } catch (const json::exception& e) {
            throw SchemaError(std::string("provider payload missing fields: ") + e.what());
        }
    }
    throw TransportError("request failed after " + std::to_string(attempts) +
                         " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// ReplayBackend

std::vector<CacheEntry> load_fixture_file(const std::string& path) {
    std::string text = read_file(path);
    std::vector<CacheEntry> entries;
    int line_no = 0;
    for (const auto& line : split(text, "\n")) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            entries.push_back(cache_entry_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw SchemaError("bad fixture line: " + std::string(e.what()), line_no);
        }
    }
    return entries;
}

ReplayBackend::ReplayBackend(const std::string& fixture_path) {
    for (auto& entry : load_fixture_file(fixture_path)) {
        // Keys are rederived from the recorded request so fixtures without
        // precomputed hashes still match exactly.
        slots_.push_back({request_key(entry.request), std::move(entry.response), false});
    }
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
    validate_request(request);
    const std::string key = request_key(request);
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& slot : slots_) {
        if (!slot.consumed && slot.key == key) {
            slot.consumed = true;
            return slot.response;
        }
    }
    for (auto& slot : slots_) {
        if (!slot.consumed) {
            slot.consumed = true;
            return slot.response;
        }
    }
    throw FixtureExhausted("replay fixture has no responses left (tag: " +
                           request.request_tag + ")");
}

size_t ReplayBackend::remaining() const {
    std::lock_guard<std::mutex> lock(mu_);
    size_t n = 0;
    for (const auto& slot : slots_)
        if (!slot.consumed) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// CachingBackend

CachingBackend::CachingBackend(std::string cache_dir, std::shared_ptr<Backend> inner)
    : cache_dir_(std::move(cache_dir)), inner_(std::move(inner)) {
    fs::create_directories(cache_dir_);
}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
    const std::string key = request_key(request);
    const fs::path entry_path = fs::path(cache_dir_) / key;

    if (fs::exists(entry_path)) {
        try {
            CacheEntry entry = cache_entry_from_json(json::parse(read_file(entry_path.string())));
            if (entry.key != key || request_key(entry.request) != key)
                throw CacheCorrupt("stored key does not match recomputed key");
            return entry.response;
        } catch (const std::exception& e) {
            std::cerr << "warning: cache entry " << key << " unreadable, treating as miss: "
                      << e.what() << "\n";
        }
    }

    ChatResponse response = inner_->complete(request);
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++misses_;
    }
    CacheEntry entry{key, request, response, iso8601_now()};
    atomic_write_file(entry_path.string(), cache_entry_to_json(entry).dump());
    return response;
}

// ---------------------------------------------------------------------------
// RecordingBackend

RecordingBackend::RecordingBackend(std::string fixture_path, std::shared_ptr<Backend> inner)
    : fixture_path_(std::move(fixture_path)), inner_(std::move(inner)) {}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
    ChatResponse response = inner_->complete(request);
    CacheEntry entry{request_key(request), request, response, iso8601_now()};
    std::lock_guard<std::mutex> lock(mu_);
    append_line(fixture_path_, cache_entry_to_json(entry).dump());
    return response;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.timeout_seconds <= 0) throw FatalConfig("timeout must be positive");
    if (config.max_transport_retries < 0) throw FatalConfig("max_transport_retries negative");
    switch (config.kind) {
        case BackendKind::http:
            if (config.base_url.empty()) throw FatalConfig("http backend requires base_url");
            return std::make_shared<HttpBackend>(config);
        case BackendKind::replay:
            if (config.fixture_path.empty())
                throw FatalConfig("replay backend requires fixture_path");
            return std::make_shared<ReplayBackend>(config.fixture_path);
    }
    throw FatalConfig("unknown backend kind");
}

}  // namespace sec
