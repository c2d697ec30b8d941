#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sec/chat.hpp"

namespace sec {

enum class BackendKind { http, replay };

struct BackendConfig {
    BackendKind kind = BackendKind::replay;
    std::string base_url;                       // http only
    std::string api_key_env = "OPENAI_API_KEY"; // http only
    std::string fixture_path;                   // replay only
    double timeout_seconds = 120.0;
    int max_transport_retries = 3;
};

class Backend {
 public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Live client speaking the OpenAI-compatible chat-completions protocol.
// Retries transport failures and 5xx with exponential backoff; auth and
// payload-shape problems surface immediately.
class HttpBackend : public Backend {
 public:
    explicit HttpBackend(BackendConfig config);
    ChatResponse complete(const ChatRequest& request) override;

 private:
    BackendConfig config_;
    std::string api_key_;
};

// Serves recorded responses. Matching is two-phase: exact request-key match
// first, then strict FIFO over the remaining unmatched entries, so fixtures
// recorded once still drive reruns whose retry prompts were perturbed.
class ReplayBackend : public Backend {
 public:
    explicit ReplayBackend(const std::string& fixture_path);
    ChatResponse complete(const ChatRequest& request) override;

    size_t remaining() const;

 private:
    struct Slot {
        std::string key;
        ChatResponse response;
        bool consumed = false;
    };
    mutable std::mutex mu_;
    std::vector<Slot> slots_;
};

// Persistent cache over any backend: one JSON file per entry under
// cache_dir, filename = hex key. Writes are atomic; a corrupt entry is
// treated as a miss with a warning on stderr.
class CachingBackend : public Backend {
 public:
    CachingBackend(std::string cache_dir, std::shared_ptr<Backend> inner);
    ChatResponse complete(const ChatRequest& request) override;

    int misses() const { return misses_; }

 private:
    std::string cache_dir_;
    std::shared_ptr<Backend> inner_;
    std::mutex mu_;
    int misses_ = 0;
};

// Appends every request/response pair as a fixture line while delegating
// to the inner backend. Used by record-fixture; deliberately not cached.
class RecordingBackend : public Backend {
 public:
    RecordingBackend(std::string fixture_path, std::shared_ptr<Backend> inner);
    ChatResponse complete(const ChatRequest& request) override;

 private:
    std::string fixture_path_;
    std::shared_ptr<Backend> inner_;
    std::mutex mu_;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

std::vector<CacheEntry> load_fixture_file(const std::string& path);

}  // namespace sec
