#pragma once

// Shared test scaffolding: scripted backends, temp dirs, fixture writers.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sec/backend.hpp"
#include "sec/chat.hpp"
#include "sec/errors.hpp"

namespace sec::testing {

// Returns canned responses in order and records every request.
class ScriptedBackend : public Backend {
 public:
    explicit ScriptedBackend(std::vector<std::string> contents) {
        for (auto& c : contents) responses_.push_back({std::move(c), FinishReason::stop, {}});
    }
    explicit ScriptedBackend(std::vector<ChatResponse> responses)
        : responses_(std::move(responses)) {}

    ChatResponse complete(const ChatRequest& request) override {
        std::lock_guard<std::mutex> lock(mu_);
        requests.push_back(request);
        if (cursor_ >= responses_.size())
            throw FixtureExhausted("scripted backend ran out of responses");
        return responses_[cursor_++];
    }

    std::vector<ChatRequest> requests;

 private:
    std::mutex mu_;
    std::vector<ChatResponse> responses_;
    size_t cursor_ = 0;
};

// Counts calls through to an inner backend (cache hit/miss assertions).
class CountingBackend : public Backend {
 public:
    explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
    ChatResponse complete(const ChatRequest& request) override {
        ++calls;
        return inner_->complete(request);
    }
    std::atomic<int> calls{0};

 private:
    std::shared_ptr<Backend> inner_;
};

class TempDir {
 public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("sec_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline ChatRequest simple_request(const std::string& content, double temperature = 0.0,
                                  const std::string& tag = "") {
    ChatRequest r;
    r.model = "test-model";
    r.messages = {{Role::user, content}};
    r.temperature = temperature;
    r.request_tag = tag;
    return r;
}

inline std::string fixture_line(const ChatRequest& request, const std::string& content) {
    CacheEntry entry{request_key(request), request, {content, FinishReason::stop, {}}, ""};
    return cache_entry_to_json(entry).dump();
}

}  // namespace sec::testing
