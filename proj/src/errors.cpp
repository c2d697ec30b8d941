#include "sec/errors.hpp"

namespace sec {

const char* to_string(ParseReason reason) {
    switch (reason) {
        case ParseReason::missing_field: return "missing_field";
        case ParseReason::bad_delimiter: return "bad_delimiter";
        case ParseReason::count_mismatch: return "count_mismatch";
        case ParseReason::empty_value: return "empty_value";
    }
    return "unknown";
}

static std::string clip_snippet(std::string s) {
    if (s.size() > 200) s.resize(200);
    return s;
}

ParseError::ParseError(ParseReason r, std::string snip, int shot)
    : Error(std::string("parse error (") + to_string(r) + ")" +
            (shot >= 0 ? " at shot " + std::to_string(shot) : "")),
      shot_index(shot),
      reason(r),
      snippet(clip_snippet(std::move(snip))) {}

ValidationFailed::ValidationFailed(int shot, std::string why)
    : Error("validation failed at shot " + std::to_string(shot) + ": " + why),
      shot_index(shot),
      cause(std::move(why)) {}

GenerationExhausted::GenerationExhausted(std::string last)
    : Error("demonstration generation exhausted all attempts: " + last),
      last_error(std::move(last)) {}

ItemFailed::ItemFailed(std::string at, std::string why)
    : Error("item failed during " + at + ": " + why), stage(std::move(at)), cause(std::move(why)) {}

}  // namespace sec
