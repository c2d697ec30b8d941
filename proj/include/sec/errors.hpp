#pragma once

#include <stdexcept>
#include <string>

namespace sec {

// Base for all harness errors that are expected and reportable.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// llm-backend
struct TransportError : Error {
    using Error::Error;
};
struct AuthError : Error {
    using Error::Error;
};
struct FixtureExhausted : Error {
    using Error::Error;
};
struct SchemaError : Error {
    int line = 0;
    std::string field;
    SchemaError(const std::string& msg, int line_no = 0, std::string field_name = {})
        : Error(msg), line(line_no), field(std::move(field_name)) {}
};
struct CacheCorrupt : Error {
    using Error::Error;
};

// task-catalog
struct IoError : Error {
    using Error::Error;
};
struct UnknownTask : Error {
    using Error::Error;
};

// prompt-builder
struct CotUnsupported : Error {
    using Error::Error;
};
struct ShotCountMismatch : Error {
    using Error::Error;
};

// demo-parser
enum class ParseReason { missing_field, bad_delimiter, count_mismatch, empty_value };

const char* to_string(ParseReason reason);

struct ParseError : Error {
    int shot_index;  // -1 when not attributable to a shot
    ParseReason reason;
    std::string snippet;  // at most 200 chars of offending text
    ParseError(ParseReason r, std::string snip, int shot = -1);
};

struct InvariantViolation : Error {
    using Error::Error;
};

// answer-pipeline
struct NoNumberFound : Error {
    using Error::Error;
};
struct NoLabelFound : Error {
    using Error::Error;
};
struct EmptyBody : Error {
    using Error::Error;
};
struct ValidationFailed : Error {
    int shot_index;
    std::string cause;
    ValidationFailed(int shot, std::string why);
};
struct CheckerRequired : Error {
    using Error::Error;
};

// sec-pipeline
struct GenerationExhausted : Error {
    std::string last_error;
    explicit GenerationExhausted(std::string last);
};
struct ItemFailed : Error {
    std::string stage;
    std::string cause;
    ItemFailed(std::string at, std::string why);
};

// eval-runner
struct FatalConfig : Error {
    using Error::Error;
};
struct IdMismatch : Error {
    using Error::Error;
};
struct CheckerSpawnError : Error {
    using Error::Error;
};

// analysis
struct ProviderError : Error {
    using Error::Error;
};

}  // namespace sec
