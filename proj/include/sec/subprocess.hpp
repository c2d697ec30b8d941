#pragma once

#include <string>

namespace sec {

struct SubprocessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string stdout_text;
};

// Runs `command` via /bin/sh -c, feeding `input` on stdin and capturing
// stdout. timeout_seconds <= 0 means no limit; on timeout the child is
// killed and timed_out is set. Throws CheckerSpawnError when the process
// cannot be started at all.
SubprocessResult run_subprocess(const std::string& command, const std::string& input,
                                double timeout_seconds);

}  // namespace sec
