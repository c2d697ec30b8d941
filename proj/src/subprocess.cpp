#include "sec/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <thread>

#include "sec/errors.hpp"

namespace sec {

namespace {

void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline, bool has_deadline) {
    if (!has_deadline) return -1;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

}  // namespace

SubprocessResult run_subprocess(const std::string& command, const std::string& input,
                                double timeout_seconds) {
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });

    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw CheckerSpawnError("pipe failed");
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw CheckerSpawnError("pipe failed");
    }

    pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        throw CheckerSpawnError("fork failed");
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);
    set_nonblocking(in_pipe[1]);
    set_nonblocking(out_pipe[0]);

    const bool has_deadline = timeout_seconds > 0;
    const auto deadline =
        Clock::now() + std::chrono::milliseconds(static_cast<long>(timeout_seconds * 1000));

    SubprocessResult result;
    size_t written = 0;
    bool stdin_open = true;
    bool stdout_open = true;

    while (stdin_open || stdout_open) {
        int ms = remaining_ms(deadline, has_deadline);
        if (has_deadline && ms == 0) {
            result.timed_out = true;
            break;
        }
        struct pollfd fds[2];
        nfds_t nfds = 0;
        int stdin_slot = -1, stdout_slot = -1;
        if (stdin_open) {
            stdin_slot = static_cast<int>(nfds);
            fds[nfds++] = {in_pipe[1], POLLOUT, 0};
        }
        if (stdout_open) {
            stdout_slot = static_cast<int>(nfds);
            fds[nfds++] = {out_pipe[0], POLLIN, 0};
        }
        int rc = poll(fds, nfds, ms);
        if (rc == 0) {
            result.timed_out = true;
            break;
        }
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (stdin_open && stdin_slot >= 0 &&
            (fds[stdin_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[stdin_slot].revents & (POLLERR | POLLHUP)) {
                close(in_pipe[1]);
                stdin_open = false;
            } else {
                ssize_t n = write(in_pipe[1], input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<size_t>(n);
                if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == input.size()) {
                    close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
        if (stdout_open && stdout_slot >= 0 &&
            (fds[stdout_slot].revents & (POLLIN | POLLERR | POLLHUP))) {
            char buf[4096];
            ssize_t n = read(out_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                result.stdout_text.append(buf, static_cast<size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(out_pipe[0]);
                stdout_open = false;
            }
        }
    }
    if (stdin_open) close(in_pipe[1]);
    if (stdout_open) close(out_pipe[0]);

    int status = 0;
    if (result.timed_out) {
        kill(pid, SIGKILL);
        waitpid(pid, &status, 0);
        result.exit_code = -1;
        return result;
    }
    // the pipes are closed; give the child up to the deadline to exit
    for (;;) {
        pid_t done = waitpid(pid, &status, has_deadline ? WNOHANG : 0);
        if (done == pid || done < 0) break;
        if (done == 0) {
            if (remaining_ms(deadline, has_deadline) == 0) {
                kill(pid, SIGKILL);
                waitpid(pid, &status, 0);
                result.timed_out = true;
                result.exit_code = -1;
                return result;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace sec
