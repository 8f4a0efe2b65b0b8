#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "defilter/filters.hpp"

namespace defilter {

namespace {

namespace fs = std::filesystem;

std::string substitute(std::string text, const std::string& placeholder,
                       const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return text;
}

std::string read_file_tail(const fs::path& path, std::size_t max_bytes = 4096) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream oss;
    oss << in.rdbuf();
    std::string text = oss.str();
    if (text.size() > max_bytes) text = text.substr(text.size() - max_bytes);
    return text;
}

struct TempDir {
    fs::path path;

    TempDir() {
        std::string templ =
            (fs::temp_directory_path() / "defilter-XXXXXX").string();
        if (!mkdtemp(templ.data())) {
            throw FilterError("cannot create temp directory: " +
                              std::string(std::strerror(errno)));
        }
        path = templ;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

// Runs `sh -c command` with a clean environment, stderr redirected to a file.
// Returns the exit status; throws FilterError on timeout.
int run_command(const std::string& command, const fs::path& stderr_path,
                const std::string& format_name, double timeout_seconds) {
    const pid_t pid = fork();
    if (pid < 0) {
        throw FilterError("fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        const int fd = open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC,
                            0600);
        if (fd >= 0) {
            dup2(fd, STDERR_FILENO);
            close(fd);
        }
        const std::string format_env = "DEFILTER_FORMAT=" + format_name;
        const char* envp[] = {
            "PATH=/usr/local/bin:/usr/bin:/bin",
            "LC_ALL=C",
            format_env.c_str(),
            nullptr,
        };
        execle("/bin/sh", "sh", "-c", command.c_str(),
               static_cast<char*>(nullptr), envp);
        _exit(127);
    }

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_seconds);
    int status = 0;
    for (;;) {
        const pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        if (done < 0) {
            throw FilterError("waitpid failed: " +
                              std::string(std::strerror(errno)));
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            throw FilterError("external filter timed out after " +
                                  std::to_string(timeout_seconds) + " s",
                              read_file_tail(stderr_path));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return WEXITSTATUS(status);
}

}  // namespace

Image external_filter(const External& spec, const Image& input) {
    validate_spec(FilterSpec{spec});

    const bool pfm = spec.format == ImageFormat::Pfm;
    const char* ext = pfm ? ".pfm" : ".png";

    TempDir dir;
    const fs::path in_path = dir.path / (std::string("in") + ext);
    const fs::path out_path = dir.path / (std::string("out") + ext);
    const fs::path stderr_path = dir.path / "stderr.txt";

    save_image(input, in_path.string(), spec.format);

    std::string command = substitute(spec.command_template, "{IN}",
                                     in_path.string());
    command = substitute(command, "{OUT}", out_path.string());

    const int status = run_command(command, stderr_path, pfm ? "pfm" : "png",
                                   spec.timeout_seconds);
    if (status != 0) {
        throw FilterError("external filter exited with status " +
                              std::to_string(status) + ": " + command,
                          read_file_tail(stderr_path));
    }
    if (!fs::exists(out_path)) {
        throw FilterError("external filter produced no output file",
                          read_file_tail(stderr_path));
    }

    Image out;
    try {
        out = load_image(out_path.string(), spec.format);
    } catch (const IoError& e) {
        throw FilterError(std::string("external filter output unreadable: ") +
                              e.what(),
                          read_file_tail(stderr_path));
    }
    if (!out.same_shape(input)) {
        throw FilterError("external filter changed image dimensions",
                          read_file_tail(stderr_path));
    }
    return out;
}

}  // namespace defilter
