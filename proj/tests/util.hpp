#pragma once

// Shared helpers for the test binaries: random inputs, scratch directories,
// and a tiny subprocess runner for the CLI-level tests.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "groupinv/matrix.hpp"
#include "groupinv/rng.hpp"

namespace testutil {

inline groupinv::Matrix rand_matrix(groupinv::Rng& rng, int r, int c, double lo = -1.0,
                                    double hi = 1.0) {
    groupinv::Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

inline groupinv::Matrix randn_matrix(groupinv::Rng& rng, int r, int c, double sd = 1.0) {
    groupinv::Matrix m(r, c);
    for (double& v : m.data) v = rng.normal(0.0, sd);
    return m;
}

/// Scratch directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& label) {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / (label + ".XXXXXX")).string();
        if (!mkdtemp(tmpl.data())) {
            throw std::runtime_error("mkdtemp failed for " + tmpl);
        }
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path.string(); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Path to the CLI binary under test, exported by the build as GROUPINV_CLI.
inline std::string cli_path() {
    const char* p = std::getenv("GROUPINV_CLI");
    if (!p || !*p) throw std::runtime_error("GROUPINV_CLI is not set; run through ctest");
    return p;
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

/// Runs `<cli> <args>` through the shell; `env_prefix` may carry VAR=value
/// assignments (e.g. to redirect the output directory).
inline CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + "\"" + cli_path() +
                            "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed: " + cmd);
    CliResult res;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

}  // namespace testutil
