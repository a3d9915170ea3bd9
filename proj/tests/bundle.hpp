#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include "filamenta/commands.hpp"

namespace bundle {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("filamenta_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name, std::ios::binary) << text;
        return (path_ / name).string();
    }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Every output file except the timing record.
inline std::map<std::string, std::string> contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name != "timing.json") {
            out[name] = slurp(e.path());
        }
    }
    return out;
}

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

inline Run run(const std::string& command, const std::string& config, std::optional<std::uint64_t> seed,
               const std::string& outDir, unsigned workers = 1) {
    filamenta::CommandOptions opts;
    opts.command = command;
    opts.configPath = config;
    opts.seed = seed;
    opts.outDir = outDir;
    opts.workers = workers;
    std::ostringstream o, e;
    Run r;
    r.code = filamenta::runCommand(opts, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

} // namespace bundle
