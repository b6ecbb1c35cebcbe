#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

/// Self-cleaning scratch directory for file round-trip tests.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 eng{std::random_device{}()};
        path = std::filesystem::temp_directory_path() /
               ("quakeinv_" + tag + "_" + std::to_string(eng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil
