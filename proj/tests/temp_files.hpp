#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

// Per-process scratch directory for tests that touch the filesystem.
struct TempDir {
    std::filesystem::path dir;

    TempDir() {
        dir = std::filesystem::temp_directory_path() /
              ("sarcd_test_" + std::to_string(static_cast<long>(::getpid())));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

inline void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}
