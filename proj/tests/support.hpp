#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include "forge/catalog.hpp"

namespace forge::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "forge") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

// Relative path -> bytes for every regular file below root.
inline std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = read_file(e.path());
    return out;
}

inline AssetRecord primitive_asset(const std::string& id, const std::string& category, PrimitiveKind kind,
                                   PrimitiveParams params = {}, const std::string& description = "") {
    AssetRecord a;
    a.id = id;
    a.category = category;
    a.description = description.empty() ? "a " + category : description;
    a.primitive = PrimitiveSource{kind, params, 0};
    a.canonical_mesh = generate_primitive(kind, params, 0);
    return a;
}

inline AssetRecord box_asset(const std::string& id, const std::string& category, double sx = 1, double sy = 1,
                             double sz = 1, const std::string& description = "") {
    return primitive_asset(id, category, PrimitiveKind::Box, {{"sx", sx}, {"sy", sy}, {"sz", sz}}, description);
}

}  // namespace forge::test
