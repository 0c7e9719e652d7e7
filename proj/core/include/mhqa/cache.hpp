#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace mhqa::gate {

// One file per digest under dir/; writes are atomic per key (temp + rename).
// With an empty dir the cache is memory-only and dies with the process.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& digest);
    void put(const std::string& digest, const std::string& record);

private:
    std::filesystem::path path_for(const std::string& digest) const;

    std::filesystem::path dir_;
    std::mutex mutex_;
    std::map<std::string, std::string> memory_;
};

}  // namespace mhqa::gate
