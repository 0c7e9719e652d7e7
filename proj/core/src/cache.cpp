#include "mhqa/cache.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

namespace mhqa::gate {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& digest) const {
    // Two-level fanout keeps directories small on big runs.
    return dir_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& digest) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = memory_.find(digest);
        if (it != memory_.end()) return it->second;
    }
    if (dir_.empty()) return std::nullopt;
    auto path = path_for(digest);
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::string record = util::read_file(path);
    std::lock_guard<std::mutex> lock(mutex_);
    memory_[digest] = record;
    return record;
}

void ResponseCache::put(const std::string& digest, const std::string& record) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        memory_[digest] = record;
    }
    if (!dir_.empty()) util::write_file_atomic(path_for(digest), record);
}

}  // namespace mhqa::gate
