#include "mhqa/manifest.hpp"

#include "mhqa/error.hpp"
#include "mhqa/sha256.hpp"
#include "mhqa/util.hpp"
#include "mhqa/version.hpp"

#include <json.hpp>

namespace mhqa::report {

using nlohmann::json;

RunManifest make_manifest(const RunConfig& config, const std::string& corpus_digest,
                          std::span<const harness::Condition> conditions) {
    json j;
    j["tool"] = "mhqa";
    j["tool_version"] = kVersion;
    j["corpus_digest"] = corpus_digest;
    j["config"] = json::parse(config_fingerprint(config));
    json cells = json::array();
    for (const auto& c : conditions) cells.push_back(harness::condition_key(c));
    j["conditions"] = cells;

    RunManifest m;
    m.json_text = j.dump();
    m.digest = sha256_hex(m.json_text);
    return m;
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    util::write_file_atomic(path, manifest.json_text + "\n");
}

RunManifest load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("manifest does not exist: " + path.string());
    std::string text = util::read_file(path);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    RunManifest m;
    m.json_text = text;
    m.digest = sha256_hex(m.json_text);
    return m;
}

std::filesystem::path run_dir_for(const std::filesystem::path& runs_dir,
                                  const RunManifest& manifest) {
    return runs_dir / manifest.short_digest();
}

}  // namespace mhqa::report
