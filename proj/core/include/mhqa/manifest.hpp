#pragma once

#include "mhqa/condition.hpp"
#include "mhqa/config.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace mhqa::report {

// Canonical record of everything that determines a run's outputs given the
// same endpoint behavior. Every emitted artifact embeds the digest.
struct RunManifest {
    std::string json_text;  // canonical serialized form
    std::string digest;     // sha256 of json_text

    std::string short_digest() const { return digest.substr(0, 12); }
};

RunManifest make_manifest(const RunConfig& config, const std::string& corpus_digest,
                          std::span<const harness::Condition> conditions);

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

// runs/<short-digest> layout helpers.
std::filesystem::path run_dir_for(const std::filesystem::path& runs_dir,
                                  const RunManifest& manifest);

}  // namespace mhqa::report
