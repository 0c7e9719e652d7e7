#pragma once

#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"
#include "mhqa/scoring.hpp"
#include "mhqa/templates.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mhqa::corpus {

// Contamination probe contexts: the two-hop question asked with partial or no
// gold documents. An instance answerable under any of them is excluded.
inline constexpr const char* kAblationHop1Only = "hop1_only";
inline constexpr const char* kAblationHop2Only = "hop2_only";
inline constexpr const char* kAblationNone = "none";

struct FilterEntry {
    std::string instance_id;
    std::string ablation;
    std::string answer;
    bool correct = false;
};

struct FilterLog {
    std::vector<FilterEntry> entries;
};

struct FilterResult {
    Corpus kept;
    Corpus excluded;
    FilterLog log;
};

// kept and excluded partition the input corpus; deterministic for a fixed
// model and policy. Interrupted runs resume from the gateway's response cache
// without re-querying already-judged instances.
FilterResult filter_contaminated(const Corpus& corpus, const gate::ModelHandle& model,
                                 const scoring::CorrectnessPolicy& policy,
                                 const prompts::InstructionSet& iset, std::size_t parallelism = 1,
                                 const scoring::NormalizeOptions& normalize = {});

void save_filter_log(const FilterLog& log, const std::filesystem::path& path);
FilterLog load_filter_log(const std::filesystem::path& path);

}  // namespace mhqa::corpus
