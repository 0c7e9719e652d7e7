#pragma once

#include "mhqa/attribution.hpp"
#include "mhqa/condition.hpp"
#include "mhqa/harness.hpp"
#include "mhqa/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mhqa::report {

// Flat key=value run configuration ('#' comments, keys documented in the
// README). Every field can be overridden per-key from the command line.
struct RunConfig {
    // Restricts the run to these languages; empty means the corpus set.
    std::vector<LanguageTag> languages;

    std::string model_kind = "mock";  // mock | openai
    std::string model_endpoint;       // base url for openai kind
    std::string model_id = "mock";
    std::string model_auth_env = "MHQA_API_KEY";
    std::string model_mock_table;  // JSON table for mock kind
    int max_new_tokens = 256;
    int cot_max_new_tokens = 1024;
    std::vector<std::string> stop;
    double requests_per_second = 0.0;
    int retry_max_attempts = 4;
    int retry_base_backoff_ms = 250;
    int max_in_flight = 4;
    long timeout_ms = 120000;
    bool supports_scoring = true;

    std::string cache_dir = ".mhqa-cache";
    std::string runs_dir = "runs";
    std::string templates_dir;  // empty: built-in instruction templates

    scoring::CorrectnessPolicy policy;
    bool strip_en_articles = true;

    harness::GridMode grid = harness::GridMode::classes;
    std::vector<harness::Strategy> strategies = {harness::Strategy::standard};
    std::uint64_t seed = 17;
    std::size_t parallelism = 1;

    prompts::SubQContext subq_context = prompts::SubQContext::single;
    harness::SubQEvalBridge subq_eval_bridge = harness::SubQEvalBridge::gold;

    attribution::ErasureUnit attribution_unit = attribution::ErasureUnit::word;
    attribution::ErasureMode attribution_erasure = attribution::ErasureMode::remove;
    std::string attribution_mask_token = "____";
    bool attribution_log_space = false;
    std::string attribution_tokenizer;  // tokenizer spec for token granularity

    std::string sweep_cohort = "unfaithful_s1";  // unfaithful_s1 | all
    int sweep_d_min = -5;
    int sweep_d_max = 5;
    std::vector<harness::Relevance> sweep_relevance = {harness::Relevance::relevant,
                                                       harness::Relevance::irrelevant};

    std::string lingsim_tokenizer = "char";
};

RunConfig load_config(const std::filesystem::path& path);
void apply_override(RunConfig& config, const std::string& key, const std::string& value);
// "key=value" pairs, e.g. from repeated --set flags.
void apply_overrides(RunConfig& config, const std::vector<std::string>& pairs);

// Canonical JSON of result-affecting settings; feeds the run manifest.
// Execution details (cache/runs dirs, parallelism) stay out on purpose.
std::string config_fingerprint(const RunConfig& config);

}  // namespace mhqa::report
