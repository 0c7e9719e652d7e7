#include "mhqa/config.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

namespace mhqa::report {

using nlohmann::json;

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long out = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    for (auto& part : util::split(value, ',')) {
        std::string trimmed = util::trim(part);
        if (!trimmed.empty()) out.push_back(std::move(trimmed));
    }
    return out;
}

}  // namespace

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "languages") {
        c.languages.clear();
        for (const auto& code : parse_list(value)) c.languages.push_back(LanguageTag(code));
    } else if (key == "model.kind") {
        if (value != "mock" && value != "openai")
            throw ConfigError("model.kind must be 'mock' or 'openai'");
        c.model_kind = value;
    } else if (key == "model.endpoint") {
        c.model_endpoint = value;
    } else if (key == "model.id") {
        c.model_id = value;
    } else if (key == "model.auth_env") {
        c.model_auth_env = value;
    } else if (key == "model.mock_table") {
        c.model_mock_table = value;
    } else if (key == "model.max_new_tokens") {
        c.max_new_tokens = static_cast<int>(parse_long(key, value));
        if (c.max_new_tokens <= 0) throw ConfigError("model.max_new_tokens must be positive");
    } else if (key == "model.cot_max_new_tokens") {
        c.cot_max_new_tokens = static_cast<int>(parse_long(key, value));
        if (c.cot_max_new_tokens <= 0) throw ConfigError("model.cot_max_new_tokens must be positive");
    } else if (key == "model.stop") {
        c.stop = parse_list(value);
    } else if (key == "model.temperature") {
        // Accepted for completeness; evaluation commands reject non-zero.
        if (parse_double(key, value) != 0.0)
            throw ConfigError("evaluation requires temperature 0 (greedy decoding)");
    } else if (key == "model.rps") {
        c.requests_per_second = parse_double(key, value);
    } else if (key == "model.retry_max_attempts") {
        c.retry_max_attempts = static_cast<int>(parse_long(key, value));
    } else if (key == "model.retry_base_backoff_ms") {
        c.retry_base_backoff_ms = static_cast<int>(parse_long(key, value));
    } else if (key == "model.max_in_flight") {
        c.max_in_flight = static_cast<int>(parse_long(key, value));
    } else if (key == "model.timeout_ms") {
        c.timeout_ms = parse_long(key, value);
    } else if (key == "model.supports_scoring") {
        c.supports_scoring = parse_bool(key, value);
    } else if (key == "cache_dir") {
        c.cache_dir = value;
    } else if (key == "runs_dir") {
        c.runs_dir = value;
    } else if (key == "templates_dir") {
        c.templates_dir = value;
    } else if (key == "policy.mode") {
        c.policy.mode = scoring::correctness_mode_from_string(value);
    } else if (key == "policy.threshold") {
        c.policy.threshold = parse_double(key, value);
    } else if (key == "scoring.strip_en_articles") {
        c.strip_en_articles = parse_bool(key, value);
    } else if (key == "grid") {
        c.grid = harness::grid_mode_from_string(value);
    } else if (key == "strategies") {
        c.strategies.clear();
        for (const auto& s : parse_list(value)) c.strategies.push_back(harness::strategy_from_string(s));
        if (c.strategies.empty()) throw ConfigError("strategies must not be empty");
    } else if (key == "seed") {
        c.seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "parallelism") {
        c.parallelism = static_cast<std::size_t>(parse_long(key, value));
        if (c.parallelism == 0) c.parallelism = 1;
    } else if (key == "subq.context") {
        if (value == "single")
            c.subq_context = prompts::SubQContext::single;
        else if (value == "both")
            c.subq_context = prompts::SubQContext::both;
        else
            throw ConfigError("subq.context must be 'single' or 'both'");
    } else if (key == "subq.eval_bridge") {
        if (value == "gold")
            c.subq_eval_bridge = harness::SubQEvalBridge::gold;
        else if (value == "predicted")
            c.subq_eval_bridge = harness::SubQEvalBridge::predicted;
        else
            throw ConfigError("subq.eval_bridge must be 'gold' or 'predicted'");
    } else if (key == "attribution.unit") {
        c.attribution_unit = attribution::erasure_unit_from_string(value);
    } else if (key == "attribution.erasure") {
        if (value == "delete")
            c.attribution_erasure = attribution::ErasureMode::remove;
        else if (value == "mask")
            c.attribution_erasure = attribution::ErasureMode::mask;
        else
            throw ConfigError("attribution.erasure must be 'delete' or 'mask'");
    } else if (key == "attribution.mask_token") {
        c.attribution_mask_token = value;
    } else if (key == "attribution.space") {
        if (value == "prob")
            c.attribution_log_space = false;
        else if (value == "log")
            c.attribution_log_space = true;
        else
            throw ConfigError("attribution.space must be 'prob' or 'log'");
    } else if (key == "attribution.tokenizer") {
        c.attribution_tokenizer = value;
    } else if (key == "sweep.cohort") {
        if (value != "unfaithful_s1" && value != "all")
            throw ConfigError("sweep.cohort must be 'unfaithful_s1' or 'all'");
        c.sweep_cohort = value;
    } else if (key == "sweep.d_min") {
        c.sweep_d_min = static_cast<int>(parse_long(key, value));
    } else if (key == "sweep.d_max") {
        c.sweep_d_max = static_cast<int>(parse_long(key, value));
    } else if (key == "sweep.relevance") {
        c.sweep_relevance.clear();
        for (const auto& r : parse_list(value))
            c.sweep_relevance.push_back(harness::relevance_from_string(r));
        if (c.sweep_relevance.empty()) throw ConfigError("sweep.relevance must not be empty");
    } else if (key == "lingsim.tokenizer") {
        c.lingsim_tokenizer = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& pairs) {
    for (const auto& pair : pairs) {
        auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like key=value, got '" + pair + "'");
        apply_override(config, util::trim(pair.substr(0, eq)), util::trim(pair.substr(eq + 1)));
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("config file does not exist: " + path.string());
    RunConfig config;
    std::size_t line_no = 0;
    for (const auto& raw : util::read_lines(path)) {
        ++line_no;
        std::string line = util::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        try {
            apply_override(config, util::trim(line.substr(0, eq)), util::trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

std::string config_fingerprint(const RunConfig& c) {
    json j;
    json langs = json::array();
    for (const auto& l : c.languages) langs.push_back(l.code());
    j["languages"] = langs;
    j["model"] = {
        {"kind", c.model_kind},
        {"endpoint", c.model_endpoint},
        {"id", c.model_id},
        {"mock_table", c.model_mock_table},
        {"max_new_tokens", c.max_new_tokens},
        {"cot_max_new_tokens", c.cot_max_new_tokens},
        {"stop", c.stop},
        {"temperature", 0.0},
    };
    j["policy"] = {{"mode", scoring::to_string(c.policy.mode)}, {"threshold", c.policy.threshold}};
    j["scoring"] = {{"strip_en_articles", c.strip_en_articles}};
    j["grid"] = harness::to_string(c.grid);
    json strategies = json::array();
    for (auto s : c.strategies) strategies.push_back(harness::to_string(s));
    j["strategies"] = strategies;
    j["seed"] = c.seed;
    j["subq"] = {
        {"context", c.subq_context == prompts::SubQContext::both ? "both" : "single"},
        {"eval_bridge",
         c.subq_eval_bridge == harness::SubQEvalBridge::predicted ? "predicted" : "gold"},
    };
    j["attribution"] = {
        {"unit", attribution::to_string(c.attribution_unit)},
        {"erasure", c.attribution_erasure == attribution::ErasureMode::mask ? "mask" : "delete"},
        {"mask_token", c.attribution_mask_token},
        {"space", c.attribution_log_space ? "log" : "prob"},
        {"tokenizer", c.attribution_tokenizer},
    };
    json relevance = json::array();
    for (auto r : c.sweep_relevance) relevance.push_back(harness::to_string(r));
    j["sweep"] = {
        {"cohort", c.sweep_cohort},
        {"d_min", c.sweep_d_min},
        {"d_max", c.sweep_d_max},
        {"relevance", relevance},
    };
    j["templates_dir"] = c.templates_dir;
    j["lingsim"] = {{"tokenizer", c.lingsim_tokenizer}};
    return j.dump();
}

}  // namespace mhqa::report
