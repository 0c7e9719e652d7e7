#pragma once

#include "mhqa/gateway.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mhqa::gate {

// Deterministic table-driven model for offline runs and tests.
struct MockSpec {
    struct GenRule {
        enum class Match { exact, contains };
        Match match = Match::contains;
        std::string pattern;
        std::string completion;
    };
    struct ScoreRule {
        std::string prompt;
        std::string target;
        std::vector<double> token_logprobs;
    };

    std::string model_id = "mock";
    std::vector<GenRule> generate;  // first match wins
    std::vector<ScoreRule> score;   // exact (prompt, target) lookup
    std::string default_completion = "UNKNOWN";
    double default_token_logprob = -1.0;  // per whitespace token of the target
};

class MockEndpoint final : public Endpoint {
public:
    explicit MockEndpoint(MockSpec spec = {});

    std::string id() const override { return spec_.model_id; }
    EndpointCaps capabilities() const override { return {true, true}; }
    GenResult generate(const std::string& prompt, const GenParams& params) override;
    ScoreResult score(const std::string& prompt, const std::string& target) override;

    void add_exact(std::string pattern, std::string completion);
    void add_contains(std::string pattern, std::string completion);
    void add_score(std::string prompt, std::string target, std::vector<double> token_logprobs);

    // Functional scorer for synthetic attribution setups; consulted after the
    // exact score table. Returns the probability of the target given prompt.
    using ProbabilityFn = std::function<std::optional<double>(const std::string& prompt,
                                                              const std::string& target)>;
    void set_probability_fn(ProbabilityFn fn);

    std::uint64_t generate_calls() const { return generate_calls_.load(); }
    std::uint64_t score_calls() const { return score_calls_.load(); }

private:
    MockSpec spec_;
    std::map<std::pair<std::string, std::string>, std::vector<double>> score_table_;
    ProbabilityFn probability_fn_;
    std::atomic<std::uint64_t> generate_calls_{0};
    std::atomic<std::uint64_t> score_calls_{0};
};

MockSpec load_mock_spec(const std::filesystem::path& path);

// Handle whose generate/score are pure table lookups; unmatched prompts yield
// the spec's default completion.
ModelHandle make_mock(MockSpec spec, GatewayOptions options = {});

}  // namespace mhqa::gate
