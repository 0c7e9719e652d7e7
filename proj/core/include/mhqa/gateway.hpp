#pragma once

#include "mhqa/clock.hpp"
#include "mhqa/error.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mhqa::gate {

struct GenParams {
    int max_new_tokens = 256;
    double temperature = 0.0;  // evaluation runs require greedy decoding
    std::vector<std::string> stop;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds base_backoff{250};
};

enum class FinishReason { stop, length, error };

struct GenResult {
    std::string text;  // raw completion, no post-processing
    FinishReason finish_reason = FinishReason::stop;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool cached = false;
};

struct ScoreResult {
    std::vector<double> token_logprobs;  // forced target tokens, in order
    double total_logprob = 0.0;
    double probability = 1.0;  // exp(total_logprob)
    bool cached = false;
};

ScoreResult make_score_result(std::vector<double> token_logprobs);

struct EndpointCaps {
    bool generation = true;
    bool scoring = false;
};

// Raw transport. Implementations throw TransientEndpointError for retryable
// failures; the Gateway owns retry, caching and rate limiting.
class Endpoint {
public:
    virtual ~Endpoint() = default;
    virtual std::string id() const = 0;  // model id, also part of cache keys
    virtual EndpointCaps capabilities() const = 0;
    virtual GenResult generate(const std::string& prompt, const GenParams& params) = 0;
    virtual ScoreResult score(const std::string& prompt, const std::string& target) = 0;
};

// Content-addressed request digest: any byte difference in the model id,
// params, prompt or target changes the digest.
struct CacheKey {
    std::string digest;

    static CacheKey for_generate(const std::string& model_id, const GenParams& params,
                                 const std::string& prompt);
    static CacheKey for_score(const std::string& model_id, const std::string& prompt,
                              const std::string& target);
};

struct GatewayOptions {
    GenParams answer_params{256, 0.0, {}};
    GenParams cot_params{1024, 0.0, {}};
    double requests_per_second = 0.0;  // 0 disables rate limiting
    RetryPolicy retry;
    std::size_t max_in_flight = 4;
    std::filesystem::path cache_dir;  // empty: in-memory cache only
    std::uint64_t jitter_seed = 0;
    std::function<void(const std::string&)> log;  // retry/backoff events
};

struct GatewayStats {
    std::uint64_t network_calls = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t retries = 0;
};

class Gateway;

// Value handle over a gateway; cheap to copy, safe to share across threads.
class ModelHandle {
public:
    ModelHandle() = default;
    ModelHandle(std::shared_ptr<Endpoint> endpoint, GatewayOptions options,
                std::shared_ptr<Clock> clock = system_clock());

    bool valid() const { return gateway_ != nullptr; }
    const std::string& model_id() const;
    const GenParams& answer_params() const;
    const GenParams& cot_params() const;

    GenResult generate(const std::string& prompt) const;  // answer_params
    GenResult generate(const std::string& prompt, const GenParams& params) const;
    ScoreResult score(const std::string& prompt, const std::string& target) const;

    bool supports_scoring() const;
    // CapabilityError up front rather than mid-run.
    void require_scoring() const;

    GatewayStats stats() const;
    void reset_stats() const;

private:
    std::shared_ptr<Gateway> gateway_;
};

}  // namespace mhqa::gate
