#include "mhqa/gateway.hpp"

#include "mhqa/cache.hpp"
#include "mhqa/sha256.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <random>

namespace mhqa::gate {

using nlohmann::json;

ScoreResult make_score_result(std::vector<double> token_logprobs) {
    ScoreResult r;
    r.token_logprobs = std::move(token_logprobs);
    double total = 0.0;
    for (double lp : r.token_logprobs) {
        if (lp > 1e-9) throw DecodeError("token logprob above zero: " + std::to_string(lp));
        total += lp;
    }
    r.total_logprob = total;
    r.probability = std::exp(total);
    if (r.probability > 1.0) r.probability = 1.0;
    return r;
}

CacheKey CacheKey::for_generate(const std::string& model_id, const GenParams& params,
                                const std::string& prompt) {
    json j;
    j["kind"] = "gen";
    j["model"] = model_id;
    j["max_new_tokens"] = params.max_new_tokens;
    j["temperature"] = params.temperature;
    j["stop"] = params.stop;
    j["prompt"] = prompt;
    return CacheKey{sha256_hex(j.dump())};
}

CacheKey CacheKey::for_score(const std::string& model_id, const std::string& prompt,
                             const std::string& target) {
    json j;
    j["kind"] = "score";
    j["model"] = model_id;
    j["prompt"] = prompt;
    j["target"] = target;
    return CacheKey{sha256_hex(j.dump())};
}

namespace {

std::string finish_to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        default: return "error";
    }
}

FinishReason finish_from_string(const std::string& s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    return FinishReason::error;
}

std::string encode_gen(const GenResult& r) {
    json j;
    j["kind"] = "gen";
    j["text"] = r.text;
    j["finish_reason"] = finish_to_string(r.finish_reason);
    j["prompt_tokens"] = r.prompt_tokens;
    j["completion_tokens"] = r.completion_tokens;
    return j.dump();
}

GenResult decode_gen(const std::string& record) {
    json j = json::parse(record);
    GenResult r;
    r.text = j.value("text", "");
    r.finish_reason = finish_from_string(j.value("finish_reason", "stop"));
    r.prompt_tokens = j.value("prompt_tokens", 0L);
    r.completion_tokens = j.value("completion_tokens", 0L);
    return r;
}

std::string encode_score(const ScoreResult& r) {
    json j;
    j["kind"] = "score";
    j["token_logprobs"] = r.token_logprobs;
    return j.dump();
}

ScoreResult decode_score(const std::string& record) {
    json j = json::parse(record);
    return make_score_result(j.value("token_logprobs", std::vector<double>{}));
}

// Bounded in-flight requests without a compile-time ceiling.
class BoundedSlot {
public:
    explicit BoundedSlot(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return in_use_ < limit_; });
        ++in_use_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_use_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t limit_;
    std::size_t in_use_ = 0;
};

struct SlotGuard {
    BoundedSlot& slot;
    explicit SlotGuard(BoundedSlot& s) : slot(s) { slot.acquire(); }
    ~SlotGuard() { slot.release(); }
};

}  // namespace

class Gateway {
public:
    Gateway(std::shared_ptr<Endpoint> endpoint, GatewayOptions options, std::shared_ptr<Clock> clock)
        : endpoint_(std::move(endpoint)),
          options_(std::move(options)),
          clock_(std::move(clock)),
          cache_(options_.cache_dir),
          inflight_(options_.max_in_flight),
          jitter_rng_(options_.jitter_seed) {
        if (!endpoint_) throw ConfigError("gateway requires an endpoint");
        if (options_.answer_params.temperature != 0.0 || options_.cot_params.temperature != 0.0)
            throw ConfigError("evaluation requires temperature 0 (greedy decoding)");
        if (options_.retry.max_attempts < 1)
            throw ConfigError("retry.max_attempts must be at least 1");
        model_id_ = endpoint_->id();
    }

    const GatewayOptions& options() const { return options_; }
    Endpoint& endpoint() { return *endpoint_; }
    const std::string& model_id() const { return model_id_; }

    GenResult generate(const std::string& prompt, const GenParams& params) {
        if (prompt.empty()) throw ConfigError("generate requires a non-empty prompt");
        if (params.temperature != 0.0)
            throw ConfigError("evaluation requires temperature 0 (greedy decoding)");
        CacheKey key = CacheKey::for_generate(endpoint_->id(), params, prompt);
        if (auto record = cache_.get(key.digest)) {
            cache_hits_.fetch_add(1);
            GenResult r = decode_gen(*record);
            r.cached = true;
            return r;
        }
        GenResult r = with_retry<GenResult>([&] { return endpoint_->generate(prompt, params); });
        cache_.put(key.digest, encode_gen(r));
        r.cached = false;
        return r;
    }

    ScoreResult score(const std::string& prompt, const std::string& target) {
        if (prompt.empty()) throw ConfigError("score requires a non-empty prompt");
        if (target.empty()) throw ConfigError("score requires a non-empty target");
        CacheKey key = CacheKey::for_score(endpoint_->id(), prompt, target);
        if (auto record = cache_.get(key.digest)) {
            cache_hits_.fetch_add(1);
            ScoreResult r = decode_score(*record);
            r.cached = true;
            return r;
        }
        ScoreResult r = with_retry<ScoreResult>([&] { return endpoint_->score(prompt, target); });
        cache_.put(key.digest, encode_score(r));
        r.cached = false;
        return r;
    }

    GatewayStats stats() const {
        return GatewayStats{network_calls_.load(), cache_hits_.load(), retries_.load()};
    }
    void reset_stats() {
        network_calls_ = 0;
        cache_hits_ = 0;
        retries_ = 0;
    }

private:
    template <typename R, typename Fn>
    R with_retry(Fn&& fn) {
        int attempt = 0;
        for (;;) {
            ++attempt;
            try {
                rate_limit();
                SlotGuard guard(inflight_);
                network_calls_.fetch_add(1);
                return fn();
            } catch (const TransientEndpointError& e) {
                if (attempt >= options_.retry.max_attempts) {
                    throw EndpointError("permanent failure after " + std::to_string(attempt) +
                                            " attempts: " + e.what(),
                                        e.status());
                }
                retries_.fetch_add(1);
                auto delay = backoff_delay(attempt);
                if (options_.log) {
                    options_.log("retry attempt " + std::to_string(attempt) + " after " +
                                 std::to_string(delay.count()) + "ms: " + e.what());
                }
                clock_->sleep_for(delay);
            }
        }
    }

    void rate_limit() {
        if (options_.requests_per_second <= 0.0) return;
        auto interval = std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(1.0 / options_.requests_per_second));
        Clock::duration wait{};
        {
            std::lock_guard<std::mutex> lock(rate_mutex_);
            auto now = clock_->now();
            if (next_slot_ < now) next_slot_ = now;
            wait = next_slot_ - now;
            next_slot_ += interval;
        }
        clock_->sleep_for(wait);
    }

    std::chrono::milliseconds backoff_delay(int attempt) {
        auto base = options_.retry.base_backoff;
        std::int64_t scaled = base.count() << std::min(attempt - 1, 10);
        std::int64_t jitter = 0;
        if (base.count() > 1) {
            std::lock_guard<std::mutex> lock(jitter_mutex_);
            std::uniform_int_distribution<std::int64_t> dist(0, base.count() / 2);
            jitter = dist(jitter_rng_);
        }
        return std::chrono::milliseconds(scaled + jitter);
    }

    std::shared_ptr<Endpoint> endpoint_;
    GatewayOptions options_;
    std::string model_id_;
    std::shared_ptr<Clock> clock_;
    ResponseCache cache_;
    BoundedSlot inflight_;

    std::mutex rate_mutex_;
    Clock::time_point next_slot_{};

    std::mutex jitter_mutex_;
    std::mt19937_64 jitter_rng_;

    std::atomic<std::uint64_t> network_calls_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
    std::atomic<std::uint64_t> retries_{0};
};

ModelHandle::ModelHandle(std::shared_ptr<Endpoint> endpoint, GatewayOptions options,
                         std::shared_ptr<Clock> clock)
    : gateway_(std::make_shared<Gateway>(std::move(endpoint), std::move(options),
                                         clock ? std::move(clock) : system_clock())) {}

const std::string& ModelHandle::model_id() const {
    static const std::string empty;
    return gateway_ ? gateway_->model_id() : empty;
}

const GenParams& ModelHandle::answer_params() const { return gateway_->options().answer_params; }
const GenParams& ModelHandle::cot_params() const { return gateway_->options().cot_params; }

GenResult ModelHandle::generate(const std::string& prompt) const {
    return gateway_->generate(prompt, gateway_->options().answer_params);
}

GenResult ModelHandle::generate(const std::string& prompt, const GenParams& params) const {
    return gateway_->generate(prompt, params);
}

ScoreResult ModelHandle::score(const std::string& prompt, const std::string& target) const {
    return gateway_->score(prompt, target);
}

bool ModelHandle::supports_scoring() const {
    return gateway_ && gateway_->endpoint().capabilities().scoring;
}

void ModelHandle::require_scoring() const {
    if (!supports_scoring())
        throw CapabilityError("model '" + std::string(model_id()) +
                              "' does not support forced-continuation scoring");
}

GatewayStats ModelHandle::stats() const { return gateway_->stats(); }
void ModelHandle::reset_stats() const { gateway_->reset_stats(); }

}  // namespace mhqa::gate
