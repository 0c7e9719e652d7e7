#pragma once

#include "mhqa/gateway.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace mhqa::gate {

// OpenAI-compatible server: chat/completions for greedy generation and the
// completions route with echo logprobs for forced-continuation scoring.
struct HttpEndpointConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8000/v1
    std::string model_id;
    std::string auth_env;  // env var holding the bearer token; empty = no auth
    std::chrono::milliseconds timeout{120000};
    bool supports_scoring = true;  // declared capability, checked before scoring runs
};

class HttpEndpoint final : public Endpoint {
public:
    explicit HttpEndpoint(HttpEndpointConfig config);
    ~HttpEndpoint() override;

    std::string id() const override;
    EndpointCaps capabilities() const override;
    GenResult generate(const std::string& prompt, const GenParams& params) override;
    ScoreResult score(const std::string& prompt, const std::string& target) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mhqa::gate
