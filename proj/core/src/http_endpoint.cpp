#include "mhqa/http_endpoint.hpp"

#include "mhqa/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

namespace mhqa::gate {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string scheme_host;  // http(s)://host:port
    std::string prefix;       // path prefix, e.g. /v1
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint url must start with http:// or https://: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host = base_url;
    } else {
        out.scheme_host = base_url.substr(0, path_start);
        out.prefix = base_url.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

bool retryable_status(int status) { return status == 429 || status == 408 || status >= 500; }

}  // namespace

struct HttpEndpoint::Impl {
    HttpEndpointConfig config;
    SplitUrl url;
    std::unique_ptr<httplib::Client> client;

    explicit Impl(HttpEndpointConfig cfg) : config(std::move(cfg)), url(split_base_url(config.base_url)) {
        client = std::make_unique<httplib::Client>(url.scheme_host);
        if (!client->is_valid()) throw ConfigError("invalid endpoint url: " + config.base_url);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
        client->set_connection_timeout(static_cast<time_t>(std::max<long>(1, secs.count())), 0);
        client->set_read_timeout(static_cast<time_t>(std::max<long>(1, secs.count())), 0);
        client->set_write_timeout(static_cast<time_t>(std::max<long>(1, secs.count())), 0);
        if (!config.auth_env.empty()) {
            const char* token = std::getenv(config.auth_env.c_str());
            if (token && *token) client->set_bearer_token_auth(token);
        }
    }

    json post(const std::string& route, const json& body) {
        auto res = client->Post(url.prefix + route, body.dump(), "application/json");
        if (!res) {
            throw TransientEndpointError("connection failure to " + config.base_url + ": " +
                                         httplib::to_string(res.error()));
        }
        if (res->status >= 400) {
            std::string msg = "HTTP " + std::to_string(res->status) + " from " + route;
            if (retryable_status(res->status)) throw TransientEndpointError(msg, res->status);
            throw EndpointError(msg + ": " + res->body.substr(0, 400), res->status);
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& ex) {
            throw DecodeError("malformed endpoint response from " + route + ": " + ex.what());
        }
    }
};

HttpEndpoint::HttpEndpoint(HttpEndpointConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    if (impl_->config.model_id.empty()) throw ConfigError("endpoint model_id must be set");
}

HttpEndpoint::~HttpEndpoint() = default;

std::string HttpEndpoint::id() const { return impl_->config.model_id; }

EndpointCaps HttpEndpoint::capabilities() const {
    return {true, impl_->config.supports_scoring};
}

GenResult HttpEndpoint::generate(const std::string& prompt, const GenParams& params) {
    json body;
    body["model"] = impl_->config.model_id;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_new_tokens;
    if (!params.stop.empty()) body["stop"] = params.stop;

    json reply = impl_->post("/chat/completions", body);
    try {
        const auto& choice = reply.at("choices").at(0);
        GenResult r;
        r.text = choice.at("message").at("content").get<std::string>();
        std::string finish = choice.value("finish_reason", "stop");
        r.finish_reason = finish == "length" ? FinishReason::length
                          : finish == "stop" ? FinishReason::stop
                                             : FinishReason::error;
        if (reply.contains("usage")) {
            r.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
            r.completion_tokens = reply["usage"].value("completion_tokens", 0L);
        }
        return r;
    } catch (const json::exception& ex) {
        throw DecodeError(std::string("unexpected chat/completions payload: ") + ex.what());
    }
}

ScoreResult HttpEndpoint::score(const std::string& prompt, const std::string& target) {
    json body;
    body["model"] = impl_->config.model_id;
    body["prompt"] = prompt + target;
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = 0;
    body["temperature"] = 0.0;

    json reply = impl_->post("/completions", body);
    try {
        const auto& choice = reply.at("choices").at(0);
        if (!choice.contains("logprobs") || choice["logprobs"].is_null())
            throw CapabilityError("endpoint returned no logprobs; echo scoring unsupported?");
        const auto& lp = choice["logprobs"];
        const auto& offsets = lp.at("text_offset");
        const auto& logprobs = lp.at("token_logprobs");
        std::vector<double> target_logprobs;
        for (std::size_t i = 0; i < offsets.size() && i < logprobs.size(); ++i) {
            // Tokens starting inside the target span; a token straddling the
            // prompt/target boundary stays with the prompt.
            if (offsets[i].get<long>() < static_cast<long>(prompt.size())) continue;
            if (logprobs[i].is_null())
                throw DecodeError("null logprob inside the forced target span");
            target_logprobs.push_back(logprobs[i].get<double>());
        }
        if (target_logprobs.empty())
            throw DecodeError("no target tokens in echo-scoring response");
        return make_score_result(std::move(target_logprobs));
    } catch (const json::exception& ex) {
        throw DecodeError(std::string("unexpected completions payload: ") + ex.what());
    }
}

}  // namespace mhqa::gate
