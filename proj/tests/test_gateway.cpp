#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "mhqa/cache.hpp"
#include "mhqa/gateway.hpp"
#include "mhqa/http_endpoint.hpp"
#include "mhqa/mock.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <thread>

using namespace mhqa;
using namespace mhqa::gate;
using testutil::FnEndpoint;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "mhqa_gateway_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("mock table lookup returns the scripted completion") {
    MockSpec spec;
    spec.generate.push_back({MockSpec::GenRule::Match::exact, "p", "Shirley Temple"});
    auto handle = make_mock(spec);
    CHECK(handle.generate("p").text == "Shirley Temple");
}

TEST_CASE("empty mock tables yield the UNKNOWN sentinel") {
    auto handle = make_mock(MockSpec{});
    CHECK(handle.generate("anything").text == "UNKNOWN");
}

TEST_CASE("second identical request is served from cache without a network call") {
    auto endpoint = std::make_shared<MockEndpoint>();
    endpoint->add_exact("p", "Shirley Temple");
    ModelHandle handle(endpoint, GatewayOptions{});

    auto first = handle.generate("p");
    CHECK_FALSE(first.cached);
    auto second = handle.generate("p");
    CHECK(second.cached);
    CHECK(second.text == first.text);
    CHECK(endpoint->generate_calls() == 1);
    CHECK(handle.stats().network_calls == 1);
    CHECK(handle.stats().cache_hits == 1);
}

TEST_CASE("429 twice then 200 succeeds on the third attempt") {
    auto endpoint = std::make_shared<FnEndpoint>();
    int failures = 2;
    endpoint->on_generate = [&](const std::string&, const GenParams&) -> GenResult {
        if (failures-- > 0) throw TransientEndpointError("HTTP 429", 429);
        return testutil::completion("ok");
    };
    GatewayOptions options;
    options.retry = {4, std::chrono::milliseconds(1)};
    std::vector<std::string> log;
    options.log = [&](const std::string& m) { log.push_back(m); };
    ModelHandle handle(endpoint, options, std::make_shared<FakeClock>());

    CHECK(handle.generate("p").text == "ok");
    CHECK(endpoint->gen_calls == 3);
    CHECK(handle.stats().retries == 2);
    CHECK(log.size() == 2);  // attempts logged
}

TEST_CASE("exhausted retries raise a permanent failure with the last status") {
    auto endpoint = std::make_shared<FnEndpoint>();
    endpoint->on_generate = [](const std::string&, const GenParams&) -> GenResult {
        throw TransientEndpointError("HTTP 503", 503);
    };
    GatewayOptions options;
    options.retry = {3, std::chrono::milliseconds(1)};
    ModelHandle handle(endpoint, options, std::make_shared<FakeClock>());
    try {
        handle.generate("p");
        FAIL("expected EndpointError");
    } catch (const EndpointError& e) {
        CHECK(e.status() == 503);
        CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    }
    CHECK(endpoint->gen_calls == 3);
}

TEST_CASE("retry never duplicates a successful request") {
    auto endpoint = std::make_shared<FnEndpoint>();
    endpoint->on_generate = [](const std::string&, const GenParams&) {
        return testutil::completion("done");
    };
    ModelHandle handle(endpoint, GatewayOptions{});
    for (int i = 0; i < 5; ++i) handle.generate("same prompt");
    CHECK(endpoint->gen_calls == 1);
}

TEST_CASE("score sums token logprobs into a probability") {
    MockSpec spec;
    spec.score.push_back({"prompt", "two tokens", {-0.5, -0.5}});
    spec.score.push_back({"prompt", "other", {-0.1, -0.2}});
    auto handle = make_mock(spec);

    auto r = handle.score("prompt", "two tokens");
    CHECK(r.total_logprob == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.probability == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(std::abs(r.total_logprob - (r.token_logprobs[0] + r.token_logprobs[1])) < 1e-9);

    auto r2 = handle.score("prompt", "other");
    CHECK(r2.probability == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));

    auto cached = handle.score("prompt", "two tokens");
    CHECK(cached.cached);
    CHECK(cached.total_logprob == r.total_logprob);
}

TEST_CASE("score preconditions") {
    auto handle = make_mock(MockSpec{});
    CHECK_THROWS_AS(handle.score("", "target"), ConfigError);
    CHECK_THROWS_AS(handle.score("prompt", ""), ConfigError);
    CHECK_THROWS_AS(handle.generate(""), ConfigError);
}

TEST_CASE("evaluation rejects non-greedy temperature") {
    GatewayOptions options;
    options.answer_params.temperature = 0.7;
    CHECK_THROWS_AS(ModelHandle(std::make_shared<MockEndpoint>(), options), ConfigError);
}

TEST_CASE("disk cache survives a fresh gateway (cold/warm byte equality)") {
    auto cache_dir = fresh_dir("warm");
    MockSpec spec;
    spec.generate.push_back({MockSpec::GenRule::Match::exact, "p", "stable answer"});

    GatewayOptions options;
    options.cache_dir = cache_dir;
    auto endpoint1 = std::make_shared<MockEndpoint>(spec);
    ModelHandle cold(endpoint1, options);
    auto first = cold.generate("p");

    auto endpoint2 = std::make_shared<MockEndpoint>(spec);
    ModelHandle warm(endpoint2, options);
    auto second = warm.generate("p");

    CHECK(second.cached);
    CHECK(second.text == first.text);
    CHECK(second.finish_reason == first.finish_reason);
    CHECK(endpoint2->generate_calls() == 0);
}

TEST_CASE("cache keys separate prompts, params and targets") {
    auto k1 = CacheKey::for_generate("m", {256, 0.0, {}}, "prompt");
    auto k2 = CacheKey::for_generate("m", {256, 0.0, {}}, "prompt!");
    auto k3 = CacheKey::for_generate("m", {512, 0.0, {}}, "prompt");
    auto k4 = CacheKey::for_generate("m2", {256, 0.0, {}}, "prompt");
    auto k5 = CacheKey::for_score("m", "prompt", "t");
    CHECK(k1.digest != k2.digest);
    CHECK(k1.digest != k3.digest);
    CHECK(k1.digest != k4.digest);
    CHECK(k1.digest != k5.digest);
    CHECK(k1.digest == CacheKey::for_generate("m", {256, 0.0, {}}, "prompt").digest);
}

TEST_CASE("rate limit holds over any 1-second window under a fake clock") {
    auto clock = std::make_shared<FakeClock>();
    auto endpoint = std::make_shared<FnEndpoint>();
    std::vector<Clock::time_point> call_times;
    endpoint->on_generate = [&](const std::string&, const GenParams&) {
        call_times.push_back(clock->now());
        return testutil::completion("x");
    };
    GatewayOptions options;
    options.requests_per_second = 4.0;
    ModelHandle handle(endpoint, options, clock);

    for (int i = 0; i < 12; ++i) handle.generate("p" + std::to_string(i));

    REQUIRE(call_times.size() == 12);
    for (std::size_t i = 0; i < call_times.size(); ++i) {
        std::size_t in_window = 0;
        for (std::size_t j = i; j < call_times.size(); ++j) {
            if (call_times[j] - call_times[i] < std::chrono::seconds(1)) ++in_window;
        }
        CHECK(in_window <= 4);
    }
}

TEST_CASE("in-flight requests stay within the configured bound") {
    auto endpoint = std::make_shared<FnEndpoint>();
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    endpoint->on_generate = [&](const std::string&, const GenParams&) {
        int now = ++in_flight;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --in_flight;
        return testutil::completion("x");
    };
    GatewayOptions options;
    options.max_in_flight = 2;
    ModelHandle handle(endpoint, options);

    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&, i] { handle.generate("p" + std::to_string(i)); });
    for (auto& t : threads) t.join();

    CHECK(endpoint->gen_calls == 8);
    CHECK(peak.load() <= 2);
}

TEST_CASE("mock spec loads from a JSON file") {
    auto dir = fresh_dir("mockspec");
    util::write_file(dir / "table.json", R"({
        "model_id": "scripted",
        "generate": [
            {"contains": "question one", "completion": "alpha"},
            {"exact": "exact prompt", "completion": "beta"}
        ],
        "score": [
            {"prompt": "p", "target": "t", "token_logprobs": [-0.25, -0.25]}
        ],
        "default_completion": "NOPE"
    })");
    auto spec = load_mock_spec(dir / "table.json");
    auto handle = make_mock(spec);
    CHECK(handle.model_id() == "scripted");
    CHECK(handle.generate("contains question one somewhere").text == "alpha");
    CHECK(handle.generate("exact prompt").text == "beta");
    CHECK(handle.generate("nothing matches").text == "NOPE");
    CHECK(handle.score("p", "t").probability == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("openai-compatible endpoint: generation with retry-after-429 and echo scoring") {
    httplib::Server server;
    int chat_calls = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++chat_calls;
        if (chat_calls <= 2) {
            res.status = 429;
            res.set_content("{}", "application/json");
            return;
        }
        res.set_content(R"({
            "choices": [{"message": {"content": "Shirley Temple"}, "finish_reason": "stop"}],
            "usage": {"prompt_tokens": 12, "completion_tokens": 3}
        })",
                        "application/json");
    });
    server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        std::string prompt = body.at("prompt").get<std::string>();
        // Echo scoring: two prompt tokens, then two target tokens at offsets
        // inside the target span.
        nlohmann::json logprobs;
        logprobs["text_offset"] = {0, 3, 6, 9};
        logprobs["token_logprobs"] = {nullptr, -0.9, -0.5, -0.25};
        logprobs["tokens"] = {"pro", "mpt", " a", "b"};
        nlohmann::json choice;
        choice["text"] = prompt;
        choice["logprobs"] = logprobs;
        nlohmann::json reply;
        reply["choices"] = nlohmann::json::array({choice});
        res.set_content(reply.dump(), "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpointConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.model_id = "test-model";
    GatewayOptions options;
    options.retry = {4, std::chrono::milliseconds(1)};
    ModelHandle handle(std::make_shared<HttpEndpoint>(config), options,
                       std::make_shared<FakeClock>());

    auto gen = handle.generate("who held the position?");
    CHECK(gen.text == "Shirley Temple");
    CHECK(gen.prompt_tokens == 12);
    CHECK(chat_calls == 3);
    CHECK(handle.stats().retries == 2);

    // prompt is 6 bytes, so offsets 6 and 9 belong to the target.
    auto score = handle.score("prompt", " ab");
    REQUIRE(score.token_logprobs.size() == 2);
    CHECK(score.token_logprobs[0] == doctest::Approx(-0.5));
    CHECK(score.token_logprobs[1] == doctest::Approx(-0.25));
    CHECK(score.total_logprob == doctest::Approx(-0.75));

    server.stop();
    server_thread.join();
}

TEST_CASE("malformed endpoint payloads raise a decode error without retries") {
    httplib::Server server;
    int calls = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.set_content("this is not json", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpointConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.model_id = "test-model";
    GatewayOptions options;
    options.retry = {4, std::chrono::milliseconds(1)};
    ModelHandle handle(std::make_shared<HttpEndpoint>(config), options,
                       std::make_shared<FakeClock>());

    CHECK_THROWS_AS(handle.generate("hello"), DecodeError);
    CHECK(calls == 1);  // decode failures are not retried

    server.stop();
    server_thread.join();
}
