#include "mhqa/mock.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace mhqa::gate {

using nlohmann::json;

MockEndpoint::MockEndpoint(MockSpec spec) : spec_(std::move(spec)) {
    for (const auto& rule : spec_.score)
        score_table_[{rule.prompt, rule.target}] = rule.token_logprobs;
}

void MockEndpoint::add_exact(std::string pattern, std::string completion) {
    spec_.generate.push_back(
        {MockSpec::GenRule::Match::exact, std::move(pattern), std::move(completion)});
}

void MockEndpoint::add_contains(std::string pattern, std::string completion) {
    spec_.generate.push_back(
        {MockSpec::GenRule::Match::contains, std::move(pattern), std::move(completion)});
}

void MockEndpoint::add_score(std::string prompt, std::string target,
                             std::vector<double> token_logprobs) {
    score_table_[{std::move(prompt), std::move(target)}] = std::move(token_logprobs);
}

void MockEndpoint::set_probability_fn(ProbabilityFn fn) { probability_fn_ = std::move(fn); }

GenResult MockEndpoint::generate(const std::string& prompt, const GenParams&) {
    generate_calls_.fetch_add(1);
    GenResult r;
    r.finish_reason = FinishReason::stop;
    r.prompt_tokens = static_cast<long>(prompt.size());
    for (const auto& rule : spec_.generate) {
        bool hit = rule.match == MockSpec::GenRule::Match::exact
                       ? prompt == rule.pattern
                       : prompt.find(rule.pattern) != std::string::npos;
        if (hit) {
            r.text = rule.completion;
            r.completion_tokens = static_cast<long>(rule.completion.size());
            return r;
        }
    }
    r.text = spec_.default_completion;
    r.completion_tokens = static_cast<long>(r.text.size());
    return r;
}

ScoreResult MockEndpoint::score(const std::string& prompt, const std::string& target) {
    score_calls_.fetch_add(1);
    auto it = score_table_.find({prompt, target});
    if (it != score_table_.end()) return make_score_result(it->second);
    if (probability_fn_) {
        if (auto p = probability_fn_(prompt, target)) {
            if (!(*p > 0.0 && *p <= 1.0))
                throw DecodeError("mock probability out of (0, 1]: " + std::to_string(*p));
            return make_score_result({std::log(*p)});
        }
    }
    // Fall back to one default logprob per whitespace token of the target.
    std::istringstream iss(target);
    std::string tok;
    std::size_t n = 0;
    while (iss >> tok) ++n;
    if (n == 0) n = 1;
    return make_score_result(std::vector<double>(n, spec_.default_token_logprob));
}

MockSpec load_mock_spec(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const json::exception& ex) {
        throw ConfigError("mock table " + path.string() + ": " + ex.what());
    }
    MockSpec spec;
    spec.model_id = j.value("model_id", std::string("mock"));
    spec.default_completion = j.value("default_completion", std::string("UNKNOWN"));
    spec.default_token_logprob = j.value("default_token_logprob", -1.0);
    for (const auto& rule : j.value("generate", json::array())) {
        MockSpec::GenRule g;
        if (rule.contains("exact")) {
            g.match = MockSpec::GenRule::Match::exact;
            g.pattern = rule["exact"].get<std::string>();
        } else if (rule.contains("contains")) {
            g.match = MockSpec::GenRule::Match::contains;
            g.pattern = rule["contains"].get<std::string>();
        } else {
            throw ConfigError("mock generate rule needs 'exact' or 'contains'");
        }
        g.completion = rule.value("completion", "");
        spec.generate.push_back(std::move(g));
    }
    for (const auto& rule : j.value("score", json::array())) {
        MockSpec::ScoreRule s;
        s.prompt = rule.value("prompt", "");
        s.target = rule.value("target", "");
        s.token_logprobs = rule.value("token_logprobs", std::vector<double>{});
        spec.score.push_back(std::move(s));
    }
    return spec;
}

ModelHandle make_mock(MockSpec spec, GatewayOptions options) {
    return ModelHandle(std::make_shared<MockEndpoint>(std::move(spec)), std::move(options));
}

}  // namespace mhqa::gate
