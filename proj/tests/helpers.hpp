#pragma once

#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"

#include <atomic>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace testutil {

using namespace mhqa;

inline corpus::Document make_doc(const std::string& id, const std::string& title,
                                 const std::string& body, const std::string& lang) {
    corpus::Document d;
    d.id = id;
    d.title = title;
    d.body = body;
    d.language = LanguageTag(lang);
    return d;
}

// Synthetic corpus with unique per-field markers so scripted mocks can match
// prompts by substring. Field text looks like "TWOHOP-q3-fr what connects ...".
inline corpus::Corpus make_corpus(const std::vector<std::string>& langs, std::size_t n,
                                  std::size_t pool_size = 0) {
    corpus::Corpus c;
    for (const auto& l : langs) c.languages.insert(LanguageTag(l));
    c.source_language = LanguageTag(langs.front());
    c.provenance.source = "synthetic";
    for (std::size_t i = 0; i < n; ++i) {
        corpus::QAInstance inst;
        std::string qid = "q" + std::to_string(i);
        inst.id = qid;
        for (const auto& l : langs) {
            LanguageTag tag(l);
            inst.two_hop_question[tag] = "TWOHOP-" + qid + "-" + l + " what connects the facts?";
            inst.subq1[tag] = "SQ1-" + qid + "-" + l + " who is the bridge?";
            inst.subq2_template[tag] = "SQ2-" + qid + "-" + l + " what about <BRIDGE> then?";
            inst.bridge_entity[tag] = "bridge-" + qid + "-" + l;
            inst.gold_answer[tag] = "gold-" + qid + "-" + l;
            inst.hop1_doc[tag] = make_doc("h1-" + qid, "H1 title " + qid + " " + l,
                                          "hopone-" + qid + "-" + l + " carries the bridge fact.", l);
            inst.hop2_doc[tag] = make_doc("h2-" + qid, "H2 title " + qid + " " + l,
                                          "hoptwo-" + qid + "-" + l + " carries the answer fact.", l);
        }
        for (std::size_t p = 0; p < pool_size; ++p) {
            LangMap<corpus::Document> entry;
            for (const auto& l : langs) {
                entry[LanguageTag(l)] =
                    make_doc("pool-" + qid + "-" + std::to_string(p), "Pool " + std::to_string(p),
                             "filler-" + qid + "-" + std::to_string(p) + "-" + l + " noise text.", l);
            }
            inst.distractor_pool.push_back(std::move(entry));
        }
        c.instances.push_back(std::move(inst));
    }
    return c;
}

// Endpoint driven by plain functions; the scripted fake for transport tests.
class FnEndpoint final : public gate::Endpoint {
public:
    std::string model_id = "fn-mock";
    std::function<gate::GenResult(const std::string&, const gate::GenParams&)> on_generate;
    std::function<gate::ScoreResult(const std::string&, const std::string&)> on_score;
    std::atomic<std::uint64_t> gen_calls{0};
    std::atomic<std::uint64_t> score_calls{0};

    std::string id() const override { return model_id; }
    gate::EndpointCaps capabilities() const override { return {true, true}; }

    gate::GenResult generate(const std::string& prompt, const gate::GenParams& params) override {
        gen_calls.fetch_add(1);
        if (!on_generate) return {};
        return on_generate(prompt, params);
    }
    gate::ScoreResult score(const std::string& prompt, const std::string& target) override {
        score_calls.fetch_add(1);
        if (!on_score) return gate::make_score_result({-1.0});
        return on_score(prompt, target);
    }
};

inline gate::GenResult completion(const std::string& text) {
    gate::GenResult r;
    r.text = text;
    return r;
}

}  // namespace testutil
