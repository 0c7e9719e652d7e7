#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "mhqa/harness.hpp"
#include "mhqa/mock.hpp"
#include "mhqa/perturb.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace mhqa;
using namespace mhqa::perturb;
using testutil::make_corpus;

namespace {

Condition cond(const std::string& q, const std::string& h1, const std::string& h2) {
    return Condition{lang(q), lang(h1), lang(h2), harness::Strategy::standard, std::nullopt};
}

DistractorPool pool_of(std::size_t n) {
    DistractorPool pool;
    for (std::size_t i = 0; i < n; ++i)
        pool.documents.push_back(
            testutil::make_doc("x" + std::to_string(i), "X", "distractor " + std::to_string(i), "en"));
    return pool;
}

}  // namespace

TEST_CASE("place realizes the signed distance rule") {
    auto h1 = testutil::make_doc("h1", "H1", "hop one", "en");
    auto h2 = testutil::make_doc("h2", "H2", "hop two", "en");
    auto pool = pool_of(4);

    auto d1 = place(h1, h2, pool, 1);
    REQUIRE(d1.size() == 2);
    CHECK(d1[0].id == "h1");
    CHECK(d1[1].id == "h2");

    auto d3 = place(h1, h2, pool, 3);
    REQUIRE(d3.size() == 4);
    CHECK(d3[0].id == "h1");
    CHECK(d3[1].id == "x0");
    CHECK(d3[2].id == "x1");
    CHECK(d3[3].id == "h2");

    auto dm2 = place(h1, h2, pool, -2);
    REQUIRE(dm2.size() == 3);
    CHECK(dm2[0].id == "h2");
    CHECK(dm2[1].id == "x0");
    CHECK(dm2[2].id == "h1");
}

TEST_CASE("place rejects d=0 and insufficient pools") {
    auto h1 = testutil::make_doc("h1", "H1", "hop one", "en");
    auto h2 = testutil::make_doc("h2", "H2", "hop two", "en");
    CHECK_THROWS_AS(place(h1, h2, pool_of(4), 0), ValidationError);
    CHECK_THROWS_AS(place(h1, h2, pool_of(1), 5), ValidationError);
}

TEST_CASE("placement counts and uniqueness across the full d range") {
    auto h1 = testutil::make_doc("h1", "H1", "hop one", "en");
    auto h2 = testutil::make_doc("h2", "H2", "hop two", "en");
    auto pool = pool_of(6);
    for (int d : {-5, -4, -3, -2, -1, 1, 2, 3, 4, 5}) {
        auto seq = place(h1, h2, pool, d);
        CHECK(seq.size() == static_cast<std::size_t>(std::abs(d)) + 1);
        std::size_t k = static_cast<std::size_t>(std::abs(d)) - 1;
        std::set<std::string> ids;
        for (const auto& doc : seq) ids.insert(doc.id);
        CHECK(ids.size() == seq.size());  // gold once each, distractors distinct
        CHECK(ids.count("h1") == 1);
        CHECK(ids.count("h2") == 1);
        CHECK(seq.front().id == (d > 0 ? "h1" : "h2"));
        CHECK(seq.back().id == (d > 0 ? "h2" : "h1"));
        CHECK(ids.size() - 2 == k);
    }
}

TEST_CASE("relevant pools come from the instance, irrelevant from other instances") {
    auto c = make_corpus({"en"}, 6, 3);
    const auto& inst = c.instances[0];

    auto relevant = build_pool(c, inst, Relevance::relevant, lang("en"), 1);
    CHECK(relevant.source == DistractorPool::Source::instance_pool);
    CHECK(relevant.documents.size() == 3);
    for (const auto& doc : relevant.documents) CHECK(doc.id.rfind("pool-q0-", 0) == 0);

    auto irrelevant = build_pool(c, inst, Relevance::irrelevant, lang("en"), 1);
    CHECK(irrelevant.source == DistractorPool::Source::foreign_instances);
    CHECK(!irrelevant.documents.empty());
    for (const auto& doc : irrelevant.documents) {
        CHECK(doc.id.find("q0") == std::string::npos);  // never this instance's docs
    }
}

TEST_CASE("irrelevant pools are deterministic for a fixed seed") {
    auto c = make_corpus({"en"}, 8);
    const auto& inst = c.instances[2];
    auto a = build_pool(c, inst, Relevance::irrelevant, lang("en"), 42);
    auto b = build_pool(c, inst, Relevance::irrelevant, lang("en"), 42);
    REQUIRE(a.documents.size() == b.documents.size());
    for (std::size_t i = 0; i < a.documents.size(); ++i)
        CHECK(a.documents[i].id == b.documents[i].id);

    auto other = build_pool(c, inst, Relevance::irrelevant, lang("en"), 43);
    bool same_order = true;
    for (std::size_t i = 0; i < std::min(a.documents.size(), other.documents.size()); ++i)
        if (a.documents[i].id != other.documents[i].id) same_order = false;
    CHECK_FALSE(same_order);  // different seed shuffles differently
}

TEST_CASE("pools never contain the instance's gold documents") {
    auto c = make_corpus({"en"}, 100, 2);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, c.instances.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto& inst = c.instances[pick(rng)];
        std::string h1 = inst.hop1_doc.at(lang("en")).id;
        std::string h2 = inst.hop2_doc.at(lang("en")).id;
        for (auto rel : {Relevance::relevant, Relevance::irrelevant}) {
            auto pool = build_pool(c, inst, rel, lang("en"), trial);
            for (const auto& doc : pool.documents) {
                CHECK(doc.id != h1);
                CHECK(doc.id != h2);
            }
        }
    }
}

TEST_CASE("empty relevant pool is an unavailable-mode error naming the instance") {
    auto c = make_corpus({"en"}, 3, 0);
    CHECK_THROWS_WITH_AS(build_pool(c, c.instances[1], Relevance::relevant, lang("en"), 0),
                         doctest::Contains("q1"), ValidationError);
    auto tiny = make_corpus({"en"}, 2);
    CHECK_THROWS_AS(build_pool(tiny, tiny.instances[0], Relevance::irrelevant, lang("en"), 0),
                    ValidationError);
}

TEST_CASE("sweep over a distractor-indifferent mock is flat") {
    auto c = make_corpus({"en"}, 4, 0);
    gate::MockSpec spec;
    for (const auto& inst : c.instances)
        spec.generate.push_back({gate::MockSpec::GenRule::Match::contains,
                                 "TWOHOP-" + inst.id + "-en", "gold-" + inst.id + "-en"});
    auto model = gate::make_mock(spec);
    auto iset = prompts::InstructionSet::builtin();

    std::vector<SweepEntry> cohort;
    for (const auto& inst : c.instances) cohort.push_back({inst.id, cond("en", "en", "en")});
    std::vector<int> ds{-3, -2, -1, 1, 2, 3};
    auto result = sweep(c, cohort, model, ds, Relevance::irrelevant,
                        scoring::CorrectnessPolicy{}, iset, 7);
    REQUIRE(result.rows.size() == ds.size());
    for (const auto& row : result.rows) {
        CHECK(row.mean_f1 == doctest::Approx(1.0));
        CHECK(row.n == cohort.size());
    }
    CHECK(result.failures == 0);
}

TEST_CASE("sweep detects order sensitivity: reversed order scores worse") {
    auto c = make_corpus({"en"}, 5, 0);
    // Scripted endpoint: correct only when Hop-1 appears before Hop-2.
    auto endpoint = std::make_shared<testutil::FnEndpoint>();
    endpoint->on_generate = [&](const std::string& prompt,
                                const gate::GenParams&) -> gate::GenResult {
        for (const auto& inst : c.instances) {
            if (prompt.find("TWOHOP-" + inst.id + "-en") == std::string::npos) continue;
            auto p1 = prompt.find("hopone-" + inst.id + "-en");
            auto p2 = prompt.find("hoptwo-" + inst.id + "-en");
            if (p1 != std::string::npos && p2 != std::string::npos && p1 < p2)
                return testutil::completion("gold-" + inst.id + "-en");
            return testutil::completion("nope");
        }
        return testutil::completion("nope");
    };
    gate::ModelHandle model(endpoint, gate::GatewayOptions{});
    auto iset = prompts::InstructionSet::builtin();

    std::vector<SweepEntry> cohort;
    for (const auto& inst : c.instances) cohort.push_back({inst.id, cond("en", "en", "en")});
    std::vector<int> ds{-3, -2, -1, 1, 2, 3};
    auto result = sweep(c, cohort, model, ds, Relevance::irrelevant,
                        scoring::CorrectnessPolicy{}, iset, 7);

    std::map<int, double> by_d;
    for (const auto& row : result.rows) by_d[row.d] = row.mean_f1;
    for (int d : {1, 2, 3}) {
        CHECK(by_d.at(-d) < by_d.at(d));
        CHECK(by_d.at(d) == doctest::Approx(1.0));
        CHECK(by_d.at(-d) == doctest::Approx(0.0));
    }
}

TEST_CASE("sweep rows serialize to the fig-4 column layout") {
    SweepResult result;
    result.rows = {{-2, Relevance::relevant, 0.5, 4}, {1, Relevance::relevant, 0.75, 4}};
    result.failures = 1;
    auto path = std::filesystem::temp_directory_path() / "mhqa_sweep_test.tsv";
    save_sweep_result(result, path);
    auto loaded = load_sweep_result(path);
    REQUIRE(loaded.rows.size() == 2);
    CHECK(loaded.rows[0].d == -2);
    CHECK(loaded.rows[0].relevance == Relevance::relevant);
    CHECK(loaded.rows[0].mean_f1 == doctest::Approx(0.5));
    CHECK(loaded.rows[0].n == 4);
    CHECK(loaded.failures == 1);

    auto tsv = sweep_rows_to_tsv(result.rows);
    CHECK(tsv.rfind("d\trelevance\tf1\tn\n", 0) == 0);
}

TEST_CASE("distractor plans flow through evaluate_instance context assembly") {
    auto c = make_corpus({"en"}, 4, 2);
    const auto& inst = c.instances[0];
    auto iset = prompts::InstructionSet::builtin();

    // Capture the two-hop prompt to count distractors in the document block.
    std::string captured;
    auto endpoint = std::make_shared<testutil::FnEndpoint>();
    endpoint->on_generate = [&](const std::string& prompt, const gate::GenParams&) {
        if (prompt.find("TWOHOP-q0-en") != std::string::npos && captured.empty())
            captured = prompt;
        return testutil::completion("whatever");
    };
    gate::ModelHandle model(endpoint, gate::GatewayOptions{});

    harness::Condition with_plan = cond("en", "en", "en");
    with_plan.distractor_plan = harness::DistractorPlan{3, Relevance::relevant, lang("en"), 9};
    harness::EvalOptions options;
    options.full_corpus = &c;
    harness::evaluate_instance(inst, with_plan, model, scoring::CorrectnessPolicy{}, iset, options);

    REQUIRE(!captured.empty());
    CHECK(util::count_occurrences(captured, "Title:") == 4);  // hop1 + 2 distractors + hop2
    CHECK(captured.find("filler-q0-0-en") != std::string::npos);
    CHECK(captured.find("filler-q0-1-en") != std::string::npos);
    auto h1_pos = captured.find("hopone-q0-en");
    auto h2_pos = captured.find("hoptwo-q0-en");
    auto x1_pos = captured.find("filler-q0-0-en");
    CHECK(h1_pos < x1_pos);
    CHECK(x1_pos < h2_pos);
}
