#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "mhqa/filter.hpp"
#include "mhqa/mock.hpp"
#include "mhqa/translate.hpp"
#include "mhqa/util.hpp"

#include <filesystem>
#include <set>

using namespace mhqa;
using namespace mhqa::corpus;
using testutil::make_corpus;

namespace {

// Scripted translator: one contains-rule per source payload. The rule keys on
// the source text inside the translation prompt.
gate::MockSpec translator_for(const Corpus& c, const std::string& target_suffix) {
    gate::MockSpec spec;
    auto add = [&](const std::string& src, const std::string& out) {
        spec.generate.push_back({gate::MockSpec::GenRule::Match::contains, src, out});
    };
    for (const auto& inst : c.instances) {
        LanguageTag en = lang("en");
        add(inst.two_hop_question.at(en), "TWOHOP-" + inst.id + "-" + target_suffix + " traduit?");
        add(inst.subq1.at(en), "SQ1-" + inst.id + "-" + target_suffix + " pont?");
        // The bridge marker travels as the sentinel and must come back.
        add("SQ2-" + inst.id + "-en",
            "SQ2-" + inst.id + "-" + target_suffix + " et <<<0>>> alors?");
        add(inst.bridge_entity.at(en), "bridge-" + inst.id + "-" + target_suffix);
        add(inst.gold_answer.at(en), "gold-" + inst.id + "-" + target_suffix);
        add(inst.hop1_doc.at(en).title, "T1 " + inst.id + " " + target_suffix);
        add(inst.hop1_doc.at(en).body, "corps un " + inst.id + " " + target_suffix);
        add(inst.hop2_doc.at(en).title, "T2 " + inst.id + " " + target_suffix);
        add(inst.hop2_doc.at(en).body, "corps deux " + inst.id + " " + target_suffix);
    }
    spec.default_completion = "TRADUCTION";
    return spec;
}

}  // namespace

TEST_CASE("translate_corpus fills every missing target cell") {
    auto c = make_corpus({"en"}, 1);
    auto model = gate::make_mock(translator_for(c, "fr"));
    auto report = translate_corpus(c, lang("en"), {lang("fr")}, model);

    REQUIRE(report.corpus.instances.size() == 1);
    const auto& inst = report.corpus.instances[0];
    CHECK(report.corpus.languages.count(lang("fr")) == 1);
    CHECK(inst.two_hop_question.count(lang("fr")) == 1);
    CHECK(inst.subq1.at(lang("fr")) == "SQ1-q0-fr pont?");
    CHECK(inst.subq2_template.at(lang("fr")) == "SQ2-q0-fr et <BRIDGE> alors?");
    CHECK(inst.hop1_doc.at(lang("fr")).body == "corps un q0 fr");
    CHECK(inst.hop1_doc.at(lang("fr")).id == inst.hop1_doc.at(lang("en")).id);
    CHECK(report.corpus.provenance.translation_model == "mock");
    CHECK(report.excluded.empty());
}

TEST_CASE("translate_corpus never mutates source cells") {
    auto c = make_corpus({"en"}, 2);
    auto before = to_jsonl(c);
    auto model = gate::make_mock(translator_for(c, "fr"));
    auto report = translate_corpus(c, lang("en"), {lang("fr")}, model);

    for (std::size_t i = 0; i < c.instances.size(); ++i) {
        CHECK(report.corpus.instances[i].two_hop_question.at(lang("en")) ==
              c.instances[i].two_hop_question.at(lang("en")));
        CHECK(report.corpus.instances[i].hop1_doc.at(lang("en")).body ==
              c.instances[i].hop1_doc.at(lang("en")).body);
    }
    CHECK(to_jsonl(c) == before);  // input untouched
}

TEST_CASE("empty target set returns the corpus unchanged") {
    auto c = make_corpus({"en"}, 2);
    auto model = gate::make_mock(gate::MockSpec{});
    auto report = translate_corpus(c, lang("en"), {}, model);
    CHECK(to_jsonl(report.corpus) == to_jsonl(c));
    CHECK(report.translated_cells == 0);
}

TEST_CASE("a translation that loses the placeholder excludes the instance") {
    auto c = make_corpus({"en"}, 2);
    auto spec = translator_for(c, "fr");
    // q1's subq2 translation drops the sentinel.
    for (auto& rule : spec.generate) {
        if (rule.pattern == "SQ2-q1-en") rule.completion = "SQ2-q1-fr sans rien";
    }
    auto model = gate::make_mock(spec);
    auto report = translate_corpus(c, lang("en"), {lang("fr")}, model);

    CHECK(report.corpus.instances.size() == 1);
    CHECK(report.corpus.instances[0].id == "q0");
    REQUIRE(report.excluded.size() == 1);
    CHECK(report.excluded[0] == "q1");
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].instance_id == "q1");
    CHECK(report.issues[0].field == "subq2_template");
    CHECK(report.issues[0].detail.find("placeholder") != std::string::npos);
}

TEST_CASE("translate requires complete source-language cells") {
    auto c = make_corpus({"en"}, 2);
    c.instances[1].subq1.erase(lang("en"));
    auto model = gate::make_mock(gate::MockSpec{});
    CHECK_THROWS_WITH_AS(translate_corpus(c, lang("en"), {lang("fr")}, model),
                         doctest::Contains("q1"), ValidationError);
}

TEST_CASE("filter excludes instances answerable under any ablation") {
    auto c = make_corpus({"en"}, 3);
    gate::MockSpec spec;
    // q0 answers correctly even with no documents (contaminated).
    spec.generate.push_back(
        {gate::MockSpec::GenRule::Match::contains, "TWOHOP-q0-en", "gold-q0-en"});
    // q1 answers correctly only when the hop-1 document is present.
    spec.generate.push_back(
        {gate::MockSpec::GenRule::Match::contains, "hopone-q1-en", "gold-q1-en"});
    // q2 never answers correctly (default UNKNOWN).
    auto model = gate::make_mock(spec);

    auto iset = prompts::InstructionSet::builtin();
    scoring::CorrectnessPolicy policy;
    auto result = filter_contaminated(c, model, policy, iset);

    std::set<std::string> kept_ids, excluded_ids;
    for (const auto& i : result.kept.instances) kept_ids.insert(i.id);
    for (const auto& i : result.excluded.instances) excluded_ids.insert(i.id);
    CHECK(excluded_ids == std::set<std::string>{"q0", "q1"});
    CHECK(kept_ids == std::set<std::string>{"q2"});
    CHECK(result.kept.provenance.filter_model == "mock");

    // kept and excluded partition the input.
    CHECK(kept_ids.size() + excluded_ids.size() == c.instances.size());

    // Three ablation entries per instance, with per-ablation verdicts.
    CHECK(result.log.entries.size() == 9);
    std::size_t q1_correct = 0;
    for (const auto& e : result.log.entries) {
        if (e.instance_id == "q1" && e.correct) {
            ++q1_correct;
            CHECK(e.ablation == std::string(kAblationHop1Only));
        }
        if (e.instance_id == "q0") CHECK(e.correct);
        if (e.instance_id == "q2") CHECK_FALSE(e.correct);
    }
    CHECK(q1_correct == 1);
}

TEST_CASE("filter is deterministic and resumes from the response cache") {
    auto cache_dir = std::filesystem::temp_directory_path() / "mhqa_filter_cache";
    std::filesystem::remove_all(cache_dir);

    auto c = make_corpus({"en"}, 3);
    gate::MockSpec spec;
    spec.generate.push_back(
        {gate::MockSpec::GenRule::Match::contains, "TWOHOP-q0-en", "gold-q0-en"});

    gate::GatewayOptions options;
    options.cache_dir = cache_dir;
    auto endpoint1 = std::make_shared<gate::MockEndpoint>(spec);
    gate::ModelHandle model1(endpoint1, options);
    auto iset = prompts::InstructionSet::builtin();
    scoring::CorrectnessPolicy policy;

    auto first = filter_contaminated(c, model1, policy, iset);
    CHECK(endpoint1->generate_calls() == 9);

    // Fresh process, same cache: identical partition, zero endpoint calls.
    auto endpoint2 = std::make_shared<gate::MockEndpoint>(spec);
    gate::ModelHandle model2(endpoint2, options);
    auto second = filter_contaminated(c, model2, policy, iset);
    CHECK(endpoint2->generate_calls() == 0);
    CHECK(to_jsonl(second.kept) == to_jsonl(first.kept));
    CHECK(to_jsonl(second.excluded) == to_jsonl(first.excluded));
}

TEST_CASE("filter log round-trips through jsonl") {
    FilterLog log;
    log.entries.push_back({"q0", "none", "some answer", true});
    log.entries.push_back({"q1", "hop1_only", "", false});
    auto path = std::filesystem::temp_directory_path() / "mhqa_filter_log.jsonl";
    save_filter_log(log, path);
    auto loaded = load_filter_log(path);
    REQUIRE(loaded.entries.size() == 2);
    CHECK(loaded.entries[0].instance_id == "q0");
    CHECK(loaded.entries[0].correct);
    CHECK(loaded.entries[1].ablation == "hop1_only");
    CHECK_FALSE(loaded.entries[1].correct);
}
