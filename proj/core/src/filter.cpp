#include "mhqa/filter.hpp"

#include "mhqa/condition.hpp"
#include "mhqa/error.hpp"
#include "mhqa/prompts.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

#include <array>
#include <sstream>

namespace mhqa::corpus {

using nlohmann::json;

FilterResult filter_contaminated(const Corpus& corpus, const gate::ModelHandle& model,
                                 const scoring::CorrectnessPolicy& policy,
                                 const prompts::InstructionSet& iset, std::size_t parallelism,
                                 const scoring::NormalizeOptions& normalize) {
    if (corpus.source_language.empty())
        throw ValidationError("corpus has no source language; the filter runs in it");
    const LanguageTag& src = corpus.source_language;
    scoring::validate(policy);
    iset.validate_for({src});
    const auto& cue = iset.for_language(src).answer_cue;

    struct Probe {
        const char* ablation;
        bool use_hop1;
        bool use_hop2;
    };
    static constexpr Probe kProbes[] = {
        {kAblationHop1Only, true, false},
        {kAblationHop2Only, false, true},
        {kAblationNone, false, false},
    };

    std::vector<std::array<FilterEntry, 3>> entries(corpus.instances.size());
    std::vector<char> excluded_flags(corpus.instances.size(), 0);

    // Ablated contexts under the standard two-hop layout (question before and
    // after whatever documents remain).
    harness::Condition mono{src, src, src, harness::Strategy::standard, std::nullopt};
    util::parallel_for(corpus.instances.size(), parallelism, [&](std::size_t i) {
        const QAInstance& inst = corpus.instances[i];
        const std::string& gold = inst.gold_answer.at(src);
        bool any_correct = false;
        for (std::size_t p = 0; p < 3; ++p) {
            std::vector<Document> docs;
            if (kProbes[p].use_hop1) docs.push_back(inst.hop1_doc.at(src));
            if (kProbes[p].use_hop2) docs.push_back(inst.hop2_doc.at(src));
            std::string prompt = prompts::build_standard(inst, mono, docs, iset);
            std::string answer = prompts::extract_answer(model.generate(prompt).text, cue);
            bool correct = scoring::is_correct(answer, gold, src, policy, normalize);
            any_correct = any_correct || correct;
            entries[i][p] = {inst.id, kProbes[p].ablation, answer, correct};
        }
        excluded_flags[i] = any_correct ? 1 : 0;
    });

    FilterResult result;
    result.kept = corpus;
    result.kept.instances.clear();
    result.kept.file_digest.clear();
    result.excluded = result.kept;
    result.kept.provenance.filter_model = model.model_id();
    result.excluded.provenance.filter_model = model.model_id();

    for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
        for (auto& e : entries[i]) result.log.entries.push_back(std::move(e));
        if (excluded_flags[i]) {
            result.excluded.instances.push_back(corpus.instances[i]);
        } else {
            result.kept.instances.push_back(corpus.instances[i]);
        }
    }
    return result;
}

void save_filter_log(const FilterLog& log, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& e : log.entries) {
        json j;
        j["instance_id"] = e.instance_id;
        j["ablation"] = e.ablation;
        j["answer"] = e.answer;
        j["verdict"] = e.correct;
        out << j.dump() << '\n';
    }
    util::write_file_atomic(path, out.str());
}

FilterLog load_filter_log(const std::filesystem::path& path) {
    FilterLog log;
    for (const auto& line : util::read_lines(path)) {
        if (util::trim(line).empty()) continue;
        json j = json::parse(line);
        log.entries.push_back({j.value("instance_id", ""), j.value("ablation", ""),
                               j.value("answer", ""), j.value("verdict", false)});
    }
    return log;
}

}  // namespace mhqa::corpus
