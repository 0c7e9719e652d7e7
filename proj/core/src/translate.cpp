#include "mhqa/translate.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <map>

namespace mhqa {

std::string language_display_name(const LanguageTag& tag) {
    static const std::map<std::string, std::string> names = {
        {"en", "English"}, {"fr", "French"},  {"ru", "Russian"},
        {"ar", "Arabic"},  {"zh", "Chinese"}, {"de", "German"},
        {"es", "Spanish"}, {"ja", "Japanese"}, {"ko", "Korean"},
    };
    auto it = names.find(tag.code());
    return it == names.end() ? tag.code() : it->second;
}

}  // namespace mhqa

namespace mhqa::corpus {

std::string translation_prompt(const LanguageTag& target, const std::string& payload) {
    return "Translate the following text into " + language_display_name(target) +
           ". Output only the translation.\n\n" + payload;
}

namespace {

struct Translator {
    const gate::ModelHandle& model;
    std::vector<TranslationIssue>& issues;
    std::size_t& translated_cells;

    std::string translate_text(const std::string& text, const LanguageTag& target) {
        std::string out = model.generate(translation_prompt(target, text)).text;
        ++translated_cells;
        return util::trim(out);
    }

    // Returns false when the sentinel was lost and the instance must be dropped.
    bool fill_text_map(LangMap<std::string>& m, const LanguageTag& source, const LanguageTag& target,
                       const std::string& instance_id, const std::string& field,
                       const std::string& marker, bool protect_marker) {
        if (m.count(target)) return true;  // already present, keep as-is
        const std::string& src = m.at(source);
        if (!protect_marker) {
            m[target] = translate_text(src, target);
            return true;
        }
        std::string shielded = util::replace_all(src, marker, kBridgeSentinel);
        std::string out = translate_text(shielded, target);
        if (out.find(kBridgeSentinel) == std::string::npos) {
            issues.push_back({instance_id, field, target.code(),
                              "bridge placeholder lost in translation"});
            return false;
        }
        m[target] = util::replace_all(out, kBridgeSentinel, marker);
        return true;
    }

    void fill_doc_map(LangMap<Document>& m, const LanguageTag& source, const LanguageTag& target) {
        if (m.count(target)) return;
        const Document& src = m.at(source);
        Document out;
        out.id = src.id;
        out.language = target;
        out.title = src.title.empty() ? "" : translate_text(src.title, target);
        out.body = translate_text(src.body, target);
        m[target] = std::move(out);
    }
};

}  // namespace

TranslationReport translate_corpus(const Corpus& corpus, const LanguageTag& source,
                                   const LangSet& targets, const gate::ModelHandle& model,
                                   std::size_t parallelism) {
    if (!corpus.languages.count(source))
        throw ValidationError("source language '" + source.code() +
                              "' is not registered in the corpus");
    for (const auto& inst : corpus.instances) {
        bool complete = inst.two_hop_question.count(source) && inst.subq1.count(source) &&
                        inst.subq2_template.count(source) && inst.bridge_entity.count(source) &&
                        inst.gold_answer.count(source) && inst.hop1_doc.count(source) &&
                        inst.hop2_doc.count(source);
        for (const auto& entry : inst.distractor_pool) complete = complete && entry.count(source);
        if (!complete)
            throw ValidationError("instance '" + inst.id + "' lacks complete source-language cells");
    }

    TranslationReport report;
    report.corpus = corpus;
    if (targets.empty()) return report;

    for (const auto& t : targets) report.corpus.languages.insert(t);

    // Instances translate independently; results aggregate in instance order.
    std::vector<QAInstance> translated(report.corpus.instances.size());
    std::vector<char> keep(report.corpus.instances.size(), 1);
    std::vector<std::vector<TranslationIssue>> issue_lists(report.corpus.instances.size());
    std::vector<std::size_t> cell_counts(report.corpus.instances.size(), 0);

    util::parallel_for(report.corpus.instances.size(), parallelism, [&](std::size_t i) {
        QAInstance inst = report.corpus.instances[i];
        Translator tr{model, issue_lists[i], cell_counts[i]};
        bool ok = true;
        for (const auto& target : targets) {
            if (target == source) continue;
            ok = ok && tr.fill_text_map(inst.two_hop_question, source, target, inst.id,
                                        "two_hop_question", corpus.bridge_marker, false);
            ok = ok && tr.fill_text_map(inst.subq1, source, target, inst.id, "subq1",
                                        corpus.bridge_marker, false);
            ok = ok && tr.fill_text_map(inst.subq2_template, source, target, inst.id,
                                        "subq2_template", corpus.bridge_marker, true);
            ok = ok && tr.fill_text_map(inst.bridge_entity, source, target, inst.id, "bridge_entity",
                                        corpus.bridge_marker, false);
            ok = ok && tr.fill_text_map(inst.gold_answer, source, target, inst.id, "gold_answer",
                                        corpus.bridge_marker, false);
            if (!ok) break;
            tr.fill_doc_map(inst.hop1_doc, source, target);
            tr.fill_doc_map(inst.hop2_doc, source, target);
            for (auto& entry : inst.distractor_pool) tr.fill_doc_map(entry, source, target);
        }
        keep[i] = ok ? 1 : 0;
        translated[i] = std::move(inst);
    });

    std::vector<QAInstance> out;
    out.reserve(translated.size());
    for (std::size_t i = 0; i < translated.size(); ++i) {
        for (auto& issue : issue_lists[i]) report.issues.push_back(std::move(issue));
        report.translated_cells += cell_counts[i];
        if (keep[i]) {
            out.push_back(std::move(translated[i]));
        } else {
            report.excluded.push_back(translated[i].id);
        }
    }
    report.corpus.instances = std::move(out);
    report.corpus.provenance.translation_model = model.model_id();
    report.corpus.file_digest.clear();
    validate(report.corpus);
    return report;
}

}  // namespace mhqa::corpus
