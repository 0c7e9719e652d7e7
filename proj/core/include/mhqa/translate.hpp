#pragma once

#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"

#include <string>
#include <vector>

namespace mhqa::corpus {

// Stand-in substituted for the bridge marker before a text is sent to the
// translator and restored afterwards; a translation that loses it gets the
// instance excluded.
inline constexpr const char* kBridgeSentinel = "<<<0>>>";

struct TranslationIssue {
    std::string instance_id;
    std::string field;
    std::string language;
    std::string detail;
};

struct TranslationReport {
    Corpus corpus;                      // flagged instances excluded
    std::vector<std::string> excluded;  // instance ids dropped from the output
    std::vector<TranslationIssue> issues;
    std::size_t translated_cells = 0;
};

// Fills missing cells for every target language via a fixed single-turn
// translation prompt. Source-language cells are never touched.
TranslationReport translate_corpus(const Corpus& corpus, const LanguageTag& source,
                                   const LangSet& targets, const gate::ModelHandle& model,
                                   std::size_t parallelism = 1);

// The exact prompt sent per text cell; exposed for tests and call planning.
std::string translation_prompt(const LanguageTag& target, const std::string& payload);

}  // namespace mhqa::corpus
