#pragma once

#include "mhqa/lang.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mhqa::corpus {

struct Document {
    std::string id;
    std::string title;
    std::string body;
    LanguageTag language;
};

// One decomposed two-hop example with per-language variants. SubQ1 infers the
// bridge entity from the Hop-1 document; SubQ2 carries a bridge placeholder
// and resolves the final answer against the Hop-2 document.
struct QAInstance {
    std::string id;
    LangMap<std::string> two_hop_question;
    LangMap<std::string> subq1;
    LangMap<std::string> subq2_template;  // contains the bridge marker exactly once
    LangMap<std::string> bridge_entity;
    LangMap<std::string> gold_answer;
    LangMap<Document> hop1_doc;
    LangMap<Document> hop2_doc;
    std::vector<LangMap<Document>> distractor_pool;  // topically related non-gold paragraphs
};

struct Provenance {
    std::string source;
    std::string translation_model;
    std::string filter_model;
    std::string created;
};

inline constexpr const char* kDefaultBridgeMarker = "<BRIDGE>";

struct Corpus {
    std::vector<QAInstance> instances;  // iteration order == on-disk order
    LangSet languages;
    LanguageTag source_language;
    std::string bridge_marker = kDefaultBridgeMarker;
    Provenance provenance;
    std::string file_digest;  // sha256 of the file this corpus was loaded from, if any

    const QAInstance* find(const std::string& instance_id) const;
};

// Throws ValidationError naming instance id, field, and language on the first
// structural violation.
void validate(const Corpus& corpus);

std::string to_jsonl(const Corpus& corpus);
Corpus from_jsonl(const std::string& content);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// file_digest when present, else the digest of the serialized form.
std::string digest(const Corpus& corpus);

}  // namespace mhqa::corpus
