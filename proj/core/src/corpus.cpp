#include "mhqa/corpus.hpp"

#include "mhqa/error.hpp"
#include "mhqa/sha256.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <sstream>

namespace mhqa::corpus {

using nlohmann::json;

namespace {

json lang_map_to_json(const LangMap<std::string>& m) {
    json out = json::object();
    for (const auto& [tag, value] : m) out[tag.code()] = value;
    return out;
}

json doc_map_to_json(const LangMap<Document>& m) {
    json out = json::object();
    for (const auto& [tag, doc] : m) {
        out[tag.code()] = json{{"id", doc.id}, {"title", doc.title}, {"body", doc.body}};
    }
    return out;
}

LangMap<std::string> lang_map_from_json(const json& j, const std::string& instance_id,
                                        const std::string& field) {
    if (!j.is_object())
        throw ValidationError("instance '" + instance_id + "': field '" + field +
                              "' must be a per-language object");
    LangMap<std::string> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string())
            throw ValidationError("instance '" + instance_id + "': field '" + field + "' cell '" +
                                  key + "' must be a string");
        out.emplace(LanguageTag(key), value.get<std::string>());
    }
    return out;
}

LangMap<Document> doc_map_from_json(const json& j, const std::string& instance_id,
                                    const std::string& field) {
    if (!j.is_object())
        throw ValidationError("instance '" + instance_id + "': field '" + field +
                              "' must be a per-language object");
    LangMap<Document> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_object())
            throw ValidationError("instance '" + instance_id + "': field '" + field + "' cell '" +
                                  key + "' must be a document object");
        Document doc;
        doc.language = LanguageTag(key);
        doc.id = value.value("id", "");
        doc.title = value.value("title", "");
        doc.body = value.value("body", "");
        if (doc.id.empty())
            throw ValidationError("instance '" + instance_id + "': field '" + field + "' cell '" +
                                  key + "' is missing a document id");
        out.emplace(doc.language, std::move(doc));
    }
    return out;
}

void check_coverage(const LangSet& languages, const std::set<std::string>& present,
                    const std::string& instance_id, const std::string& field) {
    for (const auto& tag : languages) {
        if (!present.count(tag.code()))
            throw ValidationError("instance '" + instance_id + "': field '" + field +
                                  "' is missing language cell '" + tag.code() + "'");
    }
    for (const auto& code : present) {
        if (!languages.count(LanguageTag(code)))
            throw ValidationError("instance '" + instance_id + "': field '" + field +
                                  "' has a cell for unregistered language '" + code + "'");
    }
}

template <typename T>
std::set<std::string> keys_of(const LangMap<T>& m) {
    std::set<std::string> out;
    for (const auto& [tag, _] : m) out.insert(tag.code());
    return out;
}

void check_document(const Document& doc, const std::string& instance_id, const std::string& field,
                    const std::string& lang_code,
                    std::map<std::pair<std::string, std::string>, std::string>& seen) {
    if (util::trim(doc.body).empty())
        throw ValidationError("instance '" + instance_id + "': field '" + field + "' language '" +
                              lang_code + "': document body is empty");
    // (id, language) must identify one document; identical duplicates are fine.
    std::string fingerprint = sha256_hex(doc.title + "\x1f" + doc.body);
    auto key = std::make_pair(doc.id, lang_code);
    auto [it, inserted] = seen.emplace(key, fingerprint);
    if (!inserted && it->second != fingerprint)
        throw ValidationError("instance '" + instance_id + "': document id '" + doc.id +
                              "' language '" + lang_code +
                              "' conflicts with an earlier document of the same id");
}

}  // namespace

const QAInstance* Corpus::find(const std::string& instance_id) const {
    for (const auto& inst : instances) {
        if (inst.id == instance_id) return &inst;
    }
    return nullptr;
}

void validate(const Corpus& corpus) {
    if (corpus.languages.empty()) throw ValidationError("corpus registers no languages");
    if (corpus.bridge_marker.empty()) throw ValidationError("corpus bridge marker is empty");
    if (!corpus.source_language.empty() && !corpus.languages.count(corpus.source_language))
        throw ValidationError("source language '" + corpus.source_language.code() +
                              "' is not in the registered language set");

    std::set<std::string> ids;
    std::map<std::pair<std::string, std::string>, std::string> seen_docs;
    for (const auto& inst : corpus.instances) {
        if (inst.id.empty()) throw ValidationError("instance with empty id");
        if (!ids.insert(inst.id).second)
            throw ValidationError("duplicate instance id '" + inst.id + "'");

        check_coverage(corpus.languages, keys_of(inst.two_hop_question), inst.id, "two_hop_question");
        check_coverage(corpus.languages, keys_of(inst.subq1), inst.id, "subq1");
        check_coverage(corpus.languages, keys_of(inst.subq2_template), inst.id, "subq2_template");
        check_coverage(corpus.languages, keys_of(inst.bridge_entity), inst.id, "bridge_entity");
        check_coverage(corpus.languages, keys_of(inst.gold_answer), inst.id, "gold_answer");
        check_coverage(corpus.languages, keys_of(inst.hop1_doc), inst.id, "hop1_doc");
        check_coverage(corpus.languages, keys_of(inst.hop2_doc), inst.id, "hop2_doc");

        for (const auto& [tag, text] : inst.subq2_template) {
            std::size_t n = util::count_occurrences(text, corpus.bridge_marker);
            if (n != 1)
                throw ValidationError("instance '" + inst.id + "': field 'subq2_template' language '" +
                                      tag.code() + "' contains " + std::to_string(n) +
                                      " bridge placeholders, expected exactly 1");
        }

        for (const auto& [tag, doc] : inst.hop1_doc)
            check_document(doc, inst.id, "hop1_doc", tag.code(), seen_docs);
        for (const auto& [tag, doc] : inst.hop2_doc)
            check_document(doc, inst.id, "hop2_doc", tag.code(), seen_docs);
        for (const auto& tag : corpus.languages) {
            if (inst.hop1_doc.at(tag).id == inst.hop2_doc.at(tag).id)
                throw ValidationError("instance '" + inst.id + "': hop1_doc and hop2_doc share id '" +
                                      inst.hop1_doc.at(tag).id + "' in language '" + tag.code() + "'");
        }

        for (std::size_t i = 0; i < inst.distractor_pool.size(); ++i) {
            const auto& entry = inst.distractor_pool[i];
            std::string field = "distractor_pool[" + std::to_string(i) + "]";
            check_coverage(corpus.languages, keys_of(entry), inst.id, field);
            for (const auto& [tag, doc] : entry)
                check_document(doc, inst.id, field, tag.code(), seen_docs);
        }
    }
}

std::string to_jsonl(const Corpus& corpus) {
    std::ostringstream out;
    json header;
    header["type"] = "header";
    header["format"] = "mhqa.corpus.v1";
    json langs = json::array();
    for (const auto& tag : corpus.languages) langs.push_back(tag.code());
    header["languages"] = langs;
    header["source_language"] = corpus.source_language.empty() ? "" : corpus.source_language.code();
    header["bridge_marker"] = corpus.bridge_marker;
    header["provenance"] = {
        {"source", corpus.provenance.source},
        {"translation_model", corpus.provenance.translation_model},
        {"filter_model", corpus.provenance.filter_model},
        {"created", corpus.provenance.created},
    };
    out << header.dump() << '\n';

    for (const auto& inst : corpus.instances) {
        json rec;
        rec["type"] = "instance";
        rec["id"] = inst.id;
        rec["two_hop_question"] = lang_map_to_json(inst.two_hop_question);
        rec["subq1"] = lang_map_to_json(inst.subq1);
        rec["subq2_template"] = lang_map_to_json(inst.subq2_template);
        rec["bridge_entity"] = lang_map_to_json(inst.bridge_entity);
        rec["gold_answer"] = lang_map_to_json(inst.gold_answer);
        rec["hop1_doc"] = doc_map_to_json(inst.hop1_doc);
        rec["hop2_doc"] = doc_map_to_json(inst.hop2_doc);
        json pool = json::array();
        for (const auto& entry : inst.distractor_pool) pool.push_back(doc_map_to_json(entry));
        rec["distractor_pool"] = pool;
        out << rec.dump() << '\n';
    }
    return out.str();
}

Corpus from_jsonl(const std::string& content) {
    Corpus corpus;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& ex) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": malformed record: " + ex.what());
        }
        std::string type = rec.value("type", "");
        if (!have_header) {
            if (type != "header")
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": expected header record first");
            if (rec.value("format", "") != "mhqa.corpus.v1")
                throw ValidationError("unsupported corpus format '" + rec.value("format", "") + "'");
            for (const auto& code : rec.value("languages", std::vector<std::string>{}))
                corpus.languages.insert(LanguageTag(code));
            std::string src = rec.value("source_language", "");
            if (!src.empty()) corpus.source_language = LanguageTag(src);
            corpus.bridge_marker = rec.value("bridge_marker", std::string(kDefaultBridgeMarker));
            if (rec.contains("provenance")) {
                const auto& p = rec["provenance"];
                corpus.provenance.source = p.value("source", "");
                corpus.provenance.translation_model = p.value("translation_model", "");
                corpus.provenance.filter_model = p.value("filter_model", "");
                corpus.provenance.created = p.value("created", "");
            }
            have_header = true;
            continue;
        }
        if (type != "instance")
            throw ValidationError("line " + std::to_string(line_no) + ": unknown record type '" +
                                  type + "'");
        QAInstance inst;
        inst.id = rec.value("id", "");
        if (inst.id.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": instance without id");
        inst.two_hop_question = lang_map_from_json(rec.value("two_hop_question", json::object()),
                                                   inst.id, "two_hop_question");
        inst.subq1 = lang_map_from_json(rec.value("subq1", json::object()), inst.id, "subq1");
        inst.subq2_template =
            lang_map_from_json(rec.value("subq2_template", json::object()), inst.id, "subq2_template");
        inst.bridge_entity =
            lang_map_from_json(rec.value("bridge_entity", json::object()), inst.id, "bridge_entity");
        inst.gold_answer =
            lang_map_from_json(rec.value("gold_answer", json::object()), inst.id, "gold_answer");
        inst.hop1_doc = doc_map_from_json(rec.value("hop1_doc", json::object()), inst.id, "hop1_doc");
        inst.hop2_doc = doc_map_from_json(rec.value("hop2_doc", json::object()), inst.id, "hop2_doc");
        if (rec.contains("distractor_pool")) {
            const auto& pool = rec["distractor_pool"];
            if (!pool.is_array())
                throw ValidationError("instance '" + inst.id + "': distractor_pool must be an array");
            for (std::size_t i = 0; i < pool.size(); ++i) {
                inst.distractor_pool.push_back(doc_map_from_json(
                    pool[i], inst.id, "distractor_pool[" + std::to_string(i) + "]"));
            }
        }
        corpus.instances.push_back(std::move(inst));
    }
    if (!have_header) throw ValidationError("corpus file has no header record");
    validate(corpus);
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ValidationError("corpus file does not exist: " + path.string());
    std::string content = util::read_file(path);
    Corpus corpus = from_jsonl(content);
    corpus.file_digest = sha256_hex(content);
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    validate(corpus);
    util::write_file_atomic(path, to_jsonl(corpus));
}

std::string digest(const Corpus& corpus) {
    if (!corpus.file_digest.empty()) return corpus.file_digest;
    return sha256_hex(to_jsonl(corpus));
}

}  // namespace mhqa::corpus
