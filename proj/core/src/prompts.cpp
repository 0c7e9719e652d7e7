#include "mhqa/prompts.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

namespace mhqa::prompts {

namespace {

const std::string& cell(const LangMap<std::string>& m, const LanguageTag& lang,
                        const std::string& instance_id, const std::string& field) {
    auto it = m.find(lang);
    if (it == m.end())
        throw ValidationError("instance '" + instance_id + "': missing language cell '" +
                              lang.code() + "' in field '" + field + "'");
    return it->second;
}

const corpus::Document& doc_cell(const LangMap<corpus::Document>& m, const LanguageTag& lang,
                                 const std::string& instance_id, const std::string& field) {
    auto it = m.find(lang);
    if (it == m.end())
        throw ValidationError("instance '" + instance_id + "': missing language cell '" +
                              lang.code() + "' in field '" + field + "'");
    return it->second;
}

std::string fill_slots(std::string_view tmpl, const std::string& question, const std::string& documents) {
    std::string out = util::replace_all(tmpl, "{question}", question);
    return util::replace_all(out, "{documents}", documents);
}

}  // namespace

std::string render_documents(std::span<const corpus::Document> docs) {
    std::string out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i) out += "\n\n";
        out += "Title: " + docs[i].title + "\n" + docs[i].body;
    }
    return out;
}

std::string build_standard(const corpus::QAInstance& instance, const harness::Condition& condition,
                           std::span<const corpus::Document> context, const InstructionSet& iset) {
    const auto& t = iset.for_language(condition.query_lang);
    const std::string& question =
        cell(instance.two_hop_question, condition.query_lang, instance.id, "two_hop_question");
    return fill_slots(t.standard, question, render_documents(context));
}

std::string build_cot(const corpus::QAInstance& instance, const harness::Condition& condition,
                      std::span<const corpus::Document> context, const InstructionSet& iset) {
    const auto& t = iset.for_language(condition.query_lang);
    const std::string& question =
        cell(instance.two_hop_question, condition.query_lang, instance.id, "two_hop_question");
    return fill_slots(t.cot, question, render_documents(context));
}

std::string build_single(const std::string& question, const LanguageTag& instruction_lang,
                         std::span<const corpus::Document> context, const InstructionSet& iset) {
    const auto& t = iset.for_language(instruction_lang);
    return fill_slots(t.subq, question, render_documents(context));
}

std::string extract_answer(std::string_view raw_output, std::string_view answer_cue) {
    if (!answer_cue.empty()) {
        std::size_t pos = util::ifind_last(raw_output, answer_cue);
        if (pos != std::string_view::npos)
            return util::trim(raw_output.substr(pos + answer_cue.size()));
    }
    // No cue: take the final non-empty line.
    std::string_view rest = raw_output;
    while (!rest.empty()) {
        std::size_t nl = rest.find_last_of('\n');
        std::string_view line = nl == std::string_view::npos ? rest : rest.substr(nl + 1);
        std::string trimmed = util::trim(line);
        if (!trimmed.empty()) return trimmed;
        if (nl == std::string_view::npos) break;
        rest = rest.substr(0, nl);
    }
    return "";
}

std::string to_string(SubQMode mode) { return mode == SubQMode::gold ? "gold" : "predicted"; }

SubQTranscript run_subq(const corpus::QAInstance& instance, const harness::Condition& condition,
                        const gate::ModelHandle& model, SubQMode mode, const InstructionSet& iset,
                        const SubQOptions& options) {
    const auto& q = condition.query_lang;
    const auto& t = iset.for_language(q);

    SubQTranscript ts;
    ts.mode = mode;

    const corpus::Document& hop1 =
        doc_cell(instance.hop1_doc, condition.hop1_lang, instance.id, "hop1_doc");
    const corpus::Document& hop2 =
        doc_cell(instance.hop2_doc, condition.hop2_lang, instance.id, "hop2_doc");

    std::vector<corpus::Document> stage1_docs{hop1};
    std::vector<corpus::Document> stage2_docs{hop2};
    if (options.context == SubQContext::both) {
        stage1_docs = {hop1, hop2};
        stage2_docs = {hop1, hop2};
    }

    // Stage 1: infer the bridge entity from SubQ1.
    const std::string& subq1_text = cell(instance.subq1, q, instance.id, "subq1");
    ts.stage1.prompt = build_single(subq1_text, q, stage1_docs, iset);
    try {
        ts.stage1.raw_output = model.generate(ts.stage1.prompt).text;
    } catch (const EndpointError& e) {
        ts.failure = std::string("stage1: ") + e.what();
        return ts;
    }
    ts.stage1.extracted = extract_answer(ts.stage1.raw_output, t.answer_cue);

    // Stage 2: substitute the bridge into the SubQ2 template.
    const std::string& gold_bridge = cell(instance.bridge_entity, q, instance.id, "bridge_entity");
    std::string bridge = mode == SubQMode::gold ? gold_bridge : ts.stage1.extracted;
    if (mode == SubQMode::predicted && bridge.empty()) ts.empty_bridge = true;
    const std::string& subq2_tmpl = cell(instance.subq2_template, q, instance.id, "subq2_template");
    std::string subq2_text = util::replace_all(subq2_tmpl, options.bridge_marker, bridge);
    ts.stage2.prompt = build_single(subq2_text, q, stage2_docs, iset);
    try {
        ts.stage2.raw_output = model.generate(ts.stage2.prompt).text;
    } catch (const EndpointError& e) {
        ts.failure = std::string("stage2: ") + e.what();
        return ts;
    }
    ts.stage2.extracted = extract_answer(ts.stage2.raw_output, t.answer_cue);

    // Stage 3: compose the final answer from both sub-questions and answers.
    const std::string& question = cell(instance.two_hop_question, q, instance.id, "two_hop_question");
    std::string answer1 = mode == SubQMode::gold ? gold_bridge : ts.stage1.extracted;
    std::string answer2 = mode == SubQMode::gold
                              ? cell(instance.gold_answer, q, instance.id, "gold_answer")
                              : ts.stage2.extracted;
    std::string prompt = util::replace_all(t.compose, "{question}", question);
    prompt = util::replace_all(prompt, "{subq1}", subq1_text);
    prompt = util::replace_all(prompt, "{answer1}", answer1);
    prompt = util::replace_all(prompt, "{subq2}", subq2_text);
    prompt = util::replace_all(prompt, "{answer2}", answer2);
    ts.stage3.prompt = std::move(prompt);
    try {
        ts.stage3.raw_output = model.generate(ts.stage3.prompt).text;
    } catch (const EndpointError& e) {
        ts.failure = std::string("stage3: ") + e.what();
        return ts;
    }
    ts.stage3.extracted = extract_answer(ts.stage3.raw_output, t.answer_cue);
    ts.final_answer = ts.stage3.extracted;
    ts.complete = true;
    return ts;
}

}  // namespace mhqa::prompts
