#include "mhqa/templates.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

namespace mhqa::prompts {

using nlohmann::json;

namespace {

LangTemplates make_en() {
    LangTemplates t;
    t.standard =
        "Answer the following question using the provided documents. Give only the answer.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nAnswer:";
    t.subq =
        "Answer the following question using the provided document. Give only the answer.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nAnswer:";
    t.cot =
        "Answer the following question using the provided documents.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nThink step-by-step.\n\nAnswer:";
    t.compose =
        "Answer the final question using the sub-questions and their answers.\n\n"
        "{question}\n\nSub-question 1: {subq1}\nAnswer 1: {answer1}\n\n"
        "Sub-question 2: {subq2}\nAnswer 2: {answer2}\n\nAnswer:";
    t.answer_cue = "Answer:";
    t.cot_directive = "Think step-by-step.";
    return t;
}

LangTemplates make_fr() {
    LangTemplates t;
    t.standard =
        "Répondez à la question suivante en utilisant les documents fournis. Donnez uniquement la "
        "réponse.\n\n{question}\n\n{documents}\n\n{question}\n\nRéponse :";
    t.subq =
        "Répondez à la question suivante en utilisant le document fourni. Donnez uniquement la "
        "réponse.\n\n{question}\n\n{documents}\n\n{question}\n\nRéponse :";
    t.cot =
        "Répondez à la question suivante en utilisant les documents fournis.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nRéfléchissez étape par étape.\n\nRéponse :";
    t.compose =
        "Répondez à la question finale en utilisant les sous-questions et leurs réponses.\n\n"
        "{question}\n\nSous-question 1 : {subq1}\nRéponse 1 : {answer1}\n\n"
        "Sous-question 2 : {subq2}\nRéponse 2 : {answer2}\n\nRéponse :";
    t.answer_cue = "Réponse :";
    t.cot_directive = "Réfléchissez étape par étape.";
    return t;
}

LangTemplates make_ru() {
    LangTemplates t;
    t.standard =
        "Ответьте на следующий вопрос, используя предоставленные документы. Дайте только "
        "ответ.\n\n{question}\n\n{documents}\n\n{question}\n\nОтвет:";
    t.subq =
        "Ответьте на следующий вопрос, используя предоставленный документ. Дайте только "
        "ответ.\n\n{question}\n\n{documents}\n\n{question}\n\nОтвет:";
    t.cot =
        "Ответьте на следующий вопрос, используя предоставленные документы.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nРассуждайте шаг за шагом.\n\nОтвет:";
    t.compose =
        "Ответьте на итоговый вопрос, используя подвопросы и ответы на них.\n\n"
        "{question}\n\nПодвопрос 1: {subq1}\nОтвет 1: {answer1}\n\n"
        "Подвопрос 2: {subq2}\nОтвет 2: {answer2}\n\nОтвет:";
    t.answer_cue = "Ответ:";
    t.cot_directive = "Рассуждайте шаг за шагом.";
    return t;
}

LangTemplates make_ar() {
    LangTemplates t;
    t.standard =
        "أجب عن السؤال التالي باستخدام المستندات المقدمة. اذكر الإجابة فقط.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nالإجابة:";
    t.subq =
        "أجب عن السؤال التالي باستخدام المستند المقدم. اذكر الإجابة فقط.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nالإجابة:";
    t.cot =
        "أجب عن السؤال التالي باستخدام المستندات المقدمة.\n\n"
        "{question}\n\n{documents}\n\n{question}\n\nفكر خطوة بخطوة.\n\nالإجابة:";
    t.compose =
        "أجب عن السؤال النهائي باستخدام الأسئلة الفرعية وإجاباتها.\n\n"
        "{question}\n\nالسؤال الفرعي 1: {subq1}\nالإجابة 1: {answer1}\n\n"
        "السؤال الفرعي 2: {subq2}\nالإجابة 2: {answer2}\n\nالإجابة:";
    t.answer_cue = "الإجابة:";
    t.cot_directive = "فكر خطوة بخطوة.";
    return t;
}

LangTemplates make_zh() {
    LangTemplates t;
    t.standard =
        "请根据提供的文档回答下面的问题。只需给出答案。\n\n"
        "{question}\n\n{documents}\n\n{question}\n\n答案：";
    t.subq =
        "请根据提供的文档回答下面的问题。只需给出答案。\n\n"
        "{question}\n\n{documents}\n\n{question}\n\n答案：";
    t.cot =
        "请根据提供的文档回答下面的问题。\n\n"
        "{question}\n\n{documents}\n\n{question}\n\n请逐步思考。\n\n答案：";
    t.compose =
        "请利用子问题及其答案回答最终问题。\n\n"
        "{question}\n\n子问题1：{subq1}\n答案1：{answer1}\n\n"
        "子问题2：{subq2}\n答案2：{answer2}\n\n答案：";
    t.answer_cue = "答案：";
    t.cot_directive = "请逐步思考。";
    return t;
}

void require_count(const std::string& tmpl, const std::string& slot, std::size_t expected,
                   const LanguageTag& lang, const std::string& name) {
    std::size_t n = util::count_occurrences(tmpl, slot);
    if (n != expected)
        throw ValidationError("template '" + name + "' for language '" + lang.code() + "' has " +
                              std::to_string(n) + " occurrences of " + slot + ", expected " +
                              std::to_string(expected));
}

}  // namespace

void validate_templates(const LangTemplates& t, const LanguageTag& lang) {
    // The question goes both before and after the document block.
    require_count(t.standard, "{question}", 2, lang, "standard");
    require_count(t.standard, "{documents}", 1, lang, "standard");
    require_count(t.subq, "{question}", 2, lang, "subq");
    require_count(t.subq, "{documents}", 1, lang, "subq");
    require_count(t.cot, "{question}", 2, lang, "cot");
    require_count(t.cot, "{documents}", 1, lang, "cot");
    require_count(t.compose, "{question}", 1, lang, "compose");
    require_count(t.compose, "{subq1}", 1, lang, "compose");
    require_count(t.compose, "{answer1}", 1, lang, "compose");
    require_count(t.compose, "{subq2}", 1, lang, "compose");
    require_count(t.compose, "{answer2}", 1, lang, "compose");
    if (t.answer_cue.empty())
        throw ValidationError("answer_cue for language '" + lang.code() + "' is empty");
    if (t.cot_directive.empty())
        throw ValidationError("cot_directive for language '" + lang.code() + "' is empty");
    if (util::count_occurrences(t.cot, t.cot_directive) != 1)
        throw ValidationError("cot template for language '" + lang.code() +
                              "' must contain the cot_directive exactly once");
}

InstructionSet InstructionSet::builtin() {
    InstructionSet s;
    s.set(lang("en"), make_en());
    s.set(lang("fr"), make_fr());
    s.set(lang("ru"), make_ru());
    s.set(lang("ar"), make_ar());
    s.set(lang("zh"), make_zh());
    return s;
}

InstructionSet InstructionSet::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("template directory does not exist: " + dir.string());
    InstructionSet s = builtin();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        LanguageTag tag(entry.path().stem().string());
        json j;
        try {
            j = json::parse(util::read_file(entry.path()));
        } catch (const json::exception& ex) {
            throw ConfigError("template file " + entry.path().string() + ": " + ex.what());
        }
        LangTemplates t;
        t.standard = j.value("standard", "");
        t.subq = j.value("subq", "");
        t.cot = j.value("cot", "");
        t.compose = j.value("compose", "");
        t.answer_cue = j.value("answer_cue", "");
        t.cot_directive = j.value("cot_directive", "");
        s.set(tag, std::move(t));
    }
    return s;
}

void InstructionSet::save_dir(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [tag, t] : templates_) {
        json j;
        j["standard"] = t.standard;
        j["subq"] = t.subq;
        j["cot"] = t.cot;
        j["compose"] = t.compose;
        j["answer_cue"] = t.answer_cue;
        j["cot_directive"] = t.cot_directive;
        util::write_file(dir / (tag.code() + ".json"), j.dump(2) + "\n");
    }
}

const LangTemplates& InstructionSet::for_language(const LanguageTag& lang) const {
    auto it = templates_.find(lang);
    if (it == templates_.end())
        throw ValidationError("no instruction templates for language '" + lang.code() + "'");
    return it->second;
}

void InstructionSet::set(const LanguageTag& lang, LangTemplates templates) {
    validate_templates(templates, lang);
    templates_[lang] = std::move(templates);
}

void InstructionSet::validate_for(const LangSet& languages) const {
    for (const auto& tag : languages) {
        if (!has(tag))
            throw ValidationError("no instruction templates for language '" + tag.code() + "'");
    }
}

}  // namespace mhqa::prompts
