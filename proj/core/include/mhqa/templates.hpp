#pragma once

#include "mhqa/lang.hpp"

#include <filesystem>
#include <string>

namespace mhqa::prompts {

// Per-language prompt templates. Slot syntax is {slot_name}:
//   standard/cot/subq : {question} (exactly twice, before and after the
//                       document block) and {documents}
//   compose           : {question}, {subq1}, {answer1}, {subq2}, {answer2}
// answer_cue is both appended by the templates and used for extraction;
// cot_directive must occur exactly once inside the cot template.
struct LangTemplates {
    std::string standard;
    std::string subq;
    std::string cot;
    std::string compose;
    std::string answer_cue;
    std::string cot_directive;
};

class InstructionSet {
public:
    // Built-in templates for en, fr, ru, ar, zh.
    static InstructionSet builtin();

    // One JSON file per language: <dir>/<lang>.json with the LangTemplates
    // fields as keys. Files override or extend the built-ins.
    static InstructionSet load_dir(const std::filesystem::path& dir);

    void save_dir(const std::filesystem::path& dir) const;

    bool has(const LanguageTag& lang) const { return templates_.count(lang) > 0; }
    const LangTemplates& for_language(const LanguageTag& lang) const;
    void set(const LanguageTag& lang, LangTemplates templates);

    // Every language in the set has a template and each template is
    // structurally sound (slot counts, directive containment).
    void validate_for(const LangSet& languages) const;

private:
    LangMap<LangTemplates> templates_;
};

void validate_templates(const LangTemplates& t, const LanguageTag& lang);

}  // namespace mhqa::prompts
