#pragma once

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace mhqa {

// IETF-style lowercase language code (en, fr, ru, ar, zh; extensible).
class LanguageTag {
public:
    LanguageTag() = default;
    explicit LanguageTag(std::string code) : code_(std::move(code)) {
        if (code_.empty()) throw ValidationError("language tag must be non-empty");
        if (!util::is_ascii_lower(code_))
            throw ValidationError("language tag must be lowercase ASCII: '" + code_ + "'");
    }

    const std::string& code() const { return code_; }
    bool empty() const { return code_.empty(); }

    auto operator<=>(const LanguageTag&) const = default;

private:
    std::string code_;
};

template <typename T>
using LangMap = std::map<LanguageTag, T>;

using LangSet = std::set<LanguageTag>;

inline LanguageTag lang(std::string_view code) { return LanguageTag(std::string(code)); }

// English display name used in translation prompts; unknown codes pass through.
std::string language_display_name(const LanguageTag& tag);

}  // namespace mhqa
