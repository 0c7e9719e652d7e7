#include "mhqa/scoring.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <map>

namespace mhqa::scoring {

namespace {

bool is_punct(UChar32 c) {
    switch (u_charType(c)) {
        case U_DASH_PUNCTUATION:
        case U_START_PUNCTUATION:
        case U_END_PUNCTUATION:
        case U_CONNECTOR_PUNCTUATION:
        case U_OTHER_PUNCTUATION:
        case U_INITIAL_PUNCTUATION:
        case U_FINAL_PUNCTUATION:
            return true;
        default:
            return false;
    }
}

std::string fold_nfkc(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFKC unavailable");
    icu::UnicodeString input = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString normalized = nfkc->normalize(input, status);
    if (U_FAILURE(status)) throw Error("ICU normalization failed");
    normalized.foldCase(U_FOLD_CASE_DEFAULT);
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

const std::vector<std::string> kEnglishArticles = {"a", "an", "the"};

}  // namespace

std::vector<std::string> normalize(std::string_view text, const LanguageTag& lang,
                                   const NormalizeOptions& options) {
    std::string folded = fold_nfkc(text);
    std::vector<char32_t> cps = util::utf8_decode(folded);

    const bool per_char = lang.code() == "zh";
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (char32_t cp : cps) {
        UChar32 c = static_cast<UChar32>(cp);
        if (is_punct(c)) continue;
        if (u_isUWhiteSpace(c)) {
            flush();
            continue;
        }
        if (per_char) {
            flush();
            tokens.push_back(util::utf8_encode(cp));
        } else {
            current += util::utf8_encode(cp);
        }
    }
    flush();

    if (options.strip_en_articles && lang.code() == "en") {
        std::erase_if(tokens, [](const std::string& t) {
            return std::find(kEnglishArticles.begin(), kEnglishArticles.end(), t) !=
                   kEnglishArticles.end();
        });
    }
    return tokens;
}

ScoreCard token_f1(std::string_view pred, std::string_view gold, const LanguageTag& lang,
                   const NormalizeOptions& options) {
    ScoreCard card;
    card.pred_tokens = normalize(pred, lang, options);
    card.gold_tokens = normalize(gold, lang, options);
    card.exact = card.pred_tokens == card.gold_tokens;

    if (card.pred_tokens.empty() && card.gold_tokens.empty()) {
        card.f1 = card.precision = card.recall = 1.0;
        return card;
    }
    if (card.pred_tokens.empty() || card.gold_tokens.empty()) {
        card.f1 = card.precision = card.recall = 0.0;
        return card;
    }

    std::map<std::string, std::size_t> gold_counts;
    for (const auto& t : card.gold_tokens) ++gold_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : card.pred_tokens) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    card.precision = static_cast<double>(overlap) / static_cast<double>(card.pred_tokens.size());
    card.recall = static_cast<double>(overlap) / static_cast<double>(card.gold_tokens.size());
    card.f1 = (overlap == 0) ? 0.0
                             : 2.0 * card.precision * card.recall / (card.precision + card.recall);
    return card;
}

void validate(const CorrectnessPolicy& policy) {
    if (policy.mode == CorrectnessMode::f1_threshold &&
        !(policy.threshold > 0.0 && policy.threshold <= 1.0)) {
        throw ConfigError("correctness threshold must be in (0, 1]");
    }
}

bool is_correct(const ScoreCard& card, const CorrectnessPolicy& policy) {
    validate(policy);
    if (policy.mode == CorrectnessMode::exact_match) return card.exact;
    return card.f1 >= policy.threshold;
}

bool is_correct(std::string_view pred, std::string_view gold, const LanguageTag& lang,
                const CorrectnessPolicy& policy, const NormalizeOptions& options) {
    return is_correct(token_f1(pred, gold, lang, options), policy);
}

std::string to_string(CorrectnessMode mode) {
    return mode == CorrectnessMode::exact_match ? "exact_match" : "f1_threshold";
}

CorrectnessMode correctness_mode_from_string(std::string_view s) {
    if (s == "exact_match") return CorrectnessMode::exact_match;
    if (s == "f1_threshold") return CorrectnessMode::f1_threshold;
    throw ConfigError("unknown correctness mode: '" + std::string(s) + "'");
}

}  // namespace mhqa::scoring
