#pragma once

#include "mhqa/lang.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mhqa::scoring {

struct NormalizeOptions {
    // Article stripping is English-only by default; fused articles in other
    // languages make token-level stripping unsafe.
    bool strip_en_articles = true;
};

// NFKC, case-fold, drop Unicode punctuation, then tokenize: single characters
// for zh, whitespace split otherwise. English drops {a, an, the}.
std::vector<std::string> normalize(std::string_view text, const LanguageTag& lang,
                                   const NormalizeOptions& options = {});

struct ScoreCard {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    bool exact = false;
    std::vector<std::string> pred_tokens;
    std::vector<std::string> gold_tokens;
};

// Token-multiset precision/recall/F1 over normalized tokens.
ScoreCard token_f1(std::string_view pred, std::string_view gold, const LanguageTag& lang,
                   const NormalizeOptions& options = {});

enum class CorrectnessMode { f1_threshold, exact_match };

struct CorrectnessPolicy {
    CorrectnessMode mode = CorrectnessMode::f1_threshold;
    double threshold = 0.5;  // used by f1_threshold; must be in (0, 1]
};

void validate(const CorrectnessPolicy& policy);

bool is_correct(std::string_view pred, std::string_view gold, const LanguageTag& lang,
                const CorrectnessPolicy& policy, const NormalizeOptions& options = {});
bool is_correct(const ScoreCard& card, const CorrectnessPolicy& policy);

std::string to_string(CorrectnessMode mode);
CorrectnessMode correctness_mode_from_string(std::string_view s);

}  // namespace mhqa::scoring
