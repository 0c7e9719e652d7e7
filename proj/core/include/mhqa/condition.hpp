#pragma once

#include "mhqa/lang.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mhqa::harness {

enum class Strategy { standard, zero_shot_cot, subq_predicted, subq_gold };

std::string to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

enum class Relevance { relevant, irrelevant };

std::string to_string(Relevance r);
Relevance relevance_from_string(std::string_view s);

// Signed hop distance: |d|-1 distractors sit between the two gold documents,
// d > 0 puts Hop-1 first, d < 0 reverses the pair. d = 0 is invalid.
struct DistractorPlan {
    int d = 1;
    Relevance relevance = Relevance::irrelevant;
    LanguageTag language;  // must equal the query language
    std::uint64_t seed = 0;
};

// One experimental cell of the condition matrix.
struct Condition {
    LanguageTag query_lang;
    LanguageTag hop1_lang;
    LanguageTag hop2_lang;
    Strategy strategy = Strategy::standard;
    std::optional<DistractorPlan> distractor_plan;
};

// Hop-k is Q when its document language equals the query language.
enum class ConditionClass { q_q, qbar_q, q_qbar, qbar_qbar };

ConditionClass condition_class(const Condition& c);
std::string class_label(ConditionClass cls);      // "Q,Q" ... "Qbar,Qbar"
std::string setting_label(ConditionClass cls);    // "Monolingual" / "Multilingual"
bool is_monolingual(ConditionClass cls);

// Stable sort/serialization key for a condition.
std::string condition_key(const Condition& c);

enum class GridMode { full, classes };

GridMode grid_mode_from_string(std::string_view s);
std::string to_string(GridMode mode);

// full: every (query, hop1, hop2) combination. classes: per query language,
// the four-class sample (q,q), (l,q), (q,l), (l,l) for each l != q.
std::vector<Condition> make_grid(const std::vector<LanguageTag>& languages, Strategy strategy,
                                 GridMode mode);

}  // namespace mhqa::harness
