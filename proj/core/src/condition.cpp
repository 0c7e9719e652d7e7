#include "mhqa/condition.hpp"

#include "mhqa/error.hpp"

#include <sstream>

namespace mhqa::harness {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::standard: return "standard";
        case Strategy::zero_shot_cot: return "cot";
        case Strategy::subq_predicted: return "subq";
        case Strategy::subq_gold: return "subq_gold";
    }
    return "standard";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "standard") return Strategy::standard;
    if (s == "cot" || s == "zero_shot_cot") return Strategy::zero_shot_cot;
    if (s == "subq" || s == "subq_predicted") return Strategy::subq_predicted;
    if (s == "subq_gold") return Strategy::subq_gold;
    throw ConfigError("unknown strategy: '" + std::string(s) + "'");
}

std::string to_string(Relevance r) {
    return r == Relevance::relevant ? "relevant" : "irrelevant";
}

Relevance relevance_from_string(std::string_view s) {
    if (s == "relevant") return Relevance::relevant;
    if (s == "irrelevant") return Relevance::irrelevant;
    throw ConfigError("unknown relevance: '" + std::string(s) + "'");
}

ConditionClass condition_class(const Condition& c) {
    bool h1_same = c.hop1_lang == c.query_lang;
    bool h2_same = c.hop2_lang == c.query_lang;
    if (h1_same && h2_same) return ConditionClass::q_q;
    if (!h1_same && h2_same) return ConditionClass::qbar_q;
    if (h1_same && !h2_same) return ConditionClass::q_qbar;
    return ConditionClass::qbar_qbar;
}

std::string class_label(ConditionClass cls) {
    switch (cls) {
        case ConditionClass::q_q: return "Q,Q";
        case ConditionClass::qbar_q: return "Qbar,Q";
        case ConditionClass::q_qbar: return "Q,Qbar";
        case ConditionClass::qbar_qbar: return "Qbar,Qbar";
    }
    return "Q,Q";
}

std::string setting_label(ConditionClass cls) {
    return cls == ConditionClass::q_q ? "Monolingual" : "Multilingual";
}

bool is_monolingual(ConditionClass cls) { return cls == ConditionClass::q_q; }

std::string condition_key(const Condition& c) {
    std::ostringstream key;
    key << "q=" << c.query_lang.code() << ";h1=" << c.hop1_lang.code()
        << ";h2=" << c.hop2_lang.code() << ";s=" << to_string(c.strategy);
    if (c.distractor_plan) {
        key << ";d=" << c.distractor_plan->d << ";rel=" << to_string(c.distractor_plan->relevance)
            << ";seed=" << c.distractor_plan->seed;
    }
    return key.str();
}

GridMode grid_mode_from_string(std::string_view s) {
    if (s == "full") return GridMode::full;
    if (s == "classes") return GridMode::classes;
    throw ConfigError("unknown grid mode: '" + std::string(s) + "'");
}

std::string to_string(GridMode mode) { return mode == GridMode::full ? "full" : "classes"; }

std::vector<Condition> make_grid(const std::vector<LanguageTag>& languages, Strategy strategy,
                                 GridMode mode) {
    if (languages.empty()) throw ConfigError("condition grid requires at least one language");
    std::vector<Condition> grid;
    if (mode == GridMode::full) {
        for (const auto& q : languages)
            for (const auto& h1 : languages)
                for (const auto& h2 : languages)
                    grid.push_back({q, h1, h2, strategy, std::nullopt});
        return grid;
    }
    for (const auto& q : languages) {
        grid.push_back({q, q, q, strategy, std::nullopt});
        for (const auto& l : languages) {
            if (l == q) continue;
            grid.push_back({q, l, q, strategy, std::nullopt});
            grid.push_back({q, q, l, strategy, std::nullopt});
            grid.push_back({q, l, l, strategy, std::nullopt});
        }
    }
    return grid;
}

}  // namespace mhqa::harness
