#pragma once

#include "mhqa/condition.hpp"
#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"
#include "mhqa/harness.hpp"
#include "mhqa/templates.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mhqa::linglab {
class SubwordTokenizer;
}

namespace mhqa::attribution {

using harness::Condition;

enum class ErasureUnit { token, word, sentence };
enum class ErasureMode { remove, mask };

ErasureUnit erasure_unit_from_string(std::string_view s);
std::string to_string(ErasureUnit unit);

struct AttributionOptions {
    ErasureUnit unit = ErasureUnit::word;
    ErasureMode mode = ErasureMode::remove;
    std::string mask_token = "____";
    // Required for token granularity; word/sentence need no tokenizer.
    const linglab::SubwordTokenizer* tokenizer = nullptr;
    bool log_space = false;  // deltas on log-probabilities instead of probabilities
};

// Splits text so that concatenating the segments reproduces it byte-exactly.
// word: whitespace runs attach to the preceding word (zh splits per
// character); sentence: terminator runs close a segment; token: greedy
// longest match over the tokenizer's vocabulary.
std::vector<std::string> segment_text(const std::string& text, ErasureUnit unit,
                                      const LanguageTag& lang,
                                      const linglab::SubwordTokenizer* tokenizer = nullptr);

struct Contribution {
    int hop = 1;  // 1 or 2
    std::size_t index = 0;
    std::string text;
    double delta = 0.0;  // p_full - p_erased
    bool missing = false;
};

struct ContributionMap {
    double p_full = 0.0;
    std::vector<Contribution> segments;
};

struct AttributionReport {
    std::string instance_id;
    std::string condition_key;
    LanguageTag hop1_lang;
    LanguageTag hop2_lang;
    double hop1_sum = 0.0;  // signed, not clamped
    double hop2_sum = 0.0;
    std::optional<double> hop1_pct;  // hop1_sum / (hop1_sum + hop2_sum), fraction
    bool degenerate = false;  // denominator <= 0
    bool partial = false;     // some segments failed to score
};

// Erases each hop-document segment in turn and measures the drop in the gold
// answer's probability under the standard prompt layout.
std::pair<ContributionMap, AttributionReport> attribute(const corpus::QAInstance& instance,
                                                        const Condition& condition,
                                                        const gate::ModelHandle& model,
                                                        const prompts::InstructionSet& iset,
                                                        const AttributionOptions& options = {});

struct CohortStats {
    double mean = 0.0;
    std::size_t n = 0;
    bool present = false;  // false when the cohort is empty
};

struct PairCohorts {
    LanguageTag hop1_lang;
    LanguageTag hop2_lang;
    CohortStats faithful;
    CohortStats unfaithful_s1;
};

struct CohortSummary {
    CohortStats faithful;
    CohortStats unfaithful_s1;
    std::vector<PairCohorts> pairs;  // Fig-3 shape, one row per language pair
};

// Mean Hop-1 attribution share per cohort (Faithful vs Unfaithful_S1),
// excluding degenerate and partial reports; joined on (instance, condition).
CohortSummary cohort_compare(std::span<const AttributionReport> reports,
                             std::span<const harness::Outcome> outcomes);

std::string reports_to_jsonl(std::span<const AttributionReport> reports);
std::vector<AttributionReport> reports_from_jsonl(const std::string& content);
void save_reports(std::span<const AttributionReport> reports, const std::filesystem::path& path);
std::vector<AttributionReport> load_reports(const std::filesystem::path& path);

}  // namespace mhqa::attribution
