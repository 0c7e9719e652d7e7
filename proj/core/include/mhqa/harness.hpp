#pragma once

#include "mhqa/condition.hpp"
#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"
#include "mhqa/prompts.hpp"
#include "mhqa/scoring.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mhqa::harness {

struct Judged {
    std::string answer;
    scoring::ScoreCard card;
    bool ok = false;
};

struct Outcome {
    std::string instance_id;
    Condition condition;
    Judged two_hop;
    Judged subq1;
    Judged subq2;
    bool complete = true;
    std::string failure;                           // endpoint failure detail when incomplete
    std::map<std::string, std::string> transcripts;  // raw prompts/outputs by stage name
};

enum class SubQEvalBridge { gold, predicted };

struct EvalOptions {
    prompts::SubQContext subq_context = prompts::SubQContext::single;
    // Bridge substituted into SubQ2 for the decomposed sub-question evaluation.
    SubQEvalBridge subq_eval_bridge = SubQEvalBridge::gold;
    std::string bridge_marker = corpus::kDefaultBridgeMarker;
    scoring::NormalizeOptions normalize;
    bool keep_transcripts = true;
    // Needed when a condition carries an irrelevant-distractor plan (pool
    // documents come from other instances).
    const corpus::Corpus* full_corpus = nullptr;
};

// Runs the two-hop question under the condition's strategy plus the two
// decomposed sub-questions (single-document prompts, query-language
// instructions), and scores all three against query-language gold.
Outcome evaluate_instance(const corpus::QAInstance& instance, const Condition& condition,
                          const gate::ModelHandle& model, const scoring::CorrectnessPolicy& policy,
                          const prompts::InstructionSet& iset, const EvalOptions& options = {});

// Whole grid, bounded-parallel, outcomes sorted by (instance_id, condition).
std::vector<Outcome> run_matrix(const corpus::Corpus& corpus, std::span<const Condition> conditions,
                                const gate::ModelHandle& model,
                                const scoring::CorrectnessPolicy& policy,
                                const prompts::InstructionSet& iset, const EvalOptions& options = {},
                                std::size_t parallelism = 1);

// Exact generation-call count evaluate would issue; the --dry-run budget.
std::size_t planned_generation_calls(std::size_t instance_count,
                                     std::span<const Condition> conditions);

// The 8-cell truth table over (two_hop, subq1, subq2) correctness.
enum class FailureMode {
    faithful,             // (ok, ok, ok)
    unfaithful_s1,        // (ok, wrong, ok)
    unfaithful_s2,        // (ok, ok, wrong)
    unfaithful_both,      // (ok, wrong, wrong)
    composition_failure,  // (wrong, ok, ok)
    wrong_with_s1,        // (wrong, ok, wrong)
    wrong_with_s2,        // (wrong, wrong, ok)
    all_wrong,            // (wrong, wrong, wrong)
};

std::string to_string(FailureMode mode);

FailureMode classify(const Outcome& outcome);  // rejects incomplete outcomes
FailureMode classify_cell(bool two_hop_ok, bool subq1_ok, bool subq2_ok);

struct RatioResult {
    double value = 0.0;
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    bool empty_denominator = false;
};

struct UnfaithfulnessRatios {
    RatioResult s1;    // (ok, wrong, ok)
    RatioResult s2;    // (ok, ok, wrong)
    RatioResult both;  // (ok, wrong, wrong)
};

// Denominator: all correctly answered two-hop questions. Outcomes must share
// one condition class; incomplete outcomes are not accepted.
UnfaithfulnessRatios unfaithfulness_ratio(std::span<const Outcome> outcomes);

// Denominator: all incorrectly answered two-hop questions.
RatioResult composition_failure_ratio(std::span<const Outcome> outcomes);

struct MatrixCell {
    double mean_f1 = 0.0;
    std::size_t n = 0;
};

// Table-1 shape: mean two-hop F1 per condition class and query language,
// averaged over the non-query document languages inside each class.
struct MatrixTable {
    std::vector<LanguageTag> query_langs;
    std::array<std::map<LanguageTag, MatrixCell>, 4> cells;  // indexed by ConditionClass
    std::array<double, 4> row_avg{};                         // mean of per-language means
    std::size_t incomplete = 0;                              // excluded outcomes
};

MatrixTable aggregate_matrix(std::span<const Outcome> outcomes);

std::string outcomes_to_jsonl(std::span<const Outcome> outcomes);
std::vector<Outcome> outcomes_from_jsonl(const std::string& content);
void save_outcomes(std::span<const Outcome> outcomes, const std::filesystem::path& path);
std::vector<Outcome> load_outcomes(const std::filesystem::path& path);

}  // namespace mhqa::harness
