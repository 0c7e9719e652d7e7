#pragma once

#include "mhqa/condition.hpp"
#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"
#include "mhqa/scoring.hpp"
#include "mhqa/templates.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mhqa::perturb {

using harness::Condition;
using harness::Relevance;

struct DistractorPool {
    enum class Source { instance_pool, foreign_instances };
    std::vector<corpus::Document> documents;  // plan-language documents
    Source source = Source::instance_pool;
};

// relevant: the instance's own non-gold pool paragraphs. irrelevant: gold
// documents of other instances, seeded sample without replacement. Pool
// documents never share an id with the target instance's gold documents.
DistractorPool build_pool(const corpus::Corpus& corpus, const corpus::QAInstance& instance,
                          Relevance relevance, const LanguageTag& language, std::uint64_t seed);

// [first hop, |d|-1 distractors, second hop]; d > 0 puts Hop-1 first, d < 0
// reverses. Distractors come from the pool front, deterministically.
std::vector<corpus::Document> place(const corpus::Document& hop1, const corpus::Document& hop2,
                                    const DistractorPool& pool, int d);

struct SweepEntry {
    std::string instance_id;
    Condition condition;  // strategy forced to standard for the sweep
};

struct SweepRow {
    int d = 0;
    Relevance relevance = Relevance::irrelevant;
    double mean_f1 = 0.0;
    std::size_t n = 0;
};

// Distractor-distance curve: evaluates the two-hop question per d with the
// standard strategy over the placed sequence, averaging over the cohort.
// Per-instance failures are dropped from the means and counted.
struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t failures = 0;
};

SweepResult sweep(const corpus::Corpus& corpus, std::span<const SweepEntry> cohort,
                  const gate::ModelHandle& model, std::span<const int> d_values,
                  Relevance relevance, const scoring::CorrectnessPolicy& policy,
                  const prompts::InstructionSet& iset, std::uint64_t seed,
                  std::size_t parallelism = 1,
                  const scoring::NormalizeOptions& normalize = {});

std::string sweep_rows_to_tsv(std::span<const SweepRow> rows);
std::vector<SweepRow> sweep_rows_from_tsv(const std::string& content);

void save_sweep_result(const SweepResult& result, const std::filesystem::path& path);
SweepResult load_sweep_result(const std::filesystem::path& path);

}  // namespace mhqa::perturb
