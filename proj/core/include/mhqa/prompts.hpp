#pragma once

#include "mhqa/condition.hpp"
#include "mhqa/corpus.hpp"
#include "mhqa/gateway.hpp"
#include "mhqa/templates.hpp"

#include <span>
#include <string>

namespace mhqa::prompts {

// "Title: {title}\n{body}" blocks separated by blank lines; empty context
// renders as an empty block.
std::string render_documents(std::span<const corpus::Document> docs);

// Standard layout: instruction, question, document block, question again,
// answer cue. Byte-deterministic for fixed inputs.
std::string build_standard(const corpus::QAInstance& instance, const harness::Condition& condition,
                           std::span<const corpus::Document> context, const InstructionSet& iset);

// Standard layout plus the localized think-step-by-step directive.
std::string build_cot(const corpus::QAInstance& instance, const harness::Condition& condition,
                      std::span<const corpus::Document> context, const InstructionSet& iset);

// Single-hop prompt for an arbitrary question text (sub-question evaluation,
// contamination-filter ablations).
std::string build_single(const std::string& question, const LanguageTag& instruction_lang,
                         std::span<const corpus::Document> context, const InstructionSet& iset);

// Answer span: text after the last answer cue (ASCII-case-insensitive) when
// present, else the final non-empty line, whitespace-trimmed.
std::string extract_answer(std::string_view raw_output, std::string_view answer_cue);

enum class SubQMode { predicted, gold };
enum class SubQContext { single, both };  // documents shown to stages 1 and 2

std::string to_string(SubQMode mode);

struct SubQOptions {
    SubQContext context = SubQContext::single;
    std::string bridge_marker = corpus::kDefaultBridgeMarker;
};

struct SubQStage {
    std::string prompt;
    std::string raw_output;
    std::string extracted;
};

struct SubQTranscript {
    SubQStage stage1;  // SubQ1 over the Hop-1 document -> bridge entity
    SubQStage stage2;  // bridge-substituted SubQ2 over the Hop-2 document
    SubQStage stage3;  // composition over both sub-questions and answers
    SubQMode mode = SubQMode::predicted;
    std::string final_answer;
    bool empty_bridge = false;  // predicted mode produced an empty stage-1 answer
    bool complete = false;
    std::string failure;  // endpoint failure message when !complete
};

// Three-stage decomposed prompting. A stage failure stops the pipeline and
// returns the partial transcript with complete=false.
SubQTranscript run_subq(const corpus::QAInstance& instance, const harness::Condition& condition,
                        const gate::ModelHandle& model, SubQMode mode, const InstructionSet& iset,
                        const SubQOptions& options = {});

}  // namespace mhqa::prompts
