#include "mhqa/harness.hpp"

#include "mhqa/error.hpp"
#include "mhqa/perturb.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace mhqa::harness {

using nlohmann::json;

namespace {

Judged judge(const std::string& answer, const std::string& gold, const LanguageTag& lang,
             const scoring::CorrectnessPolicy& policy, const scoring::NormalizeOptions& normalize) {
    Judged j;
    j.answer = answer;
    j.card = scoring::token_f1(answer, gold, lang, normalize);
    j.ok = scoring::is_correct(j.card, policy);
    return j;
}

const std::string& text_cell(const LangMap<std::string>& m, const LanguageTag& lang,
                             const std::string& instance_id, const std::string& field) {
    auto it = m.find(lang);
    if (it == m.end())
        throw ValidationError("instance '" + instance_id + "': missing language cell '" +
                              lang.code() + "' in field '" + field + "'");
    return it->second;
}

std::size_t calls_for_strategy(Strategy s) {
    // two-hop question + two sub-question evaluations, plus the extra SubQ
    // pipeline stages beyond the single two-hop call.
    switch (s) {
        case Strategy::standard:
        case Strategy::zero_shot_cot:
            return 3;
        case Strategy::subq_predicted:
        case Strategy::subq_gold:
            return 5;
    }
    return 3;
}

}  // namespace

Outcome evaluate_instance(const corpus::QAInstance& instance, const Condition& condition,
                          const gate::ModelHandle& model, const scoring::CorrectnessPolicy& policy,
                          const prompts::InstructionSet& iset, const EvalOptions& options) {
    const LanguageTag& q = condition.query_lang;
    const auto& cue = iset.for_language(q).answer_cue;
    scoring::validate(policy);

    Outcome outcome;
    outcome.instance_id = instance.id;
    outcome.condition = condition;

    const corpus::Document& hop1 = [&]() -> const corpus::Document& {
        auto it = instance.hop1_doc.find(condition.hop1_lang);
        if (it == instance.hop1_doc.end())
            throw ValidationError("instance '" + instance.id + "': missing language cell '" +
                                  condition.hop1_lang.code() + "' in field 'hop1_doc'");
        return it->second;
    }();
    const corpus::Document& hop2 = [&]() -> const corpus::Document& {
        auto it = instance.hop2_doc.find(condition.hop2_lang);
        if (it == instance.hop2_doc.end())
            throw ValidationError("instance '" + instance.id + "': missing language cell '" +
                                  condition.hop2_lang.code() + "' in field 'hop2_doc'");
        return it->second;
    }();

    const std::string& gold = text_cell(instance.gold_answer, q, instance.id, "gold_answer");
    const std::string& gold_bridge =
        text_cell(instance.bridge_entity, q, instance.id, "bridge_entity");

    std::vector<corpus::Document> context{hop1, hop2};
    if (condition.distractor_plan) {
        const auto& plan = *condition.distractor_plan;
        if (plan.language != condition.query_lang)
            throw ValidationError("distractor language must equal the query language");
        const corpus::Corpus* full = options.full_corpus;
        if (!full && plan.relevance == Relevance::irrelevant)
            throw ValidationError(
                "irrelevant distractors need the full corpus (EvalOptions::full_corpus)");
        corpus::Corpus self;
        if (!full) {
            self.languages.insert(plan.language);
            self.instances.push_back(instance);
            full = &self;
        }
        auto pool = perturb::build_pool(*full, instance, plan.relevance, plan.language, plan.seed);
        context = perturb::place(hop1, hop2, pool, plan.d);
    }

    // Two-hop question under the condition's strategy.
    try {
        switch (condition.strategy) {
            case Strategy::standard: {
                std::string prompt = prompts::build_standard(instance, condition, context, iset);
                std::string raw = model.generate(prompt).text;
                outcome.two_hop = judge(prompts::extract_answer(raw, cue), gold, q, policy, options.normalize);
                if (options.keep_transcripts) {
                    outcome.transcripts["two_hop_prompt"] = prompt;
                    outcome.transcripts["two_hop_output"] = raw;
                }
                break;
            }
            case Strategy::zero_shot_cot: {
                std::string prompt = prompts::build_cot(instance, condition, context, iset);
                std::string raw = model.generate(prompt, model.cot_params()).text;
                outcome.two_hop = judge(prompts::extract_answer(raw, cue), gold, q, policy, options.normalize);
                if (options.keep_transcripts) {
                    outcome.transcripts["two_hop_prompt"] = prompt;
                    outcome.transcripts["two_hop_output"] = raw;
                }
                break;
            }
            case Strategy::subq_predicted:
            case Strategy::subq_gold: {
                prompts::SubQOptions sopt;
                sopt.context = options.subq_context;
                sopt.bridge_marker = options.bridge_marker;
                auto mode = condition.strategy == Strategy::subq_gold ? prompts::SubQMode::gold
                                                                      : prompts::SubQMode::predicted;
                auto ts = prompts::run_subq(instance, condition, model, mode, iset, sopt);
                if (options.keep_transcripts) {
                    outcome.transcripts["subq_stage1_prompt"] = ts.stage1.prompt;
                    outcome.transcripts["subq_stage1_output"] = ts.stage1.raw_output;
                    outcome.transcripts["subq_stage2_prompt"] = ts.stage2.prompt;
                    outcome.transcripts["subq_stage2_output"] = ts.stage2.raw_output;
                    outcome.transcripts["subq_stage3_prompt"] = ts.stage3.prompt;
                    outcome.transcripts["subq_stage3_output"] = ts.stage3.raw_output;
                    if (ts.empty_bridge) outcome.transcripts["subq_flags"] = "empty-bridge";
                }
                if (!ts.complete) {
                    outcome.complete = false;
                    outcome.failure = ts.failure;
                    return outcome;
                }
                outcome.two_hop = judge(ts.final_answer, gold, q, policy, options.normalize);
                break;
            }
        }

        // Decomposed sub-question evaluation: single-document prompts in the
        // query-language instruction, SubQ2 with the bridge substituted.
        const std::string& subq1_text = text_cell(instance.subq1, q, instance.id, "subq1");
        std::vector<corpus::Document> hop1_only{hop1};
        std::string subq1_prompt = prompts::build_single(subq1_text, q, hop1_only, iset);
        std::string subq1_raw = model.generate(subq1_prompt).text;
        std::string subq1_answer = prompts::extract_answer(subq1_raw, cue);
        outcome.subq1 = judge(subq1_answer, gold_bridge, q, policy, options.normalize);

        const std::string& subq2_tmpl =
            text_cell(instance.subq2_template, q, instance.id, "subq2_template");
        std::string bridge_for_eval = options.subq_eval_bridge == SubQEvalBridge::gold
                                          ? gold_bridge
                                          : subq1_answer;
        std::string subq2_text =
            util::replace_all(subq2_tmpl, options.bridge_marker, bridge_for_eval);
        std::vector<corpus::Document> hop2_only{hop2};
        std::string subq2_prompt = prompts::build_single(subq2_text, q, hop2_only, iset);
        std::string subq2_raw = model.generate(subq2_prompt).text;
        outcome.subq2 = judge(prompts::extract_answer(subq2_raw, cue), gold, q, policy, options.normalize);

        if (options.keep_transcripts) {
            outcome.transcripts["subq1_prompt"] = subq1_prompt;
            outcome.transcripts["subq1_output"] = subq1_raw;
            outcome.transcripts["subq2_prompt"] = subq2_prompt;
            outcome.transcripts["subq2_output"] = subq2_raw;
        }
    } catch (const EndpointError& e) {
        outcome.complete = false;
        outcome.failure = e.what();
    }
    return outcome;
}

std::vector<Outcome> run_matrix(const corpus::Corpus& corpus, std::span<const Condition> conditions,
                                const gate::ModelHandle& model,
                                const scoring::CorrectnessPolicy& policy,
                                const prompts::InstructionSet& iset, const EvalOptions& options,
                                std::size_t parallelism) {
    std::vector<std::pair<std::size_t, std::size_t>> tasks;  // (instance idx, condition idx)
    for (std::size_t i = 0; i < corpus.instances.size(); ++i)
        for (std::size_t c = 0; c < conditions.size(); ++c) tasks.emplace_back(i, c);

    std::vector<Outcome> outcomes(tasks.size());
    util::parallel_for(tasks.size(), parallelism, [&](std::size_t t) {
        const auto& [i, c] = tasks[t];
        outcomes[t] =
            evaluate_instance(corpus.instances[i], conditions[c], model, policy, iset, options);
    });

    std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) {
        if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
        return condition_key(a.condition) < condition_key(b.condition);
    });
    return outcomes;
}

std::size_t planned_generation_calls(std::size_t instance_count,
                                     std::span<const Condition> conditions) {
    std::size_t per_instance = 0;
    for (const auto& c : conditions) per_instance += calls_for_strategy(c.strategy);
    return instance_count * per_instance;
}

std::string to_string(FailureMode mode) {
    switch (mode) {
        case FailureMode::faithful: return "Faithful";
        case FailureMode::unfaithful_s1: return "Unfaithful_S1";
        case FailureMode::unfaithful_s2: return "Unfaithful_S2";
        case FailureMode::unfaithful_both: return "Unfaithful_Both";
        case FailureMode::composition_failure: return "CompositionFailure";
        case FailureMode::wrong_with_s1: return "WrongWithS1";
        case FailureMode::wrong_with_s2: return "WrongWithS2";
        case FailureMode::all_wrong: return "AllWrong";
    }
    return "AllWrong";
}

FailureMode classify_cell(bool two_hop_ok, bool subq1_ok, bool subq2_ok) {
    if (two_hop_ok) {
        if (subq1_ok && subq2_ok) return FailureMode::faithful;
        if (!subq1_ok && subq2_ok) return FailureMode::unfaithful_s1;
        if (subq1_ok && !subq2_ok) return FailureMode::unfaithful_s2;
        return FailureMode::unfaithful_both;
    }
    if (subq1_ok && subq2_ok) return FailureMode::composition_failure;
    if (subq1_ok && !subq2_ok) return FailureMode::wrong_with_s1;
    if (!subq1_ok && subq2_ok) return FailureMode::wrong_with_s2;
    return FailureMode::all_wrong;
}

FailureMode classify(const Outcome& outcome) {
    if (!outcome.complete)
        throw ValidationError("cannot classify incomplete outcome for instance '" +
                              outcome.instance_id + "'");
    return classify_cell(outcome.two_hop.ok, outcome.subq1.ok, outcome.subq2.ok);
}

namespace {

void require_single_class(std::span<const Outcome> outcomes, const char* op) {
    if (outcomes.empty()) return;
    ConditionClass cls = condition_class(outcomes.front().condition);
    for (const auto& o : outcomes) {
        if (!o.complete)
            throw ValidationError(std::string(op) + ": incomplete outcome for instance '" +
                                  o.instance_id + "'");
        if (condition_class(o.condition) != cls)
            throw ValidationError(std::string(op) + ": outcomes mix condition classes");
    }
}

RatioResult make_ratio(std::size_t numerator, std::size_t denominator) {
    RatioResult r;
    r.numerator = numerator;
    r.denominator = denominator;
    r.empty_denominator = denominator == 0;
    r.value = denominator == 0 ? 0.0 : static_cast<double>(numerator) / denominator;
    return r;
}

}  // namespace

UnfaithfulnessRatios unfaithfulness_ratio(std::span<const Outcome> outcomes) {
    require_single_class(outcomes, "unfaithfulness_ratio");
    std::size_t correct = 0, s1 = 0, s2 = 0, both = 0;
    for (const auto& o : outcomes) {
        if (!o.two_hop.ok) continue;  // denominator: two-hop correct only
        ++correct;
        switch (classify(o)) {
            case FailureMode::unfaithful_s1: ++s1; break;
            case FailureMode::unfaithful_s2: ++s2; break;
            case FailureMode::unfaithful_both: ++both; break;
            default: break;
        }
    }
    return {make_ratio(s1, correct), make_ratio(s2, correct), make_ratio(both, correct)};
}

RatioResult composition_failure_ratio(std::span<const Outcome> outcomes) {
    require_single_class(outcomes, "composition_failure_ratio");
    std::size_t wrong = 0, comp = 0;
    for (const auto& o : outcomes) {
        if (o.two_hop.ok) continue;  // denominator: two-hop incorrect only
        ++wrong;
        if (classify(o) == FailureMode::composition_failure) ++comp;
    }
    return make_ratio(comp, wrong);
}

MatrixTable aggregate_matrix(std::span<const Outcome> outcomes) {
    MatrixTable table;
    LangSet langs;
    std::array<std::map<LanguageTag, std::pair<double, std::size_t>>, 4> sums;
    for (const auto& o : outcomes) {
        if (!o.complete) {
            ++table.incomplete;
            continue;
        }
        langs.insert(o.condition.query_lang);
        auto cls = static_cast<std::size_t>(condition_class(o.condition));
        auto& [sum, n] = sums[cls][o.condition.query_lang];
        sum += o.two_hop.card.f1;
        ++n;
    }
    table.query_langs.assign(langs.begin(), langs.end());
    for (std::size_t cls = 0; cls < 4; ++cls) {
        double row_sum = 0.0;
        std::size_t row_n = 0;
        for (const auto& [tag, acc] : sums[cls]) {
            MatrixCell cell{acc.second ? acc.first / acc.second : 0.0, acc.second};
            table.cells[cls][tag] = cell;
            if (acc.second) {
                row_sum += cell.mean_f1;
                ++row_n;
            }
        }
        table.row_avg[cls] = row_n ? row_sum / row_n : 0.0;
    }
    return table;
}

namespace {

json judged_to_json(const Judged& j) {
    return json{{"answer", j.answer},
                {"f1", j.card.f1},
                {"precision", j.card.precision},
                {"recall", j.card.recall},
                {"exact", j.card.exact},
                {"ok", j.ok}};
}

Judged judged_from_json(const json& j) {
    Judged out;
    out.answer = j.value("answer", "");
    out.card.f1 = j.value("f1", 0.0);
    out.card.precision = j.value("precision", 0.0);
    out.card.recall = j.value("recall", 0.0);
    out.card.exact = j.value("exact", false);
    out.ok = j.value("ok", false);
    return out;
}

}  // namespace

std::string outcomes_to_jsonl(std::span<const Outcome> outcomes) {
    std::ostringstream out;
    for (const auto& o : outcomes) {
        json j;
        j["instance_id"] = o.instance_id;
        j["condition"] = {
            {"query_lang", o.condition.query_lang.code()},
            {"hop1_lang", o.condition.hop1_lang.code()},
            {"hop2_lang", o.condition.hop2_lang.code()},
            {"strategy", to_string(o.condition.strategy)},
        };
        if (o.condition.distractor_plan) {
            j["condition"]["distractor"] = {
                {"d", o.condition.distractor_plan->d},
                {"relevance", to_string(o.condition.distractor_plan->relevance)},
                {"language", o.condition.distractor_plan->language.code()},
                {"seed", o.condition.distractor_plan->seed},
            };
        }
        j["two_hop"] = judged_to_json(o.two_hop);
        j["subq1"] = judged_to_json(o.subq1);
        j["subq2"] = judged_to_json(o.subq2);
        j["complete"] = o.complete;
        if (!o.failure.empty()) j["failure"] = o.failure;
        if (!o.transcripts.empty()) j["transcripts"] = o.transcripts;
        out << j.dump() << '\n';
    }
    return out.str();
}

std::vector<Outcome> outcomes_from_jsonl(const std::string& content) {
    std::vector<Outcome> outcomes;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (util::trim(line).empty()) continue;
        json j = json::parse(line);
        Outcome o;
        o.instance_id = j.value("instance_id", "");
        const auto& c = j.at("condition");
        o.condition.query_lang = LanguageTag(c.value("query_lang", "en"));
        o.condition.hop1_lang = LanguageTag(c.value("hop1_lang", "en"));
        o.condition.hop2_lang = LanguageTag(c.value("hop2_lang", "en"));
        o.condition.strategy = strategy_from_string(c.value("strategy", "standard"));
        if (c.contains("distractor")) {
            DistractorPlan plan;
            plan.d = c["distractor"].value("d", 1);
            plan.relevance = relevance_from_string(c["distractor"].value("relevance", "irrelevant"));
            plan.language = LanguageTag(c["distractor"].value("language", "en"));
            plan.seed = c["distractor"].value("seed", 0ull);
            o.condition.distractor_plan = plan;
        }
        o.two_hop = judged_from_json(j.at("two_hop"));
        o.subq1 = judged_from_json(j.at("subq1"));
        o.subq2 = judged_from_json(j.at("subq2"));
        o.complete = j.value("complete", true);
        o.failure = j.value("failure", "");
        if (j.contains("transcripts"))
            o.transcripts = j["transcripts"].get<std::map<std::string, std::string>>();
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

void save_outcomes(std::span<const Outcome> outcomes, const std::filesystem::path& path) {
    util::write_file_atomic(path, outcomes_to_jsonl(outcomes));
}

std::vector<Outcome> load_outcomes(const std::filesystem::path& path) {
    return outcomes_from_jsonl(util::read_file(path));
}

}  // namespace mhqa::harness
