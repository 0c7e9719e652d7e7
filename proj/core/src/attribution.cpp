#include "mhqa/attribution.hpp"

#include "mhqa/error.hpp"
#include "mhqa/linglab.hpp"
#include "mhqa/prompts.hpp"
#include "mhqa/util.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <sstream>

namespace mhqa::attribution {

using nlohmann::json;

ErasureUnit erasure_unit_from_string(std::string_view s) {
    if (s == "token") return ErasureUnit::token;
    if (s == "word") return ErasureUnit::word;
    if (s == "sentence") return ErasureUnit::sentence;
    throw ConfigError("unknown erasure unit: '" + std::string(s) + "'");
}

std::string to_string(ErasureUnit unit) {
    switch (unit) {
        case ErasureUnit::token: return "token";
        case ErasureUnit::word: return "word";
        case ErasureUnit::sentence: return "sentence";
    }
    return "word";
}

namespace {

bool is_ws(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == 0x3000;
}

bool is_terminator(char32_t cp) {
    switch (cp) {
        case U'.':
        case U'!':
        case U'?':
        case 0x3002:  // 。
        case 0xFF01:  // ！
        case 0xFF1F:  // ？
        case 0x061F:  // ؟
            return true;
        default:
            return false;
    }
}

// Words carry their trailing whitespace; a leading whitespace run sticks to
// the first word so concatenation stays byte-exact.
std::vector<std::string> segment_words(const std::vector<char32_t>& cps, bool per_char) {
    std::vector<std::string> segments;
    std::string current;
    bool buffer_has_word = false;
    bool prev_ws = false;
    auto flush = [&] {
        if (!current.empty()) {
            segments.push_back(current);
            current.clear();
        }
        buffer_has_word = false;
    };
    for (char32_t cp : cps) {
        if (is_ws(cp)) {
            current += util::utf8_encode(cp);
            prev_ws = true;
            continue;
        }
        if (buffer_has_word && (per_char || prev_ws)) flush();
        current += util::utf8_encode(cp);
        buffer_has_word = true;
        prev_ws = false;
    }
    flush();
    return segments;
}

std::vector<std::string> segment_sentences(const std::vector<char32_t>& cps) {
    std::vector<std::string> segments;
    std::string current;
    bool after_terminator = false;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t cp = cps[i];
        if (after_terminator && !is_ws(cp) && !is_terminator(cp)) {
            if (!current.empty()) segments.push_back(current);
            current.clear();
            after_terminator = false;
        }
        current += util::utf8_encode(cp);
        if (is_terminator(cp)) after_terminator = true;
    }
    if (!current.empty()) segments.push_back(current);
    return segments;
}

}  // namespace

std::vector<std::string> segment_text(const std::string& text, ErasureUnit unit,
                                      const LanguageTag& lang,
                                      const linglab::SubwordTokenizer* tokenizer) {
    std::vector<std::string> segments;
    switch (unit) {
        case ErasureUnit::word:
            segments = segment_words(util::utf8_decode(text), lang.code() == "zh");
            break;
        case ErasureUnit::sentence:
            segments = segment_sentences(util::utf8_decode(text));
            break;
        case ErasureUnit::token: {
            if (!tokenizer)
                throw ConfigError(
                    "token-level erasure requires a tokenizer profile (see lingsim vocabularies)");
            segments = tokenizer->tokenize(text);
            break;
        }
    }
    std::string joined;
    for (const auto& s : segments) joined += s;
    if (joined != text)
        throw ValidationError("segmentation does not partition the text byte-exactly");
    return segments;
}

namespace {

struct HopSegments {
    const corpus::Document* doc;
    std::vector<std::string> segments;
};

std::string body_without(const std::vector<std::string>& segments, std::size_t skip,
                         ErasureMode mode, const std::string& mask_token) {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i == skip) {
            if (mode == ErasureMode::mask) out += mask_token;
            continue;
        }
        out += segments[i];
    }
    return out;
}

}  // namespace

std::pair<ContributionMap, AttributionReport> attribute(const corpus::QAInstance& instance,
                                                        const Condition& condition,
                                                        const gate::ModelHandle& model,
                                                        const prompts::InstructionSet& iset,
                                                        const AttributionOptions& options) {
    model.require_scoring();
    const LanguageTag& q = condition.query_lang;
    auto gold_it = instance.gold_answer.find(q);
    if (gold_it == instance.gold_answer.end())
        throw ValidationError("instance '" + instance.id + "': missing language cell '" + q.code() +
                              "' in field 'gold_answer'");
    // Leading space: the target starts a fresh word after the answer cue.
    const std::string target = " " + gold_it->second;

    auto hop1_it = instance.hop1_doc.find(condition.hop1_lang);
    auto hop2_it = instance.hop2_doc.find(condition.hop2_lang);
    if (hop1_it == instance.hop1_doc.end() || hop2_it == instance.hop2_doc.end())
        throw ValidationError("instance '" + instance.id + "': missing hop document cell");

    const corpus::Document& hop1 = hop1_it->second;
    const corpus::Document& hop2 = hop2_it->second;

    auto score_probability = [&](const std::string& prompt) {
        auto result = model.score(prompt, target);
        return options.log_space ? result.total_logprob : result.probability;
    };

    std::vector<corpus::Document> full_context{hop1, hop2};
    std::string full_prompt = prompts::build_standard(instance, condition, full_context, iset);

    ContributionMap cmap;
    cmap.p_full = score_probability(full_prompt);

    AttributionReport report;
    report.instance_id = instance.id;
    report.condition_key = condition_key(condition);
    report.hop1_lang = condition.hop1_lang;
    report.hop2_lang = condition.hop2_lang;

    HopSegments hops[2] = {
        {&hop1, segment_text(hop1.body, options.unit, hop1.language, options.tokenizer)},
        {&hop2, segment_text(hop2.body, options.unit, hop2.language, options.tokenizer)},
    };

    for (int h = 0; h < 2; ++h) {
        double sum = 0.0;
        for (std::size_t i = 0; i < hops[h].segments.size(); ++i) {
            Contribution contrib;
            contrib.hop = h + 1;
            contrib.index = i;
            contrib.text = hops[h].segments[i];
            corpus::Document erased = *hops[h].doc;
            erased.body = body_without(hops[h].segments, i, options.mode, options.mask_token);
            std::vector<corpus::Document> context =
                h == 0 ? std::vector<corpus::Document>{erased, hop2}
                       : std::vector<corpus::Document>{hop1, erased};
            std::string prompt = prompts::build_standard(instance, condition, context, iset);
            try {
                // The gateway already retried; a failure here is permanent.
                double p_erased = score_probability(prompt);
                contrib.delta = cmap.p_full - p_erased;
                sum += contrib.delta;
            } catch (const EndpointError&) {
                contrib.missing = true;
                report.partial = true;
            }
            cmap.segments.push_back(std::move(contrib));
        }
        if (h == 0)
            report.hop1_sum = sum;
        else
            report.hop2_sum = sum;
    }

    double denominator = report.hop1_sum + report.hop2_sum;
    if (denominator > 0.0) {
        report.hop1_pct = report.hop1_sum / denominator;
    } else {
        report.degenerate = true;
    }
    return {std::move(cmap), std::move(report)};
}

CohortSummary cohort_compare(std::span<const AttributionReport> reports,
                             std::span<const harness::Outcome> outcomes) {
    // Join key: (instance id, condition key).
    std::map<std::pair<std::string, std::string>, harness::FailureMode> modes;
    for (const auto& o : outcomes) {
        if (!o.complete) continue;
        modes[{o.instance_id, condition_key(o.condition)}] = harness::classify(o);
    }

    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
    };
    Acc faithful_all, unfaithful_all;
    std::map<std::pair<std::string, std::string>, std::pair<Acc, Acc>> per_pair;
    std::map<std::pair<std::string, std::string>, std::pair<LanguageTag, LanguageTag>> pair_tags;

    for (const auto& r : reports) {
        if (r.degenerate || r.partial || !r.hop1_pct) continue;
        auto it = modes.find({r.instance_id, r.condition_key});
        if (it == modes.end()) continue;
        bool faithful = it->second == harness::FailureMode::faithful;
        bool unfaithful = it->second == harness::FailureMode::unfaithful_s1;
        if (!faithful && !unfaithful) continue;
        auto key = std::make_pair(r.hop1_lang.code(), r.hop2_lang.code());
        pair_tags.emplace(key, std::make_pair(r.hop1_lang, r.hop2_lang));
        auto& [f_acc, u_acc] = per_pair[key];
        Acc& overall = faithful ? faithful_all : unfaithful_all;
        Acc& pair_acc = faithful ? f_acc : u_acc;
        overall.sum += *r.hop1_pct;
        ++overall.n;
        pair_acc.sum += *r.hop1_pct;
        ++pair_acc.n;
    }

    auto to_stats = [](const Acc& a) {
        CohortStats s;
        s.n = a.n;
        s.present = a.n > 0;
        s.mean = a.n ? a.sum / a.n : 0.0;
        return s;
    };

    CohortSummary summary;
    summary.faithful = to_stats(faithful_all);
    summary.unfaithful_s1 = to_stats(unfaithful_all);
    for (const auto& [key, accs] : per_pair) {
        PairCohorts pair;
        pair.hop1_lang = pair_tags.at(key).first;
        pair.hop2_lang = pair_tags.at(key).second;
        pair.faithful = to_stats(accs.first);
        pair.unfaithful_s1 = to_stats(accs.second);
        summary.pairs.push_back(std::move(pair));
    }
    return summary;
}

std::string reports_to_jsonl(std::span<const AttributionReport> reports) {
    std::ostringstream out;
    for (const auto& r : reports) {
        json j;
        j["instance_id"] = r.instance_id;
        j["condition_key"] = r.condition_key;
        j["hop1_lang"] = r.hop1_lang.code();
        j["hop2_lang"] = r.hop2_lang.code();
        j["hop1_sum"] = r.hop1_sum;
        j["hop2_sum"] = r.hop2_sum;
        if (r.hop1_pct) j["hop1_pct"] = *r.hop1_pct;
        j["degenerate"] = r.degenerate;
        j["partial"] = r.partial;
        out << j.dump() << '\n';
    }
    return out.str();
}

std::vector<AttributionReport> reports_from_jsonl(const std::string& content) {
    std::vector<AttributionReport> reports;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        if (util::trim(line).empty()) continue;
        json j = json::parse(line);
        AttributionReport r;
        r.instance_id = j.value("instance_id", "");
        r.condition_key = j.value("condition_key", "");
        r.hop1_lang = LanguageTag(j.value("hop1_lang", "en"));
        r.hop2_lang = LanguageTag(j.value("hop2_lang", "en"));
        r.hop1_sum = j.value("hop1_sum", 0.0);
        r.hop2_sum = j.value("hop2_sum", 0.0);
        if (j.contains("hop1_pct")) r.hop1_pct = j["hop1_pct"].get<double>();
        r.degenerate = j.value("degenerate", false);
        r.partial = j.value("partial", false);
        reports.push_back(std::move(r));
    }
    return reports;
}

void save_reports(std::span<const AttributionReport> reports, const std::filesystem::path& path) {
    util::write_file_atomic(path, reports_to_jsonl(reports));
}

std::vector<AttributionReport> load_reports(const std::filesystem::path& path) {
    return reports_from_jsonl(util::read_file(path));
}

}  // namespace mhqa::attribution
