#include "mhqa/perturb.hpp"

#include "mhqa/error.hpp"
#include "mhqa/prompts.hpp"
#include "mhqa/util.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

namespace mhqa::perturb {

namespace {

const corpus::Document& doc_in(const LangMap<corpus::Document>& m, const LanguageTag& language,
                               const std::string& instance_id, const char* field) {
    auto it = m.find(language);
    if (it == m.end())
        throw ValidationError("instance '" + instance_id + "': missing language cell '" +
                              language.code() + "' in field '" + field + "'");
    return it->second;
}

}  // namespace

DistractorPool build_pool(const corpus::Corpus& corpus, const corpus::QAInstance& instance,
                          Relevance relevance, const LanguageTag& language, std::uint64_t seed) {
    const std::string hop1_id = doc_in(instance.hop1_doc, language, instance.id, "hop1_doc").id;
    const std::string hop2_id = doc_in(instance.hop2_doc, language, instance.id, "hop2_doc").id;

    DistractorPool pool;
    if (relevance == Relevance::relevant) {
        pool.source = DistractorPool::Source::instance_pool;
        for (const auto& entry : instance.distractor_pool) {
            auto it = entry.find(language);
            if (it == entry.end()) continue;
            if (it->second.id == hop1_id || it->second.id == hop2_id) continue;
            pool.documents.push_back(it->second);
        }
        if (pool.documents.empty())
            throw ValidationError("relevant distractor mode unavailable: instance '" + instance.id +
                                  "' has no distractor pool in language '" + language.code() + "'");
        return pool;
    }

    pool.source = DistractorPool::Source::foreign_instances;
    std::size_t others = 0;
    std::vector<corpus::Document> candidates;
    for (const auto& other : corpus.instances) {
        if (other.id == instance.id) continue;
        ++others;
        for (const auto* m : {&other.hop1_doc, &other.hop2_doc}) {
            auto it = m->find(language);
            if (it == m->end()) continue;
            if (it->second.id == hop1_id || it->second.id == hop2_id) continue;
            candidates.push_back(it->second);
        }
    }
    if (others < 2)
        throw ValidationError("irrelevant distractor mode needs at least 2 other instances");
    std::mt19937_64 rng(seed);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    // Without replacement by document id.
    std::vector<std::string> used;
    for (auto& doc : candidates) {
        if (std::find(used.begin(), used.end(), doc.id) != used.end()) continue;
        used.push_back(doc.id);
        pool.documents.push_back(std::move(doc));
    }
    return pool;
}

std::vector<corpus::Document> place(const corpus::Document& hop1, const corpus::Document& hop2,
                                    const DistractorPool& pool, int d) {
    if (d == 0) throw ValidationError("distractor distance d must be nonzero");
    std::size_t k = static_cast<std::size_t>(std::abs(d)) - 1;
    if (pool.documents.size() < k)
        throw ValidationError("distractor pool has " + std::to_string(pool.documents.size()) +
                              " documents, need " + std::to_string(k) + " for d=" +
                              std::to_string(d));
    std::vector<corpus::Document> out;
    out.reserve(k + 2);
    out.push_back(d > 0 ? hop1 : hop2);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pool.documents[i]);
    out.push_back(d > 0 ? hop2 : hop1);
    return out;
}

SweepResult sweep(const corpus::Corpus& corpus, std::span<const SweepEntry> cohort,
                  const gate::ModelHandle& model, std::span<const int> d_values,
                  Relevance relevance, const scoring::CorrectnessPolicy& policy,
                  const prompts::InstructionSet& iset, std::uint64_t seed,
                  std::size_t parallelism, const scoring::NormalizeOptions& normalize) {
    scoring::validate(policy);
    for (int d : d_values)
        if (d == 0) throw ValidationError("sweep d range must exclude 0");

    struct Task {
        std::size_t d_index;
        std::size_t entry_index;
    };
    std::vector<Task> tasks;
    for (std::size_t di = 0; di < d_values.size(); ++di)
        for (std::size_t ei = 0; ei < cohort.size(); ++ei) tasks.push_back({di, ei});

    std::vector<double> f1s(tasks.size(), -1.0);  // -1 marks a failed evaluation
    util::parallel_for(tasks.size(), parallelism, [&](std::size_t t) {
        const auto& entry = cohort[tasks[t].entry_index];
        int d = d_values[tasks[t].d_index];
        const corpus::QAInstance* inst = corpus.find(entry.instance_id);
        if (!inst) return;
        Condition cond = entry.condition;
        cond.strategy = harness::Strategy::standard;
        try {
            // Distractors speak the query language.
            std::uint64_t pool_seed = seed ^ util::fnv1a64(inst->id);
            DistractorPool pool = build_pool(corpus, *inst, relevance, cond.query_lang, pool_seed);
            const auto& hop1 = doc_in(inst->hop1_doc, cond.hop1_lang, inst->id, "hop1_doc");
            const auto& hop2 = doc_in(inst->hop2_doc, cond.hop2_lang, inst->id, "hop2_doc");
            auto context = place(hop1, hop2, pool, d);
            std::string prompt = prompts::build_standard(*inst, cond, context, iset);
            std::string raw = model.generate(prompt).text;
            const auto& cue = iset.for_language(cond.query_lang).answer_cue;
            std::string answer = prompts::extract_answer(raw, cue);
            auto gold_it = inst->gold_answer.find(cond.query_lang);
            if (gold_it == inst->gold_answer.end()) return;
            f1s[t] = scoring::token_f1(answer, gold_it->second, cond.query_lang, normalize).f1;
        } catch (const Error&) {
            // recorded as a failure below
        }
    });

    SweepResult result;
    for (std::size_t di = 0; di < d_values.size(); ++di) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t ei = 0; ei < cohort.size(); ++ei) {
            double f1 = f1s[di * cohort.size() + ei];
            if (f1 < 0.0) {
                ++result.failures;
                continue;
            }
            sum += f1;
            ++n;
        }
        result.rows.push_back({d_values[di], relevance, n ? sum / n : 0.0, n});
    }
    return result;
}

std::string sweep_rows_to_tsv(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "d\trelevance\tf1\tn\n";
    for (const auto& row : rows) {
        out << row.d << '\t' << harness::to_string(row.relevance) << '\t'
            << util::format_fixed(row.mean_f1, 4) << '\t' << row.n << '\n';
    }
    return out.str();
}

std::vector<SweepRow> sweep_rows_from_tsv(const std::string& content) {
    std::vector<SweepRow> rows;
    std::istringstream in(content);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first) {  // header
            first = false;
            continue;
        }
        auto cols = util::split(line, '\t');
        if (cols.size() < 4) continue;
        SweepRow row;
        row.d = std::stoi(cols[0]);
        row.relevance = harness::relevance_from_string(cols[1]);
        row.mean_f1 = std::stod(cols[2]);
        row.n = static_cast<std::size_t>(std::stoul(cols[3]));
        rows.push_back(row);
    }
    return rows;
}

void save_sweep_result(const SweepResult& result, const std::filesystem::path& path) {
    std::string content = "# failures: " + std::to_string(result.failures) + "\n" +
                          sweep_rows_to_tsv(result.rows);
    util::write_file_atomic(path, content);
}

SweepResult load_sweep_result(const std::filesystem::path& path) {
    std::string content = util::read_file(path);
    SweepResult result;
    result.rows = sweep_rows_from_tsv(content);
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        const std::string prefix = "# failures: ";
        if (line.rfind(prefix, 0) == 0) {
            result.failures = static_cast<std::size_t>(std::stoul(line.substr(prefix.size())));
            break;
        }
    }
    return result;
}

}  // namespace mhqa::perturb
