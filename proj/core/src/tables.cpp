#include "mhqa/tables.hpp"

#include "mhqa/error.hpp"
#include "mhqa/util.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace mhqa::report {

namespace {

constexpr const char* kCheck = "✓";  // ✓
constexpr const char* kCross = "✗";  // ✗

std::string header(const std::string& digest, bool partial) {
    std::string out = "# manifest: " + digest + "\n";
    if (partial) out += "# status: PARTIAL\n";
    return out;
}

std::string num(double value) { return util::format_fixed(value, 4); }

using harness::ConditionClass;
using harness::Outcome;

struct ClassRowSpec {
    ConditionClass cls;
    const char* setting;
    const char* hop1;
    const char* hop2;
};

constexpr ClassRowSpec kClassRows[] = {
    {ConditionClass::q_q, "Monolingual", "Q", "Q"},
    {ConditionClass::qbar_q, "Multilingual", "Qbar", "Q"},
    {ConditionClass::q_qbar, "Multilingual", "Q", "Qbar"},
    {ConditionClass::qbar_qbar, "Multilingual", "Qbar", "Qbar"},
};

constexpr ConditionClass kMultilingualClasses[] = {
    ConditionClass::qbar_q,
    ConditionClass::q_qbar,
    ConditionClass::qbar_qbar,
};

}  // namespace

std::string render_table1(const harness::MatrixTable& table, const std::string& digest) {
    bool partial = table.incomplete > 0 || table.query_langs.empty();
    std::ostringstream out;
    out << header(digest, partial);
    out << "setting\thop1\thop2";
    for (const auto& lang : table.query_langs) out << '\t' << lang.code();
    out << "\tavg\n";
    for (const auto& row : kClassRows) {
        out << row.setting << '\t' << row.hop1 << '\t' << row.hop2;
        const auto& cells = table.cells[static_cast<std::size_t>(row.cls)];
        for (const auto& lang : table.query_langs) {
            auto it = cells.find(lang);
            out << '\t' << (it == cells.end() || it->second.n == 0 ? "-" : num(it->second.mean_f1));
        }
        out << '\t' << num(table.row_avg[static_cast<std::size_t>(row.cls)]) << '\n';
    }
    return out.str();
}

namespace {

struct RatioGrid {
    // per query language
    std::map<LanguageTag, double> s1, s2, both, comp;
};

RatioGrid mono_ratios(const std::map<LanguageTag, std::vector<Outcome>>& by_lang) {
    RatioGrid grid;
    for (const auto& [lang, outcomes] : by_lang) {
        auto unf = harness::unfaithfulness_ratio(outcomes);
        grid.s1[lang] = unf.s1.value;
        grid.s2[lang] = unf.s2.value;
        grid.both[lang] = unf.both.value;
        grid.comp[lang] = harness::composition_failure_ratio(outcomes).value;
    }
    return grid;
}

// Average of the per-class ratios over the three multilingual classes, per
// query language; classes with no outcomes for a language are skipped.
RatioGrid multi_ratios(
    const std::map<std::pair<int, LanguageTag>, std::vector<Outcome>>& by_class_lang) {
    std::map<LanguageTag, std::vector<harness::UnfaithfulnessRatios>> unf_parts;
    std::map<LanguageTag, std::vector<harness::RatioResult>> comp_parts;
    for (auto cls : kMultilingualClasses) {
        for (const auto& [key, outcomes] : by_class_lang) {
            if (key.first != static_cast<int>(cls) || outcomes.empty()) continue;
            unf_parts[key.second].push_back(harness::unfaithfulness_ratio(outcomes));
            comp_parts[key.second].push_back(harness::composition_failure_ratio(outcomes));
        }
    }
    RatioGrid grid;
    for (const auto& [lang, parts] : unf_parts) {
        double s1 = 0, s2 = 0, both = 0;
        for (const auto& p : parts) {
            s1 += p.s1.value;
            s2 += p.s2.value;
            both += p.both.value;
        }
        grid.s1[lang] = s1 / parts.size();
        grid.s2[lang] = s2 / parts.size();
        grid.both[lang] = both / parts.size();
    }
    for (const auto& [lang, parts] : comp_parts) {
        double comp = 0;
        for (const auto& p : parts) comp += p.value;
        grid.comp[lang] = comp / parts.size();
    }
    return grid;
}

void ratio_row(std::ostringstream& out, const char* setting, const char* t, const char* s1,
               const char* s2, const std::vector<LanguageTag>& langs,
               const std::map<LanguageTag, double>& values) {
    out << setting << '\t' << t << '\t' << s1 << '\t' << s2;
    for (const auto& lang : langs) {
        auto it = values.find(lang);
        out << '\t' << (it == values.end() ? "-" : num(it->second));
    }
    out << '\n';
}

}  // namespace

std::string render_table3(std::span<const Outcome> outcomes, const std::string& digest) {
    std::map<LanguageTag, std::vector<Outcome>> mono;
    std::map<std::pair<int, LanguageTag>, std::vector<Outcome>> multi;
    std::set<LanguageTag> langs;
    std::size_t incomplete = 0;
    for (const auto& o : outcomes) {
        if (!o.complete) {
            ++incomplete;
            continue;
        }
        langs.insert(o.condition.query_lang);
        auto cls = harness::condition_class(o.condition);
        if (harness::is_monolingual(cls)) {
            mono[o.condition.query_lang].push_back(o);
        } else {
            multi[{static_cast<int>(cls), o.condition.query_lang}].push_back(o);
        }
    }
    std::vector<LanguageTag> lang_list(langs.begin(), langs.end());
    RatioGrid mono_grid = mono_ratios(mono);
    RatioGrid multi_grid = multi_ratios(multi);

    bool partial = incomplete > 0 || outcomes.empty();
    std::ostringstream out;
    out << header(digest, partial);
    out << "setting\ttwo_hop\tsubq1\tsubq2";
    for (const auto& lang : lang_list) out << '\t' << lang.code();
    out << '\n';
    ratio_row(out, "Monolingual", kCheck, kCross, kCheck, lang_list, mono_grid.s1);
    ratio_row(out, "Monolingual", kCheck, kCheck, kCross, lang_list, mono_grid.s2);
    ratio_row(out, "Monolingual", kCheck, kCross, kCross, lang_list, mono_grid.both);
    ratio_row(out, "Multilingual", kCheck, kCross, kCheck, lang_list, multi_grid.s1);
    ratio_row(out, "Multilingual", kCheck, kCheck, kCross, lang_list, multi_grid.s2);
    ratio_row(out, "Multilingual", kCheck, kCross, kCross, lang_list, multi_grid.both);
    ratio_row(out, "Monolingual", kCross, kCheck, kCheck, lang_list, mono_grid.comp);
    ratio_row(out, "Multilingual", kCross, kCheck, kCheck, lang_list, multi_grid.comp);
    return out.str();
}

namespace {

std::string corr_cell(const std::optional<double>& value, bool insufficient, bool negate) {
    if (insufficient) return "insufficient";
    if (!value) return "undef";
    return num(negate ? -*value : *value);
}

}  // namespace

std::string render_table2(std::span<const linglab::CorrelationCell> hop1_cells,
                          std::span<const linglab::CorrelationCell> hop2_cells,
                          const std::string& digest) {
    std::set<LanguageTag> langs;
    std::map<std::pair<std::string, int>, const linglab::CorrelationCell*> by_key;
    for (const auto& c : hop1_cells) {
        langs.insert(c.query_lang);
        by_key[{c.query_lang.code(), 1}] = &c;
    }
    for (const auto& c : hop2_cells) {
        langs.insert(c.query_lang);
        by_key[{c.query_lang.code(), 2}] = &c;
    }
    bool partial = hop1_cells.empty() && hop2_cells.empty();

    std::ostringstream out;
    out << header(digest, partial);
    out << "statistic";
    for (const auto& lang : langs) out << '\t' << lang.code() << ":hop1\t" << lang.code() << ":hop2";
    out << '\n';

    struct RowSpec {
        const char* name;
        bool spearman;
        bool negate;
    };
    // Coefficients against vocabulary overlap, then the distance-signed
    // variants (distance = 1 - overlap flips the sign).
    constexpr RowSpec kRows[] = {
        {"pearson", false, false},
        {"spearman", true, false},
        {"pearson_distance", false, true},
        {"spearman_distance", true, true},
    };
    for (const auto& row : kRows) {
        out << row.name;
        for (const auto& lang : langs) {
            for (int hop : {1, 2}) {
                auto it = by_key.find({lang.code(), hop});
                if (it == by_key.end()) {
                    out << "\t-";
                    continue;
                }
                const auto& cell = *it->second;
                out << '\t'
                    << corr_cell(row.spearman ? cell.spearman : cell.pearson, cell.insufficient,
                                 row.negate);
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string render_fig3(const attribution::CohortSummary& summary, const std::string& digest) {
    bool partial = summary.pairs.empty();
    std::ostringstream out;
    out << header(digest, partial);
    out << "hop1_lang\thop2_lang\tcohort\tmean_hop1_pct\tn\n";
    auto row = [&](const std::string& h1, const std::string& h2, const char* cohort,
                   const attribution::CohortStats& stats) {
        out << h1 << '\t' << h2 << '\t' << cohort << '\t'
            << (stats.present ? num(stats.mean) : "-") << '\t' << stats.n << '\n';
    };
    for (const auto& pair : summary.pairs) {
        row(pair.hop1_lang.code(), pair.hop2_lang.code(), "faithful", pair.faithful);
        row(pair.hop1_lang.code(), pair.hop2_lang.code(), "unfaithful_s1", pair.unfaithful_s1);
    }
    row("all", "all", "faithful", summary.faithful);
    row("all", "all", "unfaithful_s1", summary.unfaithful_s1);
    return out.str();
}

std::string render_fig4(std::span<const perturb::SweepRow> rows, const std::string& digest,
                        std::size_t failures) {
    bool partial = rows.empty() || failures > 0;
    std::ostringstream out;
    out << header(digest, partial);
    out << "d\trelevance\tf1\tn\n";
    for (const auto& row : rows) {
        out << row.d << '\t' << harness::to_string(row.relevance) << '\t' << num(row.mean_f1) << '\t'
            << row.n << '\n';
    }
    return out.str();
}

EmittedFiles emit_tables(const std::filesystem::path& run_dir, const std::string& digest,
                         const std::filesystem::path& matrix_path) {
    EmittedFiles emitted;
    auto outcomes_path = run_dir / "outcomes.jsonl";
    if (!std::filesystem::exists(outcomes_path))
        throw ConfigError("run directory has no outcomes.jsonl: " + run_dir.string());
    auto outcomes = harness::load_outcomes(outcomes_path);

    auto tables_dir = run_dir / "tables";
    auto plots_dir = run_dir / "plots";
    std::filesystem::create_directories(tables_dir);
    std::filesystem::create_directories(plots_dir);

    auto table1 = render_table1(harness::aggregate_matrix(outcomes), digest);
    util::write_file_atomic(tables_dir / "table1.tsv", table1);
    emitted.files.push_back(tables_dir / "table1.tsv");

    auto table3 = render_table3(outcomes, digest);
    util::write_file_atomic(tables_dir / "table3.tsv", table3);
    emitted.files.push_back(tables_dir / "table3.tsv");

    auto attribution_path = run_dir / "attribution.jsonl";
    if (std::filesystem::exists(attribution_path)) {
        auto reports = attribution::load_reports(attribution_path);
        auto summary = attribution::cohort_compare(reports, outcomes);
        util::write_file_atomic(plots_dir / "fig3.tsv", render_fig3(summary, digest));
        emitted.files.push_back(plots_dir / "fig3.tsv");
    }

    auto sweep_path = run_dir / "sweep.tsv";
    if (std::filesystem::exists(sweep_path)) {
        auto result = perturb::load_sweep_result(sweep_path);
        util::write_file_atomic(plots_dir / "fig4.tsv",
                                render_fig4(result.rows, digest, result.failures));
        emitted.files.push_back(plots_dir / "fig4.tsv");
    }

    if (!matrix_path.empty()) {
        auto matrix = linglab::SimilarityMatrix::load(matrix_path);
        std::vector<harness::Outcome> standard;
        for (const auto& o : outcomes) {
            if (o.complete && o.condition.strategy == harness::Strategy::standard)
                standard.push_back(o);
        }
        auto hop1 = linglab::correlate_accuracy(standard, matrix, 1);
        auto hop2 = linglab::correlate_accuracy(standard, matrix, 2);
        util::write_file_atomic(tables_dir / "table2.tsv", render_table2(hop1, hop2, digest));
        emitted.files.push_back(tables_dir / "table2.tsv");
    }
    return emitted;
}

}  // namespace mhqa::report
