#pragma once

#include "mhqa/attribution.hpp"
#include "mhqa/harness.hpp"
#include "mhqa/linglab.hpp"
#include "mhqa/perturb.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mhqa::report {

// Tab-separated exhibits mirroring the paper's tables and figure data. Every
// file opens with '# manifest: <digest>' and, when the run is incomplete,
// '# status: PARTIAL'. Numbers use 4 decimal places, half-even rounding.

// Condition-class x query-language mean F1 grid with the Avg. column.
std::string render_table1(const harness::MatrixTable& table, const std::string& digest);

// Truth-table ratio grid: three unfaithfulness rows plus the composition row,
// per Monolingual/Multilingual setting and query language. The multilingual
// row averages the per-class ratios of the three multilingual classes.
std::string render_table3(std::span<const harness::Outcome> outcomes, const std::string& digest);

// Correlation grid: statistic rows (vs. overlap, then the distance-signed
// variants) x (query language, hop) columns.
std::string render_table2(std::span<const linglab::CorrelationCell> hop1_cells,
                          std::span<const linglab::CorrelationCell> hop2_cells,
                          const std::string& digest);

// Attribution cohort bars (Fig-3 data): per language pair and cohort.
std::string render_fig3(const attribution::CohortSummary& summary, const std::string& digest);

// Distractor curves (Fig-4 data): (d, relevance, F1, n) rows.
std::string render_fig4(std::span<const perturb::SweepRow> rows, const std::string& digest,
                        std::size_t failures);

struct EmittedFiles {
    std::vector<std::filesystem::path> files;
};

// Writes whatever exhibits the run directory has inputs for: table1/table3
// from outcomes.jsonl, fig3 from attribution.jsonl, fig4 from sweep.tsv,
// table2 from a similarity matrix when provided.
EmittedFiles emit_tables(const std::filesystem::path& run_dir, const std::string& digest,
                         const std::filesystem::path& matrix_path = {});

}  // namespace mhqa::report
