#include "mhqa/cli.hpp"

#include "mhqa/attribution.hpp"
#include "mhqa/config.hpp"
#include "mhqa/corpus.hpp"
#include "mhqa/error.hpp"
#include "mhqa/filter.hpp"
#include "mhqa/harness.hpp"
#include "mhqa/http_endpoint.hpp"
#include "mhqa/linglab.hpp"
#include "mhqa/manifest.hpp"
#include "mhqa/mock.hpp"
#include "mhqa/perturb.hpp"
#include "mhqa/tables.hpp"
#include "mhqa/translate.hpp"
#include "mhqa/util.hpp"
#include "mhqa/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace mhqa::report {

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_dry_run = true) {
    cmd->add_option("--config", args.config_path, "key=value run configuration file");
    cmd->add_option("--set", args.overrides, "override a config key (key=value, repeatable)");
    if (with_dry_run)
        cmd->add_flag("--dry-run", args.dry_run,
                      "print the planned call count and request budget, no network calls");
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) config = load_config(args.config_path);
    apply_overrides(config, args.overrides);
    return config;
}

gate::ModelHandle build_model(const RunConfig& config) {
    gate::GatewayOptions options;
    options.answer_params = {config.max_new_tokens, 0.0, config.stop};
    options.cot_params = {config.cot_max_new_tokens, 0.0, config.stop};
    options.requests_per_second = config.requests_per_second;
    options.retry = {config.retry_max_attempts,
                     std::chrono::milliseconds(config.retry_base_backoff_ms)};
    options.max_in_flight = static_cast<std::size_t>(std::max(1, config.max_in_flight));
    options.cache_dir = config.cache_dir;
    options.jitter_seed = config.seed;
    options.log = [](const std::string& msg) { std::cerr << "[gateway] " << msg << "\n"; };

    if (config.model_kind == "mock") {
        gate::MockSpec spec;
        if (!config.model_mock_table.empty()) spec = gate::load_mock_spec(config.model_mock_table);
        if (config.model_id != "mock") spec.model_id = config.model_id;
        return gate::make_mock(std::move(spec), std::move(options));
    }
    if (config.model_endpoint.empty())
        throw ConfigError("model.endpoint must be set for model.kind = openai");
    gate::HttpEndpointConfig http;
    http.base_url = config.model_endpoint;
    http.model_id = config.model_id;
    http.auth_env = config.model_auth_env;
    http.timeout = std::chrono::milliseconds(config.timeout_ms);
    http.supports_scoring = config.supports_scoring;
    return gate::ModelHandle(std::make_shared<gate::HttpEndpoint>(std::move(http)),
                             std::move(options));
}

prompts::InstructionSet build_templates(const RunConfig& config) {
    if (config.templates_dir.empty()) return prompts::InstructionSet::builtin();
    return prompts::InstructionSet::load_dir(config.templates_dir);
}

std::vector<LanguageTag> languages_for(const RunConfig& config, const corpus::Corpus& corpus) {
    if (config.languages.empty())
        return std::vector<LanguageTag>(corpus.languages.begin(), corpus.languages.end());
    for (const auto& lang : config.languages) {
        if (!corpus.languages.count(lang))
            throw ConfigError("language '" + lang.code() + "' is not registered in the corpus");
    }
    return config.languages;
}

harness::EvalOptions eval_options(const RunConfig& config, const corpus::Corpus& corpus) {
    harness::EvalOptions options;
    options.subq_context = config.subq_context;
    options.subq_eval_bridge = config.subq_eval_bridge;
    options.bridge_marker = corpus.bridge_marker;
    options.normalize = {config.strip_en_articles};
    options.full_corpus = &corpus;
    return options;
}

std::vector<harness::Condition> build_conditions(const RunConfig& config,
                                                 const std::vector<LanguageTag>& languages) {
    std::vector<harness::Condition> conditions;
    for (auto strategy : config.strategies) {
        auto grid = harness::make_grid(languages, strategy, config.grid);
        conditions.insert(conditions.end(), grid.begin(), grid.end());
    }
    return conditions;
}

attribution::AttributionOptions attribution_options(const RunConfig& config,
                                                    const linglab::SubwordTokenizer* tokenizer) {
    attribution::AttributionOptions options;
    options.unit = config.attribution_unit;
    options.mode = config.attribution_erasure;
    options.mask_token = config.attribution_mask_token;
    options.log_space = config.attribution_log_space;
    options.tokenizer = tokenizer;
    return options;
}

// ---- subcommands ----

int cmd_validate(const CommonArgs& common, const std::string& corpus_path) {
    resolve_config(common);  // surface config errors even where unused
    auto corpus = corpus::load_corpus(corpus_path);
    std::size_t with_pool = 0;
    for (const auto& inst : corpus.instances)
        if (!inst.distractor_pool.empty()) ++with_pool;
    std::cout << "corpus ok: " << corpus.instances.size() << " instances, "
              << corpus.languages.size() << " languages (";
    bool first = true;
    for (const auto& lang : corpus.languages) {
        if (!first) std::cout << ", ";
        std::cout << lang.code();
        first = false;
    }
    std::cout << "), " << with_pool << " instances with distractor pools\n";
    std::cout << "digest: " << corpus::digest(corpus) << "\n";
    return 0;
}

std::size_t planned_translation_calls(const corpus::Corpus& corpus, const LanguageTag& source,
                                      const LangSet& targets) {
    std::size_t calls = 0;
    for (const auto& inst : corpus.instances) {
        for (const auto& target : targets) {
            if (target == source) continue;
            for (const auto* m : {&inst.two_hop_question, &inst.subq1, &inst.subq2_template,
                                  &inst.bridge_entity, &inst.gold_answer}) {
                if (!m->count(target)) ++calls;
            }
            for (const auto* dm : {&inst.hop1_doc, &inst.hop2_doc}) {
                if (!dm->count(target)) {
                    calls += 1;  // body
                    if (!dm->at(source).title.empty()) ++calls;
                }
            }
            for (const auto& entry : inst.distractor_pool) {
                if (!entry.count(target)) {
                    calls += 1;
                    if (entry.count(source) && !entry.at(source).title.empty()) ++calls;
                }
            }
        }
    }
    return calls;
}

int cmd_translate(const CommonArgs& common, const std::string& corpus_path, const std::string& out,
                  const std::string& source, const std::string& targets_csv) {
    RunConfig config = resolve_config(common);
    auto corpus = corpus::load_corpus(corpus_path);
    LanguageTag source_lang(source);
    LangSet targets;
    for (const auto& code : util::split(targets_csv, ','))
        if (!util::trim(code).empty()) targets.insert(LanguageTag(util::trim(code)));

    if (common.dry_run) {
        std::size_t calls = planned_translation_calls(corpus, source_lang, targets);
        std::cout << calls << " generation calls planned\n";
        std::cout << "estimated request budget: " << calls << " requests (before cache hits)\n";
        return 0;
    }

    auto model = build_model(config);
    auto report = corpus::translate_corpus(corpus, source_lang, targets, model, config.parallelism);
    corpus::save_corpus(report.corpus, out);
    std::cout << "translated " << report.translated_cells << " cells; "
              << report.corpus.instances.size() << " instances kept, " << report.excluded.size()
              << " excluded\n";
    for (const auto& issue : report.issues) {
        std::cerr << "excluded " << issue.instance_id << ": " << issue.field << " (" << issue.language
                  << "): " << issue.detail << "\n";
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_filter(const CommonArgs& common, const std::string& corpus_path, const std::string& kept,
               const std::string& excluded, const std::string& log_path) {
    RunConfig config = resolve_config(common);
    auto corpus = corpus::load_corpus(corpus_path);

    if (common.dry_run) {
        std::size_t calls = corpus.instances.size() * 3;  // three ablations per instance
        std::cout << calls << " generation calls planned\n";
        std::cout << "estimated request budget: " << calls << " requests (before cache hits)\n";
        return 0;
    }

    auto model = build_model(config);
    auto iset = build_templates(config);
    auto result = corpus::filter_contaminated(corpus, model, config.policy, iset,
                                               config.parallelism, {config.strip_en_articles});
    corpus::save_corpus(result.kept, kept);
    corpus::save_corpus(result.excluded, excluded);
    if (!log_path.empty()) corpus::save_filter_log(result.log, log_path);
    std::cout << "kept " << result.kept.instances.size() << " / excluded "
              << result.excluded.instances.size() << " of " << corpus.instances.size()
              << " instances\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& corpus_path) {
    RunConfig config = resolve_config(common);
    auto corpus = corpus::load_corpus(corpus_path);
    auto languages = languages_for(config, corpus);
    auto conditions = build_conditions(config, languages);

    if (common.dry_run) {
        std::size_t calls = harness::planned_generation_calls(corpus.instances.size(), conditions);
        std::cout << calls << " generation calls planned\n";
        std::cout << "estimated request budget: " << calls << " requests (before cache hits)\n";
        return 0;
    }

    auto model = build_model(config);
    auto iset = build_templates(config);
    iset.validate_for(LangSet(languages.begin(), languages.end()));

    auto manifest = make_manifest(config, corpus::digest(corpus), conditions);
    auto run_dir = run_dir_for(config.runs_dir, manifest);
    std::filesystem::create_directories(run_dir);

    auto outcomes = harness::run_matrix(corpus, conditions, model, config.policy, iset,
                                        eval_options(config, corpus), config.parallelism);
    harness::save_outcomes(outcomes, run_dir / "outcomes.jsonl");
    save_manifest(manifest, run_dir / "manifest.json");

    std::size_t incomplete = 0;
    for (const auto& o : outcomes)
        if (!o.complete) ++incomplete;
    auto stats = model.stats();
    std::cout << "run " << manifest.short_digest() << ": " << outcomes.size() << " outcomes ("
              << incomplete << " incomplete), " << stats.network_calls << " network calls, "
              << stats.cache_hits << " cache hits\n";
    std::cout << "wrote " << (run_dir / "outcomes.jsonl").string() << "\n";
    return 0;
}

struct CohortEntry {
    const harness::Outcome* outcome;
};

std::vector<CohortEntry> attribution_cohort(const std::vector<harness::Outcome>& outcomes) {
    std::vector<CohortEntry> cohort;
    for (const auto& o : outcomes) {
        if (!o.complete || o.condition.strategy != harness::Strategy::standard) continue;
        auto mode = harness::classify(o);
        if (mode == harness::FailureMode::faithful || mode == harness::FailureMode::unfaithful_s1)
            cohort.push_back({&o});
    }
    return cohort;
}

int cmd_attribute(const CommonArgs& common, const std::string& corpus_path,
                  const std::string& run_dir_arg) {
    RunConfig config = resolve_config(common);
    auto corpus = corpus::load_corpus(corpus_path);
    std::filesystem::path run_dir(run_dir_arg);
    auto manifest = load_manifest(run_dir / "manifest.json");
    auto outcomes = harness::load_outcomes(run_dir / "outcomes.jsonl");
    auto cohort = attribution_cohort(outcomes);

    std::unique_ptr<linglab::SubwordTokenizer> tokenizer;
    if (config.attribution_unit == attribution::ErasureUnit::token) {
        if (config.attribution_tokenizer.empty())
            throw ConfigError("attribution.unit=token requires attribution.tokenizer");
        tokenizer = linglab::make_tokenizer(config.attribution_tokenizer);
    }
    auto options = attribution_options(config, tokenizer.get());

    if (common.dry_run) {
        std::size_t calls = 0;
        for (const auto& entry : cohort) {
            const auto* inst = corpus.find(entry.outcome->instance_id);
            if (!inst) continue;
            const auto& c = entry.outcome->condition;
            auto h1 = inst->hop1_doc.find(c.hop1_lang);
            auto h2 = inst->hop2_doc.find(c.hop2_lang);
            if (h1 == inst->hop1_doc.end() || h2 == inst->hop2_doc.end()) continue;
            calls += 1 +
                     attribution::segment_text(h1->second.body, options.unit, c.hop1_lang,
                                               options.tokenizer)
                         .size() +
                     attribution::segment_text(h2->second.body, options.unit, c.hop2_lang,
                                               options.tokenizer)
                         .size();
        }
        std::cout << calls << " scoring calls planned\n";
        std::cout << "estimated request budget: " << calls << " requests (before cache hits)\n";
        return 0;
    }

    auto model = build_model(config);
    model.require_scoring();
    auto iset = build_templates(config);

    std::vector<attribution::AttributionReport> reports;
    std::size_t degenerate = 0, partial = 0;
    for (const auto& entry : cohort) {
        const auto* inst = corpus.find(entry.outcome->instance_id);
        if (!inst) continue;
        auto [cmap, report] = attribution::attribute(*inst, entry.outcome->condition, model, iset,
                                                     options);
        if (report.degenerate) ++degenerate;
        if (report.partial) ++partial;
        reports.push_back(std::move(report));
    }
    attribution::save_reports(reports, run_dir / "attribution.jsonl");
    std::cout << reports.size() << " attribution reports (" << degenerate << " degenerate, "
              << partial << " partial)\n";
    std::cout << "wrote " << (run_dir / "attribution.jsonl").string() << "\n";
    return 0;
}

std::vector<perturb::SweepEntry> sweep_cohort(const std::vector<harness::Outcome>& outcomes,
                                              const std::string& mode) {
    std::vector<perturb::SweepEntry> cohort;
    for (const auto& o : outcomes) {
        if (!o.complete || o.condition.strategy != harness::Strategy::standard) continue;
        if (mode == "unfaithful_s1") {
            if (harness::is_monolingual(harness::condition_class(o.condition))) continue;
            if (harness::classify(o) != harness::FailureMode::unfaithful_s1) continue;
        }
        cohort.push_back({o.instance_id, o.condition});
    }
    return cohort;
}

int cmd_sweep(const CommonArgs& common, const std::string& corpus_path,
              const std::string& run_dir_arg) {
    RunConfig config = resolve_config(common);
    auto corpus = corpus::load_corpus(corpus_path);
    std::filesystem::path run_dir(run_dir_arg);
    auto outcomes = harness::load_outcomes(run_dir / "outcomes.jsonl");
    auto cohort = sweep_cohort(outcomes, config.sweep_cohort);

    std::vector<int> d_values;
    for (int d = config.sweep_d_min; d <= config.sweep_d_max; ++d)
        if (d != 0) d_values.push_back(d);
    if (d_values.empty()) throw ConfigError("sweep d range is empty");

    if (common.dry_run) {
        std::size_t calls = cohort.size() * d_values.size() * config.sweep_relevance.size();
        std::cout << calls << " generation calls planned\n";
        std::cout << "estimated request budget: " << calls << " requests (before cache hits)\n";
        return 0;
    }

    auto model = build_model(config);
    auto iset = build_templates(config);

    perturb::SweepResult combined;
    for (auto relevance : config.sweep_relevance) {
        auto result = perturb::sweep(corpus, cohort, model, d_values, relevance, config.policy,
                                     iset, config.seed, config.parallelism,
                                     {config.strip_en_articles});
        combined.failures += result.failures;
        combined.rows.insert(combined.rows.end(), result.rows.begin(), result.rows.end());
    }
    perturb::save_sweep_result(combined, run_dir / "sweep.tsv");
    std::cout << combined.rows.size() << " sweep rows over " << cohort.size() << " cohort cases ("
              << combined.failures << " failures)\n";
    std::cout << "wrote " << (run_dir / "sweep.tsv").string() << "\n";
    return 0;
}

int cmd_lingsim(const CommonArgs& common, const std::string& parallel_dir, const std::string& out,
                std::string corpus_id, const std::string& tokenizer_flag) {
    RunConfig config = resolve_config(common);
    std::string tokenizer_spec =
        tokenizer_flag.empty() ? config.lingsim_tokenizer : tokenizer_flag;
    auto tokenizer = linglab::make_tokenizer(tokenizer_spec);

    std::filesystem::path dir(parallel_dir);
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("parallel corpus directory does not exist: " + parallel_dir);
    if (corpus_id.empty()) corpus_id = dir.filename().string();

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.size() < 2)
        throw ConfigError("need at least two <lang>.txt files in " + parallel_dir);

    std::vector<linglab::VocabProfile> profiles;
    for (const auto& file : files) {
        LanguageTag tag(file.stem().string());
        linglab::VocabProfile probe;
        probe.language = tag;
        probe.tokenizer_id = tokenizer->id();
        probe.corpus_id = corpus_id;
        auto cache_path = linglab::profile_cache_path(config.cache_dir, probe);
        if (std::filesystem::exists(cache_path)) {
            profiles.push_back(linglab::load_profile(cache_path));
            continue;
        }
        auto lines = util::read_lines(file);
        auto profile = linglab::build_profile(lines, tag, *tokenizer, corpus_id);
        linglab::save_profile(profile, cache_path);
        profiles.push_back(std::move(profile));
    }

    auto matrix = linglab::SimilarityMatrix::from_profiles(profiles);
    matrix.save(out);
    std::cout << "similarity matrix over " << profiles.size() << " languages (tokenizer "
              << tokenizer->id() << ")\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_correlate(const CommonArgs& common, const std::string& run_dir_arg,
                  const std::string& matrix_path) {
    resolve_config(common);
    std::filesystem::path run_dir(run_dir_arg);
    auto manifest = load_manifest(run_dir / "manifest.json");
    auto outcomes = harness::load_outcomes(run_dir / "outcomes.jsonl");
    auto matrix = linglab::SimilarityMatrix::load(matrix_path);

    std::vector<harness::Outcome> standard;
    for (const auto& o : outcomes) {
        if (o.complete && o.condition.strategy == harness::Strategy::standard) standard.push_back(o);
    }
    auto hop1 = linglab::correlate_accuracy(standard, matrix, 1);
    auto hop2 = linglab::correlate_accuracy(standard, matrix, 2);
    std::filesystem::create_directories(run_dir / "tables");
    auto path = run_dir / "tables" / "table2.tsv";
    util::write_file_atomic(path, render_table2(hop1, hop2, manifest.digest));
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_report(const CommonArgs& common, const std::string& run_dir_arg,
               const std::string& matrix_path) {
    resolve_config(common);
    std::filesystem::path run_dir(run_dir_arg);
    auto manifest = load_manifest(run_dir / "manifest.json");
    auto emitted = emit_tables(run_dir, manifest.digest, std::filesystem::path(matrix_path));
    for (const auto& file : emitted.files) std::cout << "wrote " << file.string() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"mhqa: multilingual two-hop QA evaluation harness"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    int exit_code = 0;

    // validate
    CommonArgs v_common;
    std::string v_corpus;
    auto* validate = app.add_subcommand("validate", "validate a corpus file");
    add_common(validate, v_common, false);
    validate->add_option("--corpus", v_corpus, "corpus file (jsonl)")->required();
    validate->callback([&] { exit_code = cmd_validate(v_common, v_corpus); });

    // translate
    CommonArgs t_common;
    std::string t_corpus, t_out, t_source = "en", t_targets;
    auto* translate = app.add_subcommand("translate", "add language cells via a translation model");
    add_common(translate, t_common);
    translate->add_option("--corpus", t_corpus, "input corpus")->required();
    translate->add_option("--out", t_out, "output corpus")->required();
    translate->add_option("--source", t_source, "source language (default en)");
    translate->add_option("--targets", t_targets, "comma-separated target languages")->required();
    translate->callback(
        [&] { exit_code = cmd_translate(t_common, t_corpus, t_out, t_source, t_targets); });

    // filter
    CommonArgs f_common;
    std::string f_corpus, f_kept, f_excluded, f_log;
    auto* filter = app.add_subcommand("filter", "contamination filter via ablated contexts");
    add_common(filter, f_common);
    filter->add_option("--corpus", f_corpus, "input corpus")->required();
    filter->add_option("--kept", f_kept, "output corpus of kept instances")->required();
    filter->add_option("--excluded", f_excluded, "output corpus of excluded instances")->required();
    filter->add_option("--log", f_log, "per-ablation verdict log (jsonl)");
    filter->callback(
        [&] { exit_code = cmd_filter(f_common, f_corpus, f_kept, f_excluded, f_log); });

    // evaluate
    CommonArgs e_common;
    std::string e_corpus;
    auto* evaluate = app.add_subcommand("evaluate", "run the condition matrix");
    add_common(evaluate, e_common);
    evaluate->add_option("--corpus", e_corpus, "corpus file")->required();
    evaluate->callback([&] { exit_code = cmd_evaluate(e_common, e_corpus); });

    // attribute
    CommonArgs a_common;
    std::string a_corpus, a_run;
    auto* attribute = app.add_subcommand("attribute", "input-erasure context attribution");
    add_common(attribute, a_common);
    attribute->add_option("--corpus", a_corpus, "corpus file")->required();
    attribute->add_option("--run", a_run, "run directory from evaluate")->required();
    attribute->callback([&] { exit_code = cmd_attribute(a_common, a_corpus, a_run); });

    // sweep
    CommonArgs s_common;
    std::string s_corpus, s_run;
    auto* sweep = app.add_subcommand("sweep", "distractor distance sweep");
    add_common(sweep, s_common);
    sweep->add_option("--corpus", s_corpus, "corpus file")->required();
    sweep->add_option("--run", s_run, "run directory from evaluate")->required();
    sweep->callback([&] { exit_code = cmd_sweep(s_common, s_corpus, s_run); });

    // lingsim
    CommonArgs l_common;
    std::string l_parallel, l_out, l_corpus_id, l_tokenizer;
    auto* lingsim = app.add_subcommand("lingsim", "subword-vocabulary similarity matrix");
    add_common(lingsim, l_common, false);
    lingsim->add_option("--parallel", l_parallel, "directory of aligned <lang>.txt files")
        ->required();
    lingsim->add_option("--out", l_out, "output matrix file (json)")->required();
    lingsim->add_option("--corpus-id", l_corpus_id, "identifier of the parallel corpus slice");
    lingsim->add_option("--tokenizer", l_tokenizer, "char | whitespace | vocab:<path>");
    lingsim->callback(
        [&] { exit_code = cmd_lingsim(l_common, l_parallel, l_out, l_corpus_id, l_tokenizer); });

    // correlate
    CommonArgs c_common;
    std::string c_run, c_matrix;
    auto* correlate = app.add_subcommand("correlate", "accuracy vs. linguistic similarity");
    add_common(correlate, c_common, false);
    correlate->add_option("--run", c_run, "run directory from evaluate")->required();
    correlate->add_option("--matrix", c_matrix, "similarity matrix from lingsim")->required();
    correlate->callback([&] { exit_code = cmd_correlate(c_common, c_run, c_matrix); });

    // report
    CommonArgs r_common;
    std::string r_run, r_matrix;
    auto* report = app.add_subcommand("report", "emit all tables and plot data for a run");
    add_common(report, r_common, false);
    report->add_option("--run", r_run, "run directory from evaluate")->required();
    report->add_option("--matrix", r_matrix, "similarity matrix for the correlation table");
    report->callback([&] { exit_code = cmd_report(r_common, r_run, r_matrix); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}

}  // namespace mhqa::report
