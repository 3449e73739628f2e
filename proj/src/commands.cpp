#include "flowpick/commands.hpp"

#include <memory>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "flowpick/analysis.hpp"
#include "flowpick/config.hpp"
#include "flowpick/corpus_io.hpp"
#include "flowpick/http_clients.hpp"
#include "flowpick/io.hpp"
#include "flowpick/pipeline.hpp"
#include "flowpick/prompt_slots.hpp"

namespace flowpick {

ExitCode exit_code_for(Errc code) noexcept {
    switch (code) {
        case Errc::Config: return kExitConfig;
        case Errc::ExecutorUnavailable:
        case Errc::ScorerUnavailable:
        case Errc::LlmUnavailable:
        case Errc::Timeout: return kExitService;
        default: return kExitData;
    }
}

namespace {

namespace fs = std::filesystem;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

struct Env {
    PipelineConfig cfg;
    std::ostream& out;
    std::ostream& err;
};

PipelineConfig load_with_overrides(const Globals& g) {
    if (g.config_path.empty()) throw Error(Errc::Config, "--config is required for this command");
    PipelineConfig cfg;
    try {
        cfg = load_config(g.config_path);
    } catch (const Error& e) {
        if (e.code() == Errc::Io) throw Error(Errc::Config, e.what(), e.subject());
        throw;
    }
    if (g.seed) cfg.seed = *g.seed;
    if (g.workers) {
        if (*g.workers < 1) throw Error(Errc::Config, "--workers must be at least 1");
        cfg.workers = *g.workers;
    }
    return cfg;
}

ComponentRegistry make_registry(const PipelineConfig& cfg) {
    if (cfg.paths.registry.empty()) return register_defaults();
    return load_registry_files(cfg.resolve(cfg.paths.registry).string(), cfg.resolve(cfg.paths.slot_rules).string());
}

std::chrono::milliseconds seconds(double s) { return std::chrono::milliseconds(static_cast<long long>(s * 1000)); }

std::unique_ptr<ExecutorClient> make_executor(const PipelineConfig& cfg) {
    const auto& e = cfg.executor;
    if (e.endpoint.mock) {
        MockExecutor::Options o;
        o.available_models = e.available_models;
        o.fail_pairs = e.fail_pairs;
        return std::make_unique<MockExecutor>(o);
    }
    HttpExecutor::Options o;
    o.base_url = e.endpoint.url;
    o.auth_token = e.endpoint.secret;
    o.image_dir = cfg.resolve(e.image_dir);
    o.timeout = seconds(e.timeout_s);
    return std::make_unique<HttpExecutor>(o);
}

std::unique_ptr<ScorerClient> make_scorer(const ScorerConfig& s) {
    if (s.endpoint.mock) return std::make_unique<SyntheticScorer>(s.name);
    return std::make_unique<HttpScorer>(s.name, s.endpoint.url);
}

std::unique_ptr<LlmClient> make_llm(const PipelineConfig& cfg, const Corpus& corpus) {
    if (cfg.llm.mock) return std::make_unique<MockLlm>(corpus, cfg.seed);
    return std::make_unique<HttpLlm>(cfg.llm.url, cfg.llm.secret);
}

/// Keeps the LLM behind an LLM labeler alive alongside it.
struct LabelerHandle {
    std::unique_ptr<LlmClient> llm;
    std::unique_ptr<LabelerClient> labeler;
};

LabelerHandle make_labeler(const PipelineConfig& cfg) {
    LabelerHandle h;
    if (cfg.labeler.mock) {
        h.labeler = std::make_unique<KeywordLabeler>();
    } else {
        h.llm = std::make_unique<HttpLlm>(cfg.labeler.url, cfg.labeler.secret);
        h.labeler = std::make_unique<LlmLabeler>(*h.llm);
    }
    return h;
}

Corpus load_work_corpus(const PipelineConfig& cfg) {
    const auto dir = cfg.work("corpus");
    if (!fs::exists(dir / "manifest.jsonl")) {
        throw Error(Errc::InvalidArgument, "no corpus at " + dir.string() + "; run `augment` first", dir.string());
    }
    return load_corpus(dir);
}

std::vector<LabelAssignment> load_assignments_if_any(const PipelineConfig& cfg) {
    const auto path = cfg.work("labels.jsonl");
    return fs::exists(path) ? load_assignments(path) : std::vector<LabelAssignment>{};
}

ScoreTable load_table(const PipelineConfig& cfg) {
    const auto path = cfg.work("table.json");
    if (!fs::exists(path)) throw Error(Errc::InvalidArgument, "no score table; run `table` first", path.string());
    try {
        return ScoreTable::from_json(Json::parse(read_text_file(path)));
    } catch (const Json::exception& e) {
        throw Error(Errc::InvalidArgument, "bad score table " + path.string() + ": " + e.what(), path.string());
    }
}

void print_projection(const PipelineConfig& cfg, std::size_t prompts, std::size_t flows, std::ostream& out) {
    out << "projected triplets: " << prompts << " prompts x " << flows << " flows = " << prompts * flows << "\n";
    const auto& s = cfg.scale;
    out << "reference scale: " << s.prompts << " prompts x " << s.flows << " flows = " << s.prompts * s.flows
        << " triplets; filtered context " << s.flows << " - " << s.discarded << " = "
        << (s.flows >= s.discarded ? s.flows - s.discarded : 0) << " rows\n";
}

// ---------------------------------------------------------------------------

int cmd_validate(const Globals& g, const std::vector<std::string>& inputs, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> files;
    std::optional<PipelineConfig> cfg;
    std::vector<std::string> roots = inputs;
    if (roots.empty()) {
        cfg = load_with_overrides(g);
        roots.push_back(cfg->resolve(cfg->paths.templates).string());
    }
    for (const auto& r : roots) {
        if (fs::is_directory(r)) {
            for (const auto& t : list_template_files(r)) files.push_back(t.path);
        } else {
            files.emplace_back(r);
        }
    }
    if (files.empty()) {
        err << "no template files found\n";
        return kExitData;
    }
    std::size_t bad = 0;
    for (const auto& f : files) {
        try {
            auto graph = parse_flow(read_text_file(f));
            auto slots = find_prompt_slots(graph);
            out << "OK " << f.string() << " (" << graph.size() << " nodes, " << graph.edge_count() << " links, "
                << slots.positive.size() << " positive slots)\n";
        } catch (const Error& e) {
            ++bad;
            out << "FAIL " << f.string() << ": " << e.what() << "\n";
        }
    }
    out << files.size() - bad << "/" << files.size() << " valid\n";
    if (cfg) {
        const auto prompts = load_prompts(cfg->resolve(cfg->paths.prompts)).size();
        const auto flows = files.size() * static_cast<std::size_t>(1 + cfg->augment.mutations_per_template);
        out << "flow budget: " << files.size() << " templates x (1 + " << cfg->augment.mutations_per_template
            << " variants) <= " << flows << " flows\n";
        print_projection(*cfg, prompts, flows, out);
    }
    return bad ? kExitData : kExitOk;
}

int cmd_augment(Env& env) {
    const auto& cfg = env.cfg;
    AugmentationPlan plan;
    plan.templates = load_template_dir(cfg.resolve(cfg.paths.templates));
    plan.mutations_per_template = cfg.augment.mutations_per_template;
    plan.chain_length = cfg.augment.chain_length;
    plan.mutation_mix = cfg.augment.mix;
    plan.seed = cfg.seed;
    plan.dedup = cfg.augment.dedup;
    const auto registry = make_registry(cfg);
    registry.validate();
    const auto corpus = expand_corpus(plan, registry);
    const auto dir = cfg.work("corpus");
    fs::remove_all(dir);
    write_corpus(dir, corpus);
    env.out << "augmented " << plan.templates.size() << " templates into " << corpus.size() << " flows at "
            << dir.string() << "\n";
    return kExitOk;
}

int cmd_score(Env& env) {
    const auto& cfg = env.cfg;
    const auto corpus = load_work_corpus(cfg);
    const auto prompts = load_prompts(cfg.resolve(cfg.paths.prompts));
    auto executor = make_executor(cfg);
    std::vector<std::unique_ptr<ScorerClient>> owned;
    std::vector<ScorerClient*> scorers;
    for (const auto& s : cfg.scorers) {
        owned.push_back(make_scorer(s));
        scorers.push_back(owned.back().get());
    }
    RunOptions options;
    options.seed = cfg.seed;
    options.workers = cfg.workers;
    options.negative_default = cfg.selection.negative_default;
    options.batch_size = cfg.run.batch_size;
    if (!cfg.run.fixed_timestamp.empty()) options.clock = [ts = cfg.run.fixed_timestamp] { return ts; };

    print_projection(cfg, prompts.size(), corpus.size(), env.out);
    const TripletStore store(cfg.work("triplets.jsonl"));
    auto report = run_matrix(prompts, corpus, *executor, scorers, cfg.ensemble, store, options);
    env.out << "requested " << report.requested << ", skipped " << report.skipped << ", completed "
            << report.completed << ", failed " << report.failures.size() << "\n";
    if (report.fitted_standardization) {
        env.out << "fitted standardization:";
        for (const auto& [name, s] : report.config.stats) env.out << " " << name << "(" << s.mean << ", " << s.std << ")";
        env.out << "\n";
    }
    bool service = false;
    for (const auto& f : report.failures) {
        env.err << "FAIL " << f.prompt_id << " " << f.flow_id.str() << ": " << errc_name(f.code) << ": " << f.reason
                << "\n";
        service = service || exit_code_for(f.code) == kExitService;
    }
    if (report.failures.empty()) return kExitOk;
    return service ? kExitService : kExitData;
}

int cmd_table(Env& env) {
    const auto& cfg = env.cfg;
    const auto triplets = TripletStore(cfg.work("triplets.jsonl")).load();
    if (triplets.empty()) throw Error(Errc::EmptyDataset, "triplet store is empty; run `score` first");
    const auto prompts = load_prompts(cfg.resolve(cfg.paths.prompts));
    const LabelVocabulary vocab(cfg.labels.vocabulary);
    auto labeler = make_labeler(cfg);

    auto assignments = load_assignments_if_any(cfg);
    std::set<std::string> have;
    for (const auto& a : assignments) have.insert(a.prompt_id);
    std::size_t discarded = 0;
    for (const auto& p : prompts) {
        if (have.count(p.prompt_id)) continue;
        try {
            assignments.push_back(assign_labels(p, *labeler.labeler, vocab, cfg.labels.max_labels));
        } catch (const Error& e) {
            if (e.code() != Errc::NoLabelsAssigned) throw;
            ++discarded;
            env.err << "discarded prompt " << p.prompt_id << ": no labels\n";
        }
    }
    save_assignments(cfg.work("labels.jsonl"), assignments);
    const auto stats = label_statistics(assignments, discarded);
    env.out << "labels per prompt: " << stats.mean_labels << " +/- " << stats.std_labels << " (max " << stats.max_labels
            << "), discarded " << stats.discarded << " (" << stats.discard_rate * 100.0 << "%)\n";

    auto table = median_filter(build_table(triplets, assignments, vocab.labels()));
    const auto context = render_context(table, cfg.selection.precision);
    write_text_file(cfg.work("table.json"), table.to_json().dump(1) + "\n");
    write_text_file(cfg.work("context.txt"), context);
    const auto kept = table.kept_count();
    env.out << "flows " << table.rows() << ", kept " << kept << ", discarded " << table.rows() - kept << " ("
            << 100.0 * static_cast<double>(table.rows() - kept) / static_cast<double>(table.rows()) << "%)\n";
    env.out << "context: " << context.size() << " chars, ~" << estimate_tokens(context) << " tokens\n";
    print_projection(cfg, prompts.size(), table.rows(), env.out);
    return kExitOk;
}

struct SelectArgs {
    std::string method = "fallback";
    std::string prompt;
    std::string prompts_path;
    bool batch = false;
    std::optional<double> target;
    std::string out_path;
};

int cmd_select(Env& env, const SelectArgs& args) {
    const auto& cfg = env.cfg;
    if (args.method != "ic" && args.method != "ft" && args.method != "fallback") {
        throw Error(Errc::Config, "--method must be ic, ft or fallback");
    }
    if (args.prompt.empty() == !args.batch) throw Error(Errc::Config, "give exactly one of --prompt or --prompts");

    std::vector<PromptRecord> prompts;
    if (args.batch) {
        prompts = load_prompts(args.prompts_path.empty() ? cfg.resolve(cfg.paths.prompts) : fs::path(args.prompts_path));
    } else {
        prompts.push_back(make_prompt("cli", args.prompt));
    }
    std::map<std::string, std::vector<std::string>> known;
    for (const auto& a : load_assignments_if_any(cfg)) known[a.prompt_id] = a.labels;
    if (args.batch) {
        for (auto& p : prompts) {
            if (auto it = known.find(p.prompt_id); it != known.end()) p.labels = it->second;
        }
    }

    const auto corpus = load_work_corpus(cfg);
    const LabelVocabulary vocab(cfg.labels.vocabulary);
    const auto options = cfg.selection_options();
    auto llm = make_llm(cfg, corpus);
    auto labeler = make_labeler(cfg);
    const double target = args.target.value_or(cfg.selection.target_score);

    std::optional<ScoreTable> table;
    std::string context;
    std::unique_ptr<SimilarityIndex> index;
    if (args.method == "ft") {
        index = std::make_unique<SimilarityIndex>(corpus);
        const TripletStore store(cfg.work("triplets.jsonl"));
        if (auto w = target_warning(target, store.load())) env.err << "warning: " << *w << "\n";
    } else {
        table = load_table(cfg);
        context = render_context(*table, cfg.selection.precision);
    }

    std::vector<std::optional<SelectionResult>> results(prompts.size());
    std::vector<std::optional<Error>> errors(prompts.size());
    const auto n = static_cast<std::ptrdiff_t>(prompts.size());
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& p = prompts[i];
        try {
            if (args.method == "ic") {
                results[i] = select_in_context(p, context, *table, corpus, *llm, *labeler.labeler, vocab, options);
            } else if (args.method == "fallback") {
                results[i] = select_fallback(p, *table, corpus, *labeler.labeler, vocab, options);
            } else {
                results[i] = select_fine_tuned(p, target, *llm, default_ft_template(), *index, options);
            }
        } catch (const Error& e) {
            errors[i] = e;
        }
    }

    int code = kExitOk;
    std::vector<SelectionResult> done;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (errors[i]) {
            env.err << "FAIL " << prompts[i].prompt_id << ": " << errors[i]->what() << "\n";
            code = std::max(code, static_cast<int>(exit_code_for(errors[i]->code())));
            continue;
        }
        done.push_back(std::move(*results[i]));
    }

    if (!args.batch) {
        if (done.empty()) return code;
        env.out << serialize_flow(done.front().resolved_graph) << "\n";
        env.err << done.front().to_json().dump() << "\n";
        return code;
    }
    const auto out_path = args.out_path.empty() ? cfg.work("selections.jsonl") : fs::path(args.out_path);
    save_selections(out_path, done);
    std::map<SelectionMethod, std::size_t> by_method;
    for (const auto& r : done) {
        ++by_method[r.method];
        env.out << r.prompt_id << "\t" << r.flow_id.str() << "\t" << method_name(r.method) << "\n";
    }
    env.out << "selected " << done.size() << "/" << prompts.size() << " ->" << " " << out_path.string();
    for (const auto& [m, c] : by_method) env.out << " " << method_name(m) << "=" << c;
    env.out << "\n";
    return code;
}

int cmd_export_ft(Env& env, bool predict_best, const std::string& out_arg) {
    const auto& cfg = env.cfg;
    const auto triplets = TripletStore(cfg.work("triplets.jsonl")).load();
    if (triplets.empty()) throw Error(Errc::EmptyDataset, "triplet store is empty; run `score` first");
    const auto corpus = load_work_corpus(cfg);
    const auto prompts = load_prompts(cfg.resolve(cfg.paths.prompts));
    const auto examples = export_ft_dataset(triplets, corpus, prompts, default_ft_template(),
                                            predict_best ? FtExportMode::PredictBest : FtExportMode::AllTriplets);
    const auto path = !out_arg.empty()   ? fs::path(out_arg)
                      : predict_best     ? cfg.work("ft_dataset_best.jsonl")
                                         : cfg.work("ft_dataset.jsonl");
    save_ft_dataset(path, examples);
    env.out << "exported " << examples.size() << " examples from " << triplets.size() << " triplets to "
            << path.string() << "\n";
    return kExitOk;
}

int cmd_analyze(Env& env, const std::string& which, const std::string& selections_arg, bool smoothed) {
    const auto& cfg = env.cfg;
    const auto selections_path = selections_arg.empty() ? cfg.work("selections.jsonl") : fs::path(selections_arg);
    std::string text;
    Json doc;
    if (which == "sweep") {
        const auto corpus = load_work_corpus(cfg);
        const auto prompts = load_prompts(cfg.resolve(cfg.paths.prompts));
        const SimilarityIndex index(corpus);
        auto llm = make_llm(cfg, corpus);
        auto executor = make_executor(cfg);
        auto evaluator = make_scorer(cfg.evaluator);
        auto rows = score_sweep(prompts, cfg.selection.sweep, *llm, default_ft_template(), index, *executor,
                                *evaluator, cfg.seed, cfg.selection_options());
        doc = {{"evaluator", cfg.evaluator.name}, {"rows", Json::array()}};
        text = "target\tmean_" + cfg.evaluator.name + "\tevaluated\tfailures\n";
        char buf[128];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.3f\t%s\t%zu\t%zu\n", r.target,
                          r.mean_score ? std::to_string(*r.mean_score).c_str() : "-", r.evaluated, r.failures);
            text += buf;
            doc["rows"].push_back({{"target", r.target},
                                   {"mean_score", r.mean_score ? Json(*r.mean_score) : Json(nullptr)},
                                   {"evaluated", r.evaluated},
                                   {"failures", r.failures}});
        }
    } else {
        if (!fs::exists(selections_path)) {
            throw Error(Errc::InvalidArgument, "no selections at " + selections_path.string() +
                                                   "; run `select --prompts` first", selections_path.string());
        }
        const auto selections = load_selections(selections_path);
        if (which == "tfidf") {
            auto assignments = load_assignments_if_any(cfg);
            const auto report = tfidf_rank(build_label_documents(selections, assignments, make_registry(cfg)),
                                           smoothed);
            text = render_tfidf(report);
            doc = tfidf_to_json(report);
        } else if (which == "diversity") {
            const auto stats = diversity_stats(selections);
            text = render_diversity(stats);
            doc = diversity_to_json(stats);
        } else if (which == "originality") {
            const auto stats = originality_stats(selections, load_work_corpus(cfg));
            text = render_originality(stats);
            doc = originality_to_json(stats);
        } else {
            throw Error(Errc::Config, "analyze expects tfidf, diversity, originality or sweep");
        }
    }
    const auto dir = cfg.work("reports");
    write_text_file(dir / (which + ".txt"), text);
    write_text_file(dir / (which + ".json"), doc.dump(1) + "\n");
    env.out << text;
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prompt-adaptive ComfyUI workflow selection toolkit", "flowpick"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    int workers = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    auto* workers_opt = app.add_option("--workers", workers, "Override the config worker count");
    app.add_option("-c,--config", g.config_path, "Pipeline config (JSON)");
    app.fallthrough();

    std::vector<std::string> validate_inputs;
    auto* validate = app.add_subcommand("validate", "Parse and check template flows");
    validate->add_option("paths", validate_inputs, "Files or directories (default: config templates)");

    auto* augment = app.add_subcommand("augment", "Expand templates into the flow corpus");
    auto* score = app.add_subcommand("score", "Generate and score every (prompt, flow) pair");
    auto* table = app.add_subcommand("table", "Label prompts, build and filter the score table");

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "Pick a flow for a prompt");
    select->add_option("--method", sel.method, "ic, ft or fallback")->check(CLI::IsMember({"ic", "ft", "fallback"}));
    select->add_option("--prompt", sel.prompt, "Prompt text");
    auto* batch_opt = select->add_option("--prompts", sel.prompts_path, "Prompt JSONL (default: config prompts)")
                          ->expected(0, 1);
    select->add_option("--target", sel.target, "Target score for ft");
    select->add_option("--out", sel.out_path, "Selections output for batch runs");

    bool predict_best = false;
    std::string export_out;
    auto* export_ft = app.add_subcommand("export-ft", "Write the instruction-tuning dataset");
    export_ft->add_flag("--predict-best", predict_best, "Only the best flow per prompt");
    export_ft->add_option("--out", export_out, "Output JSONL");

    std::string which;
    std::string selections_path;
    bool smoothed = false;
    auto* analyze = app.add_subcommand("analyze", "Reports over selections");
    analyze->add_option("which", which, "tfidf, diversity, originality or sweep")
        ->required()
        ->check(CLI::IsMember({"tfidf", "diversity", "originality", "sweep"}));
    analyze->add_option("--selections", selections_path, "Selections JSONL");
    analyze->add_flag("--smoothed", smoothed, "Use ln(1 + N/df) for idf");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (*seed_opt) g.seed = seed;
    if (*workers_opt) g.workers = workers;
    sel.batch = batch_opt->count() > 0;

    try {
        if (*validate) return cmd_validate(g, validate_inputs, out, err);
        Env env{load_with_overrides(g), out, err};
        if (*augment) return cmd_augment(env);
        if (*score) return cmd_score(env);
        if (*table) return cmd_table(env);
        if (*select) return cmd_select(env, sel);
        if (*export_ft) return cmd_export_ft(env, predict_best, export_out);
        if (*analyze) return cmd_analyze(env, which, selections_path, smoothed);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}

}  // namespace flowpick
