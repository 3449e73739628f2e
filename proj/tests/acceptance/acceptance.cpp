// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "flowpick/analysis.hpp"
#include "flowpick/augment.hpp"
#include "flowpick/commands.hpp"
#include "flowpick/corpus_io.hpp"
#include "flowpick/pipeline.hpp"
#include "flowpick/prompt_slots.hpp"
#include "flowpick/score_table.hpp"
#include "flowpick/selection.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace flowpick;
namespace fs = std::filesystem;

namespace {

constexpr double kParseBudgetS = 1.0;
constexpr double kAugmentBudgetS = 5.0;
constexpr double kPipelineBudgetS = 60.0;
constexpr double kStatsTol = 1e-9;
constexpr double kRecomputeTol = 1e-9;
constexpr double kTableTol = 1e-12;
constexpr double kTfIdfTol = 1e-12;
constexpr double kJaccardTol = 1e-12;

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ComponentRegistry mock_registry() {
    return load_registry_files((testing::fixtures() / "registry/entries.tsv").string(),
                               (testing::fixtures() / "registry/slot_rules.tsv").string());
}

// 1 ------------------------------------------------------------------------
Check parser_round_trip() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto corpus = load_template_dir(testing::fixtures() / "flows");
    c.expect(corpus.size() >= 20, "fewer than 20 flows");
    for (const auto& e : corpus) {
        auto text = serialize_flow(e.graph);
        auto back = parse_flow(text);
        c.expect(back == e.graph, e.id.str() + ": parse(serialize) differs");
        c.expect(serialize_flow(back) == text, e.id.str() + ": serialization not deterministic");
        c.expect(serialize_flow(e.graph) == text, e.id.str() + ": repeated serialization differs");
    }
    const auto* portrait = find_flow(corpus, FlowId("portrait_face_restore"));
    c.expect(portrait != nullptr, "portrait flow missing");
    if (portrait) {
        std::multiset<std::string> classes;
        for (const auto& [_, n] : portrait->graph.nodes()) classes.insert(n.class_type);
        for (const char* need : {"CheckpointLoaderSimple", "KSampler", "VAEDecode", "FaceRestoreCFWithModel"}) {
            c.expect(classes.count(need) >= 1, std::string("portrait flow lacks ") + need);
        }
        c.expect(classes.count("CLIPTextEncode") == 2, "portrait flow needs two prompt encoders");
    }
    double s = seconds_since(t0);
    c.expect(s < kParseBudgetS, "took " + std::to_string(s) + " s");
    if (c.ok) c.detail = std::to_string(corpus.size()) + " flows in " + std::to_string(s) + " s";
    return c;
}

// 2 ------------------------------------------------------------------------
Check augmentation() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    auto reg = mock_registry();
    AugmentationPlan plan;
    plan.templates = load_template_dir(testing::fixtures() / "templates");
    c.expect(plan.templates.size() == 3, "expected 3 templates");
    plan.mutations_per_template = 10;
    plan.chain_length = 2;
    plan.mutation_mix = default_mutation_mix();
    plan.seed = 2024;
    std::vector<std::string> dumps;
    std::size_t flows = 0;
    for (int run = 0; run < 3; ++run) {
        auto corpus = expand_corpus(plan, reg);
        flows = corpus.size();
        std::string dump;
        for (const auto& e : corpus) {
            dump += e.id.str() + "\n" + serialize_flow(e.graph) + "\n";
            try {
                auto g = parse_flow(serialize_flow(e.graph));
                find_prompt_slots(g);
            } catch (const Error& err) {
                c.expect(false, e.id.str() + " does not validate: " + err.what());
            }
        }
        dumps.push_back(dump);
    }
    c.expect(dumps[0] == dumps[1] && dumps[1] == dumps[2], "runs differ");

    auto micro = parse_flow(testing::fixture_text("micro/micro.json"));
    std::set<std::string> oracle{serialize_flow(micro)};
    struct Target {
        Category category;
        const char* node;
        const char* input;
    };
    for (auto t : {Target{Category::BaseModel, "4", "ckpt_name"}, Target{Category::Sampler, "3", "sampler_name"},
                   Target{Category::Scheduler, "3", "scheduler"}}) {
        auto current = *as_string(micro.node(t.node).inputs.at(t.input));
        for (const auto& name : reg.names(t.category)) {
            if (name != current) oracle.insert(serialize_flow(micro.with_literal(t.node, t.input, name)));
        }
    }
    AugmentationPlan mp;
    mp.templates = {{FlowId("micro"), micro, {FlowId("micro"), {}}}};
    mp.mutations_per_template = 200;
    mp.mutation_mix = {{SwapComponent{Category::BaseModel}, 1.0}, {SwapSampler{}, 1.0}, {SwapScheduler{}, 1.0}};
    mp.seed = 2024;
    std::set<std::string> got;
    for (const auto& e : expand_corpus(mp, reg)) got.insert(serialize_flow(e.graph));
    c.expect(got == oracle, "micro distinct count " + std::to_string(got.size()) + " vs exhaustive " +
                                std::to_string(oracle.size()));
    double s = seconds_since(t0);
    c.expect(s < kAugmentBudgetS, "took " + std::to_string(s) + " s");
    if (c.ok) {
        c.detail = std::to_string(flows) + " flows x3 identical; micro " + std::to_string(got.size()) + " = " +
                   std::to_string(oracle.size()) + "; " + std::to_string(s) + " s";
    }
    return c;
}

// 3 ------------------------------------------------------------------------
Check ensemble_math() {
    Check c;
    std::mt19937_64 rng(3);
    std::vector<RawScoreVector> raw;
    for (int i = 0; i < 1000; ++i) {
        RawScoreVector v;
        for (const auto& s : default_scorer_names()) {
            auto r = default_score_range(s);
            v[s] = std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
        }
        raw.push_back(v);
    }
    auto stats = fit_standardization(raw);
    double worst = 0.0;
    for (const auto& s : default_scorer_names()) {
        std::vector<double> z;
        for (const auto& v : raw) z.push_back((v.at(s) - stats.at(s).mean) / stats.at(s).std);
        double mean = 0.0;
        for (double x : z) mean += x;
        mean /= static_cast<double>(z.size());
        double sq = 0.0;
        for (double x : z) sq += (x - mean) * (x - mean);
        double sd = std::sqrt(sq / static_cast<double>(z.size()));
        worst = std::max({worst, std::abs(mean), std::abs(sd - 1.0)});
    }
    c.expect(worst < kStatsTol, "standardized column off by " + std::to_string(worst));

    testing::TempDir dir;
    TripletStore store(dir / "t.jsonl");
    std::vector<PromptRecord> prompts;
    for (int i = 0; i < 5; ++i) prompts.push_back(make_prompt("p" + std::to_string(i), "prompt " + std::to_string(i)));
    auto corpus = load_template_dir(testing::fixtures() / "templates");
    std::vector<std::unique_ptr<SyntheticScorer>> owned;
    std::vector<ScorerClient*> scorers;
    for (const auto& s : default_scorer_names()) {
        owned.push_back(std::make_unique<SyntheticScorer>(s));
        scorers.push_back(owned.back().get());
    }
    MockExecutor exec;
    run_matrix(prompts, corpus, exec, scorers, EnsembleConfig::with_default_weights(), store);
    auto cfg = *store.load_config();
    double drift = 0.0;
    for (const auto& t : store.load()) drift = std::max(drift, std::abs(t.ensemble - aggregate_score(t.raw, cfg)));
    c.expect(drift < kRecomputeTol, "stored ensemble drift " + std::to_string(drift));
    if (c.ok) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "max z deviation %.2e, recompute drift %.2e", worst, drift);
        c.detail = buf;
    }
    return c;
}

// 4 ------------------------------------------------------------------------
Check table_and_filter() {
    Check c;
    // Target cells (flow x label), each the mean of two triplets.
    // A: .8 .6 .4 .2 (median .5); B: .9 .5 .15 .1 (median .325);
    // C: .3 - .25 .2 (median .25, f3 sits exactly on it).
    const std::vector<std::string> labels{"A", "B", "C"};
    const std::vector<std::vector<double>> want{{0.8, 0.9, 0.3}, {0.6, 0.5, -1}, {0.4, 0.15, 0.25}, {0.2, 0.1, 0.2}};
    const std::vector<bool> want_kept{true, true, true, false};
    std::vector<ScoredTriplet> ts;
    std::vector<LabelAssignment> as;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        for (int k = 0; k < 2; ++k) as.push_back({labels[l] + std::to_string(k), {labels[l]}});
    }
    for (std::size_t f = 0; f < 4; ++f) {
        for (std::size_t l = 0; l < labels.size(); ++l) {
            if (want[f][l] < 0) continue;
            for (int k = 0; k < 2; ++k) {
                double v = want[f][l] + (k == 0 ? -0.03125 : 0.03125);
                ts.push_back({labels[l] + std::to_string(k), FlowId("f" + std::to_string(f + 1)), 0, {}, v, ""});
            }
        }
    }
    // Group-by oracle straight from the triplets.
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& t : ts) {
        for (const auto& a : as) {
            if (a.prompt_id != t.prompt_id) continue;
            for (const auto& l : a.labels) groups[{t.flow_id.str(), l}].push_back(t.ensemble);
        }
    }
    auto table = build_table(ts, as, labels);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t col = 0; col < labels.size(); ++col) {
            auto it = groups.find({table.flows()[r].str(), labels[col]});
            auto cell = table.cell(r, col);
            if (it == groups.end()) {
                c.expect(!cell, "unexpected cell");
                continue;
            }
            double sum = 0.0;
            for (double x : it->second) sum += x;
            double mean = sum / static_cast<double>(it->second.size());
            c.expect(cell && std::abs(*cell - mean) <= kTableTol, "cell mismatch at " + table.flows()[r].str());
        }
    }
    auto filtered = median_filter(table);
    const double medians[] = {0.5, 0.325, 0.25};
    for (std::size_t col = 0; col < 3; ++col) {
        c.expect(filtered.medians()[col] && std::abs(*filtered.medians()[col] - medians[col]) <= kTableTol,
                 "median mismatch for " + labels[col]);
    }
    for (std::size_t r = 0; r < 4; ++r) c.expect(filtered.kept(r) == want_kept[r], "mask mismatch at f" + std::to_string(r + 1));
    if (c.ok) c.detail = "4x3 cells exact, mask T T T(at median) F";
    return c;
}

// 5 ------------------------------------------------------------------------
Check tfidf() {
    Check c;
    std::mt19937_64 rng(55);
    std::vector<LabelDocument> docs;
    for (int d = 0; d < 5; ++d) {
        LabelDocument doc{"L" + std::to_string(d), {}};
        doc.terms[{"everywhere", Category::BaseModel}] = 1 + rng() % 4;
        for (int t = 0; t < 49; ++t) {
            if (rng() % 2) doc.terms[{"t" + std::to_string(t), t % 2 ? Category::Lora : Category::BaseModel}] = 1 + rng() % 5;
        }
        docs.push_back(doc);
    }
    auto report = tfidf_rank(docs);
    double worst = 0.0;
    bool ubiquitous_zero = true;
    std::size_t checked = 0;
    for (const auto& list : report.lists) {
        for (const auto& term : list.ranked) {
            ComponentRef ref{term.name, list.category};
            std::size_t df = 0, tf = 0;
            for (const auto& d : docs) {
                if (d.terms.count(ref)) ++df;
                if (d.label == list.label) tf = d.terms.at(ref);
            }
            double want = static_cast<double>(tf) * std::log(5.0 / static_cast<double>(df));
            worst = std::max(worst, std::abs(term.score - want));
            if (term.name == "everywhere" && term.score != 0.0) ubiquitous_zero = false;
            ++checked;
        }
    }
    c.expect(worst <= kTfIdfTol, "tf-idf deviation " + std::to_string(worst));
    c.expect(ubiquitous_zero, "ubiquitous term scored non-zero");
    if (c.ok) c.detail = std::to_string(checked) + " scores exact; ubiquitous term 0";
    return c;
}

// 6 ------------------------------------------------------------------------
Check selection() {
    Check c;
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> labels{"A", "B", "C", "D", "E"};
    int tables = 0;
    while (tables < 100) {
        std::size_t n = 2 + rng() % 15;
        std::vector<FlowId> ids;
        for (std::size_t i = 0; i < n; ++i) ids.emplace_back("flow" + std::to_string(i));
        ScoreTable t(ids, labels), scaled(ids, labels);
        bool any = false;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t col = 0; col < labels.size(); ++col) {
                if (rng() % 4 == 0) continue;
                double v = u(rng);
                t.set_cell(r, col, v, 1);
                scaled.set_cell(r, col, v * 7.5, 1);
                any = true;
            }
        }
        if (!any) continue;
        ++tables;
        t = median_filter(t);
        scaled = median_filter(scaled);
        std::vector<std::string> query{labels[rng() % 5]};
        if (rng() % 2) query.push_back(labels[rng() % 5]);
        std::set<std::string> uniq(query.begin(), query.end());
        auto score = [&](std::size_t r, bool use_query) -> std::optional<double> {
            double s = 0;
            int k = 0;
            for (std::size_t col = 0; col < labels.size(); ++col) {
                if (use_query && !uniq.count(labels[col])) continue;
                if (auto v = t.cell(r, col)) {
                    s += *v;
                    ++k;
                }
            }
            return k ? std::optional<double>(s / k) : std::nullopt;
        };
        std::optional<std::size_t> best;
        for (bool use_query : {true, false}) {
            for (std::size_t r = 0; r < n; ++r) {
                if (!t.kept(r)) continue;
                auto s = score(r, use_query);
                if (s && (!best || *s > *score(*best, use_query))) best = r;
            }
            if (best) break;
        }
        auto got = fallback_choice(t, query);
        c.expect(best && t.flows()[*best] == got, "fallback differs from exhaustive scan");
        c.expect(fallback_choice(scaled, query) == got, "rescaling changed the choice");
    }

    const std::set<FlowId> allowed{FlowId("basic"), FlowId("face_restore"), FlowId("lora_detail~002")};
    const std::vector<std::pair<std::string, std::string>> fixtures{
        {"Flow ID: basic\nExplanation: animals", "basic"},
        {"**Flow ID:** `face_restore`", "face_restore"},
        {"flow_id = lora_detail~002.", "lora_detail~002"},
        {"FLOW ID: 'basic'", "basic"},
        {"I recommend face_restore for portraits.", "face_restore"},
        {"Flow ID: unknown_flow", ""},
        {"basic or face_restore, hard to say", ""},
        {"", ""},
        {"{\"flow_id\": broken", ""},
        {"Flow-ID: lora_detail~002\nExplanation: detail", "lora_detail~002"},
    };
    int parsed_ok = 0;
    for (const auto& [text, want] : fixtures) {
        auto p = parse_ic_response(text, allowed);
        bool ok = want.empty() ? !p.flow_id : (p.flow_id && p.flow_id->str() == want);
        c.expect(ok, "IC parse failed on: " + text);
        parsed_ok += ok;
    }
    auto corpus = load_template_dir(testing::fixtures() / "templates");
    ScoreTable t({FlowId("basic"), FlowId("face_restore"), FlowId("lora_detail")}, {"Wildlife"});
    t.set_cell(0, 0, 0.9, 1);
    t.set_cell(1, 0, 0.5, 1);
    t.set_cell(2, 0, 0.1, 1);
    t = median_filter(t);
    CallbackLlm garbled([](const LlmRequest&) { return std::string("Flow ID: lora_detail"); });
    KeywordLabeler kw;
    auto r = select_in_context(make_prompt("p", "a tabby cat"), render_context(t), t, corpus, garbled, kw,
                               LabelVocabulary::standard());
    c.expect(r.method == SelectionMethod::Fallback && r.flow_id.str() == "basic", "malformed answers did not fall back");
    if (c.ok) c.detail = "100 tables; IC " + std::to_string(parsed_ok) + "/10; fallback engaged";
    return c;
}

// 7 ------------------------------------------------------------------------
Check ft_dataset() {
    Check c;
    auto corpus = load_template_dir(testing::fixtures() / "templates");
    std::vector<PromptRecord> prompts{make_prompt("p1", "a tabby cat"), make_prompt("p2", "a castle at dusk")};
    std::vector<ScoredTriplet> ts;
    const double scores[] = {0.512, 0.7254, 0.3, 0.444, 0.9, 0.61};
    int k = 0;
    for (const auto& p : prompts) {
        for (const auto& e : corpus) ts.push_back({p.prompt_id, e.id, 0, {}, scores[k++], ""});
    }
    auto examples = export_ft_dataset(ts, corpus, prompts, default_ft_template());
    c.expect(examples.size() == 6, "expected 6 examples");
    const std::string golden =
        "Below is a prompt that describes an image a user wants to generate, and a numerical score describing the "
        "quality of an image. Please output a ComfyUI workflow in json format that will create an image with this "
        "score when given the prompt.\n>>> Prompt:\na tabby cat\n>>> Score:\n0.725\n>>> Flow:";
    c.expect(examples.size() > 1 && examples[1].instruction == golden, "instruction bytes differ from golden");
    for (const auto& ex : examples) {
        for (const char* marker : {">>> Prompt:", ">>> Score:", ">>> Flow:"}) {
            c.expect(ex.instruction.find(marker) != std::string::npos, std::string("missing ") + marker);
        }
        auto g = parse_flow(ex.completion);
        c.expect(serialize_flow(g) == ex.completion, "completion does not round-trip");
    }
    auto best = export_ft_dataset(ts, corpus, prompts, default_ft_template(), FtExportMode::PredictBest);
    c.expect(best.size() == prompts.size(), "predict-best is not one per prompt");
    if (c.ok) c.detail = "6 examples golden; predict-best " + std::to_string(best.size());
    return c;
}

// 8 ------------------------------------------------------------------------
Check similarity() {
    Check c;
    auto corpus = load_template_dir(testing::fixtures() / "flows");
    for (const auto& e : corpus) c.expect(flow_similarity(e.graph, e.graph) == 1.0, "identity below 1");
    auto a = parse_flow(R"({"1":{"class_type":"A","inputs":{"x":1}},"2":{"class_type":"B","inputs":{"in":["1",0]}}})");
    auto b = parse_flow(R"({"1":{"class_type":"C","inputs":{"y":2}},"2":{"class_type":"D","inputs":{"in":["1",0]}}})");
    c.expect(flow_similarity(a, b) == 0.0, "disjoint pair not 0");
    const auto& hires = find_flow(corpus, FlowId("hires_fix"))->graph;
    c.expect(hires.size() == 10, "hires flow is not 10 nodes");
    auto mutated = hires.with_literal("3", "steps", std::int64_t{37});
    double got = flow_similarity(hires, mutated);
    double want = testing::oracle_similarity(hires, mutated);
    c.expect(std::abs(got - want) <= kJaccardTol, "mutation similarity differs from oracle");

    std::vector<SelectionResult> retrieval;
    for (const auto& e : corpus) {
        retrieval.push_back({"p", e.id, SelectionMethod::Fallback, std::nullopt, std::nullopt, e.graph, e.graph,
                             std::nullopt});
    }
    auto orig = originality_stats(retrieval, corpus);
    c.expect(orig.mean_nn_similarity && *orig.mean_nn_similarity == 1.0, "retrieval originality not exactly 1");
    if (c.ok) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "mutation %.12f = oracle; originality 1.0", got);
        c.detail = buf;
    }
    return c;
}

// 9, 10 --------------------------------------------------------------------
struct CliRun {
    int code;
    std::string out;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str() + err.str()};
}

struct PipelineOutcome {
    bool ok = true;
    std::string failure;
    std::string score_output;
    std::string triplets;
    std::string report;
    std::size_t lines = 0;
};

PipelineOutcome hermetic_pipeline() {
    PipelineOutcome o;
    testing::TempDir dir("flowpick-acceptance");
    for (const char* item : {"templates", "registry", "prompts.jsonl", "pipeline.json"}) {
        fs::copy(testing::fixtures() / item, dir / item, fs::copy_options::recursive);
    }
    const auto cfg = (dir / "pipeline.json").string();
    std::vector<std::vector<std::string>> steps{
        {"-c", cfg, "augment"},
        {"-c", cfg, "score"},
        {"-c", cfg, "table"},
        {"-c", cfg, "select", "--method", "ic", "--prompts"},
        {"-c", cfg, "analyze", "tfidf"},
    };
    for (const auto& s : steps) {
        auto r = cli(s);
        if (s[2] == "score") o.score_output = r.out;
        if (r.code != 0) {
            o.ok = false;
            o.failure = s[2] + " exited " + std::to_string(r.code) + ": " + r.out;
            return o;
        }
    }
    o.triplets = read_text_file(dir / "work/triplets.jsonl");
    o.lines = read_lines(dir / "work/triplets.jsonl").size();
    o.report = read_text_file(dir / "work/reports/tfidf.json");
    return o;
}

Check end_to_end(PipelineOutcome& first) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    first = hermetic_pipeline();
    double s = seconds_since(t0);
    c.expect(first.ok, first.failure);
    if (!first.ok) return c;
    auto second = hermetic_pipeline();
    c.expect(second.ok, second.failure);
    c.expect(first.lines == 30, "store holds " + std::to_string(first.lines) + " lines");
    c.expect(second.triplets == first.triplets, "triplet store differs between runs");
    c.expect(second.report == first.report, "analysis report differs between runs");
    c.expect(s < kPipelineBudgetS, "took " + std::to_string(s) + " s");
    if (c.ok) c.detail = "5 prompts x 6 flows, 30 lines, deterministic, " + std::to_string(s) + " s";
    return c;
}

Check scale_anchor(const PipelineOutcome& run) {
    Check c;
    std::istringstream lines(run.score_output);
    std::string line, logged;
    while (std::getline(lines, line)) {
        if (line.rfind("projected triplets", 0) == 0 || line.rfind("reference scale", 0) == 0) {
            std::cout << "  | " << line << "\n";
            logged += line + "\n";
        }
    }
    c.expect(logged.find("155000 triplets") != std::string::npos, "projection missing 155000");
    c.expect(logged.find("310 - 125 = 185 rows") != std::string::npos, "projection missing 185 rows");
    if (c.ok) c.detail = "informational projection printed";
    return c;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"parser round-trip", parser_round_trip},
        {"augmentation determinism and enumeration", augmentation},
        {"ensemble standardization", ensemble_math},
        {"score table and median filter", table_and_filter},
        {"tf-idf oracle", tfidf},
        {"selection", selection},
        {"fine-tune dataset", ft_dataset},
        {"similarity", similarity},
    };
    PipelineOutcome pipeline;
    criteria.emplace_back("hermetic end-to-end pipeline", [&] { return end_to_end(pipeline); });
    criteria.emplace_back("scale anchor", [&] { return scale_anchor(pipeline); });

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        failed += !c.ok;
        std::cout << (c.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << c.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
