#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "flowpick/corpus_io.hpp"
#include "flowpick/error.hpp"
#include "flowpick/prompt_slots.hpp"
#include "flowpick/selection.hpp"
#include "helpers.hpp"

using namespace flowpick;

namespace {

Corpus templates() { return load_template_dir(testing::fixtures() / "templates"); }

// basic strong on Wildlife, face_restore strong on People, lora_detail weak
// everywhere and dropped by the median filter.
ScoreTable demo_table() {
    ScoreTable t({FlowId("basic"), FlowId("face_restore"), FlowId("lora_detail")}, {"People", "Wildlife"});
    t.set_cell(0, 0, 0.40, 3);
    t.set_cell(0, 1, 0.80, 3);
    t.set_cell(1, 0, 0.90, 3);
    t.set_cell(1, 1, 0.50, 3);
    t.set_cell(2, 0, 0.10, 3);
    t.set_cell(2, 1, 0.20, 3);
    return median_filter(t);
}

class Scripted final : public LlmClient {
public:
    explicit Scripted(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const LlmRequest& r) override {
        requests.push_back(r.user);
        if (next_ >= replies_.size()) throw Error(Errc::LlmUnavailable, "script exhausted");
        return replies_[next_++];
    }
    std::vector<std::string> requests;

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

}  // namespace

TEST_CASE("in-context request text") {
    auto req = ic_request("a cat", "flow_id | A\nf | 0.500\n");
    CHECK(req == "flow_id | A\nf | 0.500\n\nPlease classify the following prompt into one of the flows mentioned "
                 "above:\n\na cat\n\nProvide the flow ID and a brief explanation for your classification.");
}

TEST_CASE("in-context response parsing") {
    const std::set<FlowId> allowed{FlowId("basic"), FlowId("face_restore"), FlowId("sdxl~003")};
    struct Case {
        const char* text;
        const char* want;  // nullptr: no id
    };
    const Case cases[] = {
        {"Flow ID: basic\nExplanation: good for animals", "basic"},
        {"**Flow ID:** `face_restore`\n**Explanation:** portraits", "face_restore"},
        {"flow_id=sdxl~003. Explanation: fine", "sdxl~003"},
        {"Flow ID: \"basic\".", "basic"},
        {"I would pick face_restore because it scores best on People.", "face_restore"},
        {"Flow ID: missing_flow. Explanation: nope", nullptr},
        {"Either basic or face_restore would work.", nullptr},
        {"", nullptr},
        {"The flow id is unclear; basic_v2 maybe", nullptr},
        {"Flow-ID: face_restore\nExplanation: faces", "face_restore"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.text);
        auto parsed = parse_ic_response(c.text, allowed);
        if (c.want) {
            REQUIRE(parsed.flow_id.has_value());
            CHECK(parsed.flow_id->str() == c.want);
        } else {
            CHECK_FALSE(parsed.flow_id.has_value());
        }
    }
    CHECK(parse_ic_response("Flow ID: basic\nExplanation: good for animals", allowed).explanation == "good for animals");
}

TEST_CASE("in-context never returns a discarded flow") {
    auto corpus = templates();
    auto table = demo_table();
    REQUIRE_FALSE(table.kept(2));
    const auto context = render_context(table);
    KeywordLabeler kw;
    auto vocab = LabelVocabulary::standard();
    auto cat = make_prompt("p", "a tabby cat");

    Scripted liar({"Flow ID: lora_detail", "Flow ID: lora_detail", "Flow ID: lora_detail", "Flow ID: lora_detail"});
    auto r = select_in_context(cat, context, table, corpus, liar, kw, vocab);
    CHECK(r.method == SelectionMethod::Fallback);
    CHECK(r.flow_id.str() == "basic");
    CHECK(r.explanation->rfind("NoValidFlowId", 0) == 0);
    CHECK(liar.requests.size() == 4);
    CHECK(liar.requests[1].find("previous answer") != std::string::npos);

    Scripted second({"no idea", "Flow ID: face_restore. Explanation: faces"});
    auto s = select_in_context(cat, context, table, corpus, second, kw, vocab);
    CHECK(s.method == SelectionMethod::InContext);
    CHECK(s.flow_id.str() == "face_restore");
    CHECK(s.explanation == std::optional<std::string>("faces"));
    CHECK(*as_string(s.resolved_graph.node(find_prompt_slots(s.graph).positive.front().node)
                         .inputs.at(find_prompt_slots(s.graph).positive.front().input)) == "a tabby cat");

    Scripted down({});
    auto d = select_in_context(cat, context, table, corpus, down, kw, vocab);
    CHECK(d.method == SelectionMethod::Fallback);
    CHECK(d.explanation->find("llm unavailable") != std::string::npos);

    MockLlm mock(corpus);
    auto m = select_in_context(cat, context, table, corpus, mock, kw, vocab);
    CHECK(m.method == SelectionMethod::InContext);
    CHECK(m.flow_id.str() == "basic");
}

TEST_CASE("fallback choice") {
    auto table = demo_table();
    CHECK(fallback_choice(table, {"Wildlife"}).str() == "basic");
    CHECK(fallback_choice(table, {"People"}).str() == "face_restore");
    CHECK(fallback_choice(table, {"Nature"}).str() == "face_restore");  // no cell: overall mean 0.70 vs 0.60
    CHECK(fallback_choice(table, {}).str() == "face_restore");

    ScoreTable tie({FlowId("b"), FlowId("a")}, {"X"});
    tie.set_cell(0, 0, 0.5, 1);
    tie.set_cell(1, 0, 0.5, 1);
    CHECK(fallback_choice(tie, {"X"}).str() == "a");

    ScoreTable empty({FlowId("a")}, {"X"});
    CHECK_THROWS_AS(fallback_choice(empty, {"X"}), Error);
}

TEST_CASE("property: fallback is the argmax of kept label means and scale invariant") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> labels{"A", "B", "C", "D"};
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng() % 12;
        std::vector<FlowId> flows;
        for (std::size_t i = 0; i < n; ++i) flows.emplace_back("f" + std::to_string(100 + i));
        ScoreTable t(flows, labels), scaled(flows, labels);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < labels.size(); ++c) {
                if (rng() % 3 == 0) continue;
                double v = u(rng);
                t.set_cell(r, c, v, 1);
                scaled.set_cell(r, c, 3.0 * v + 0.25, 1);
            }
        }
        bool any = false;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < labels.size(); ++c) any = any || t.cell(r, c).has_value();
        }
        if (!any) continue;
        t = median_filter(t);
        scaled = median_filter(scaled);
        std::vector<std::string> query{labels[rng() % 4], labels[rng() % 4]};
        auto got = fallback_choice(t, query);
        CHECK(fallback_choice(scaled, query) == got);
        auto row = *t.row_of(got);
        CHECK(t.kept(row));
        // Brute-force argmax over the distinct query labels.
        std::set<std::string> uniq(query.begin(), query.end());
        auto mean_unique = [&](std::size_t r) -> std::optional<double> {
            double s = 0;
            int k = 0;
            for (const auto& l : uniq) {
                if (auto v = t.cell(r, *t.col_of(l))) {
                    s += *v;
                    ++k;
                }
            }
            return k ? std::optional<double>(s / k) : std::nullopt;
        };
        std::optional<std::size_t> best;
        for (std::size_t r = 0; r < n; ++r) {
            if (!t.kept(r)) continue;
            auto m = mean_unique(r);
            if (m && (!best || *m > *mean_unique(*best))) best = r;
        }
        if (best) CHECK(t.flows()[*best] == got);
    }
}

TEST_CASE("fine-tune instruction text") {
    CHECK(render_ft_instruction(default_ft_template(), "a cat", 0.7254) ==
          "Below is a prompt that describes an image a user wants to generate, and a numerical score describing the "
          "quality of an image. Please output a ComfyUI workflow in json format that will create an image with this "
          "score when given the prompt.\n>>> Prompt:\na cat\n>>> Score:\n0.725\n>>> Flow:");
    CHECK(render_ft_instruction("[score]|[prompt]|[score]", "x", 0.5) == "0.500|x|0.500");
    CHECK_THROWS_AS(render_ft_instruction(default_ft_template(), "x", std::nan("")), Error);
}

TEST_CASE("fine-tune export") {
    auto corpus = templates();
    std::vector<PromptRecord> prompts{make_prompt("p2", "a castle"), make_prompt("p1", "a cat")};
    std::vector<ScoredTriplet> ts;
    double v = 0.1;
    for (const char* p : {"p2", "p1"}) {
        for (const auto& e : corpus) ts.push_back({p, e.id, 0, {}, v += 0.1, ""});
    }
    auto all = export_ft_dataset(ts, corpus, prompts, default_ft_template());
    REQUIRE(all.size() == 6);
    CHECK(all[0].instruction.find(">>> Prompt:\na cat\n") != std::string::npos);
    CHECK(all[0].completion == serialize_flow(corpus[0].graph));
    std::set<std::string> canon;
    for (const auto& e : corpus) canon.insert(serialize_flow(e.graph));
    for (const auto& ex : all) CHECK(canon.count(ex.completion) == 1);

    auto best = export_ft_dataset(ts, corpus, prompts, default_ft_template(), FtExportMode::PredictBest);
    REQUIRE(best.size() == 2);
    CHECK(best[0].completion == serialize_flow(corpus.back().graph));
    CHECK(best[0].instruction.find("a cat") != std::string::npos);

    testing::TempDir dir;
    save_ft_dataset(dir / "ft.jsonl", all);
    auto lines = read_lines(dir / "ft.jsonl");
    REQUIRE(lines.size() == 6);
    auto row = Json::parse(lines[0]);
    CHECK(row.at("instruction") == all[0].instruction);
    CHECK(parse_flow(row.at("completion").get<std::string>()) == corpus[0].graph);

    ts.push_back({"p1", FlowId("gone"), 0, {}, 0.3, ""});
    CHECK_THROWS_AS(export_ft_dataset(ts, corpus, prompts, default_ft_template()), Error);
    ts.back() = {"p9", corpus[0].id, 0, {}, 0.3, ""};
    CHECK_THROWS_AS(export_ft_dataset(ts, corpus, prompts, default_ft_template()), Error);

    CHECK_FALSE(target_warning(0.5, ts).has_value());
    CHECK(target_warning(5.0, ts).has_value());
}

TEST_CASE("JSON extraction from prose") {
    CHECK(extract_json_object(R"(Sure! {"a": "}{"} and more)") == R"({"a": "}{"})");
    CHECK(extract_json_object(R"(bad {not json} then {"b":{"c":1}} end)") == R"({"b":{"c":1}})");
    try {
        extract_json_object("no braces here");
        FAIL("expected NoJsonFound");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoJsonFound);
    }
}

TEST_CASE("fine-tuned selection: neighbours, novel flows, retries") {
    auto corpus = templates();
    SimilarityIndex index(corpus);
    auto prompt = make_prompt("p", "a cat");

    const auto exact = serialize_flow(corpus[1].graph);
    Scripted echo({"Here you go:\n" + exact + "\nDone."});
    auto r = select_fine_tuned(prompt, 0.725, echo, default_ft_template(), index);
    CHECK(r.flow_id == corpus[1].id);
    CHECK(r.neighbor->similarity == 1.0);
    CHECK(r.target_score == std::optional<double>(0.725));
    CHECK(echo.requests[0] == build_ft_request(prompt, 0.725, default_ft_template()));

    auto novel = corpus[0].graph.with_literal("3", "steps", std::int64_t{33});
    Scripted fresh({serialize_flow(novel)});
    auto n = select_fine_tuned(prompt, 0.5, fresh, default_ft_template(), index);
    CHECK(n.flow_id.str().rfind("ft-", 0) == 0);
    CHECK(n.neighbor->id == corpus[0].id);
    CHECK(n.neighbor->similarity < 1.0);
    CHECK(n.graph == novel);

    Scripted flaky({"prose only", R"({"1":{"class_type":"X","inputs":{"a":["9",0]}}})", exact});
    SelectionOptions opts;
    opts.ft_retries = 2;
    CHECK(select_fine_tuned(prompt, 0.5, flaky, default_ft_template(), index, opts).flow_id == corpus[1].id);

    Scripted hopeless({"a", "b", "c", "d"});
    try {
        select_fine_tuned(prompt, 0.5, hopeless, default_ft_template(), index, opts);
        FAIL("expected NoJsonFound");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoJsonFound);
    }
    CHECK(hopeless.requests.size() == 3);
}

TEST_CASE("score sweep and selection persistence") {
    auto corpus = templates();
    SimilarityIndex index(corpus);
    MockLlm llm(corpus, 3);
    MockExecutor exec;
    SyntheticScorer hps("hps_v2");
    std::vector<PromptRecord> prompts{make_prompt("a", "a cat"), make_prompt("b", "a dog")};
    auto rows = score_sweep(prompts, {0.296, 0.467, 0.596, 0.725}, llm, default_ft_template(), index, exec, hps, 1);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.evaluated == 2);
        CHECK(r.failures == 0);
        REQUIRE(r.mean_score.has_value());
        CHECK(*r.mean_score >= 0.20);
        CHECK(*r.mean_score <= 0.32);
    }
    auto again = score_sweep(prompts, {0.296}, llm, default_ft_template(), index, exec, hps, 1);
    CHECK(*again[0].mean_score == *rows[0].mean_score);

    auto sel = select_fine_tuned(prompts[0], 0.725, llm, default_ft_template(), index);
    testing::TempDir dir;
    save_selections(dir / "s.jsonl", {sel});
    auto back = load_selections(dir / "s.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0].flow_id == sel.flow_id);
    CHECK(back[0].graph == sel.graph);
    CHECK(back[0].method == SelectionMethod::FineTuned);
    CHECK(back[0].target_score == sel.target_score);
}
