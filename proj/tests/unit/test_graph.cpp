#include <random>
#include <set>

#include "doctest.h"
#include "flowpick/corpus_io.hpp"
#include "flowpick/error.hpp"
#include "helpers.hpp"

using namespace flowpick;

namespace {

Errc parse_error(std::string_view text) {
    try {
        parse_flow(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return Errc::Io;
}

}  // namespace

TEST_CASE("minimal flow round-trips") {
    auto g = parse_flow(R"({"1": {"class_type": "SaveImage", "inputs": {"filename_prefix": "x"}}})");
    CHECK(g.size() == 1);
    CHECK(serialize_flow(g) == R"({"1":{"class_type":"SaveImage","inputs":{"filename_prefix":"x"}}})");
}

TEST_CASE("every bundled flow round-trips structurally and byte-stably") {
    for (const auto& t : list_template_files(testing::fixtures() / "flows")) {
        CAPTURE(t.path.string());
        auto text = read_text_file(t.path);
        auto g = parse_flow(text);
        auto once = serialize_flow(g);
        auto again = parse_flow(once);
        CHECK(again == g);
        CHECK(serialize_flow(again) == once);
        // Same document as the file, up to whitespace and key order.
        CHECK(Json::parse(once) == Json::parse(text));
    }
}

TEST_CASE("literal fidelity: floats, large seeds, unicode, _meta") {
    auto g = parse_flow(testing::fixture_text("flows/portrait_face_restore.json"));
    const auto& sampler = g.node("3");
    CHECK(literal_text(*as_literal(sampler.inputs.at("cfg"))) == "7.5");
    auto seed = std::get<std::uint64_t>(*as_literal(sampler.inputs.at("seed")));
    CHECK(seed == 18446744073709551000ULL);
    CHECK(g.node("4").extras.at("_meta").at("title") == "Load Checkpoint");
    CHECK(serialize_flow(g).find(R"("_meta":{"title":"Load Checkpoint"})") != std::string::npos);

    auto u = parse_flow(testing::fixture_text("flows/unicode_prompt.json"));
    CHECK(*as_string(u.node("7").inputs.at("text")) == "ugly été \"quoted\" \\ slash\nnewline");
    CHECK(parse_flow(serialize_flow(u)) == u);

    auto ints = parse_flow(R"({"1":{"class_type":"A","inputs":{"n":-3,"big":9223372036854775807,"f":1.0}}})");
    CHECK(std::holds_alternative<std::int64_t>(*as_literal(ints.node("1").inputs.at("big"))));
    CHECK(serialize_flow(ints) == R"({"1":{"class_type":"A","inputs":{"big":9223372036854775807,"f":1.0,"n":-3}}})");
}

TEST_CASE("structural errors") {
    CHECK(parse_error("{}") == Errc::EmptyGraph);
    CHECK(parse_error("[1,2]") == Errc::MalformedJson);
    CHECK(parse_error(R"({"1":{"inputs":{}}})") == Errc::MalformedJson);
    CHECK(parse_error(R"({"1":{"class_type":"","inputs":{}}})") == Errc::MalformedJson);
    CHECK(parse_error(R"({"1":{"class_type":"A","inputs":{"x":["1"]}}})") == Errc::BadLinkShape);
    CHECK(parse_error(R"({"1":{"class_type":"A","inputs":{"x":[1,0]}}})") == Errc::BadLinkShape);
    CHECK(parse_error(R"({"1":{"class_type":"A","inputs":{"x":["1",-1]}}})") == Errc::BadLinkShape);
    CHECK(parse_error(R"({"1":{"class_type":"A","inputs":{"x":null}}})") == Errc::MalformedJson);
    CHECK(parse_error(R"({"1":{"class_type":"A","inputs":{"x":1,"x":2}}})") == Errc::MalformedJson);

    try {
        parse_flow(R"({"1":{"class_type":"A","inputs":{"x":["9",0]}}})");
        FAIL("expected UnknownLinkTarget");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownLinkTarget);
        CHECK(e.subject() == "9");
    }
    try {
        parse_flow(R"({"a":{"class_type":"A","inputs":{"x":["b",0]}},"b":{"class_type":"B","inputs":{"y":["a",0]}}})");
        FAIL("expected CycleDetected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CycleDetected);
        std::string msg = e.what();
        CHECK(msg.find("a") != std::string::npos);
        CHECK(msg.find("b") != std::string::npos);
    }
    CHECK(parse_error(R"({"a":{"class_type":"A","inputs":{"x":["a",0]}}})") == Errc::CycleDetected);
}

TEST_CASE("property: cycle detection agrees with path enumeration") {
    std::mt19937_64 rng(11);
    int cyclic = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto nodes = testing::random_nodes(rng, 2 + static_cast<int>(rng() % 7), static_cast<int>(rng() % 3));
        const bool oracle = has_cycle_by_path_enumeration(nodes);
        bool thrown = false;
        try {
            WorkflowGraph::from_nodes(nodes);
        } catch (const Error& e) {
            thrown = e.code() == Errc::CycleDetected;
        }
        CHECK(thrown == oracle);
        cyclic += oracle;
    }
    CHECK(cyclic > 20);  // the generator exercises both outcomes
}

TEST_CASE("property: random DAGs round-trip and sort topologically") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = WorkflowGraph::from_nodes(testing::random_nodes(rng, 1 + static_cast<int>(rng() % 12)));
        CHECK(parse_flow(serialize_flow(g)) == g);
        auto order = g.topological_order();
        REQUIRE(order.size() == g.size());
        std::map<NodeId, std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (const auto& [id, node] : g.nodes()) {
            for (const auto& [_, v] : node.inputs) {
                if (auto l = as_link(v)) CHECK(pos.at(l->node) < pos.at(id));
            }
        }
    }
}

TEST_CASE("with_literal keeps topology and rejects links") {
    auto g = parse_flow(testing::fixture_text("flows/sdxl_base.json"));
    auto h = g.with_literal("3", "cfg", 9.0);
    CHECK(h.edge_count() == g.edge_count());
    CHECK(literal_text(*as_literal(h.node("3").inputs.at("cfg"))) == "9.0");
    CHECK_FALSE(input_equal(g.node("3").inputs.at("cfg"), h.node("3").inputs.at("cfg")));
    CHECK_THROWS_AS(g.with_literal("3", "model", 1.0), Error);
    CHECK_THROWS_AS(g.with_literal("nope", "cfg", 1.0), Error);
}

TEST_CASE("literal equality is exact") {
    CHECK(literal_equal(Literal{0.0}, Literal{0.0}));
    CHECK_FALSE(literal_equal(Literal{0.0}, Literal{-0.0}));
    CHECK_FALSE(literal_equal(Literal{std::int64_t{1}}, Literal{1.0}));
    CHECK_FALSE(literal_equal(Literal{true}, Literal{std::int64_t{1}}));
}

TEST_CASE("corpus files round-trip through write/load") {
    testing::TempDir dir;
    auto corpus = load_template_dir(testing::fixtures() / "templates");
    REQUIRE(corpus.size() == 3);
    corpus[1].lineage.mutations = {"SwapComponent 4.ckpt_name: a -> b"};
    write_corpus(dir.path(), corpus);
    auto back = load_corpus(dir.path());
    REQUIRE(back.size() == corpus.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].id == corpus[i].id);
        CHECK(back[i].graph == corpus[i].graph);
        CHECK(back[i].lineage == corpus[i].lineage);
    }
}

TEST_CASE("template directory errors name the file") {
    testing::TempDir dir;
    write_text_file(dir / "ok.json", testing::fixture_text("flows/sdxl_base.json"));
    write_text_file(dir / "bad.json", testing::fixture_text("invalid/cycle.json"));
    try {
        load_template_dir(dir.path());
        FAIL("expected TemplateInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TemplateInvalid);
        CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    }
}
