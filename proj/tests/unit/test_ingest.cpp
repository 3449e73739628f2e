#include "doctest.h"
#include "flowpick/ingest.hpp"
#include "helpers.hpp"

using namespace flowpick;

namespace {

std::string with_node(const std::string& base, const std::string& id, const std::string& node_json) {
    auto doc = Json::parse(base);
    doc[id] = Json::parse(node_json);
    return doc.dump();
}

}  // namespace

TEST_CASE("filters by kind, size, slots and rare blocks") {
    const auto base = testing::fixture_text("flows/sdxl_base.json");
    std::vector<IngestCandidate> c{
        {FlowId("plain"), base},
        {FlowId("video"), with_node(base, "50", R"({"class_type":"VHS_VideoCombine","inputs":{"images":["8",0]}})")},
        {FlowId("control"), with_node(base, "50", R"({"class_type":"ControlNetApply","inputs":{"strength":1.0}})")},
        {FlowId("broken"), "{"},
        {FlowId("no_slot"), R"({"1":{"class_type":"SaveImage","inputs":{}}})"},
        {FlowId("rare"), with_node(base, "50", R"({"class_type":"FancyCommunityNode","inputs":{"x":1}})")},
        {FlowId("common1"), with_node(base, "50", R"({"class_type":"SharedCustom","inputs":{"x":1}})")},
        {FlowId("common2"), with_node(base, "50", R"({"class_type":"SharedCustom","inputs":{"x":2}})")},
        {FlowId("common3"), with_node(base, "50", R"({"class_type":"SharedCustom","inputs":{"x":3}})")},
        {FlowId("huge"), base + std::string(300 * 1024, ' ')},
    };
    auto result = filter_candidates(c);
    REQUIRE(result.verdicts.size() == c.size());
    std::vector<std::string> kept;
    for (const auto& e : result.kept) kept.push_back(e.id.str());
    CHECK(kept == std::vector<std::string>{"plain", "common1", "common2", "common3"});
    for (const auto& v : result.verdicts) {
        CAPTURE(v.id.str());
        CHECK(v.kept == v.reason.empty());
    }
}

TEST_CASE("predicates") {
    auto g = parse_flow(testing::fixture_text("flows/sdxl_base.json"));
    CHECK_FALSE(is_video_flow(g));
    CHECK_FALSE(takes_control_image(g));
    auto v = parse_flow(R"({"1":{"class_type":"SVD_img2vid_Conditioning","inputs":{}}})");
    CHECK(is_video_flow(v));
    auto li = parse_flow(R"({"1":{"class_type":"LoadImage","inputs":{"image":"x.png"}}})");
    CHECK(takes_control_image(li));
}
