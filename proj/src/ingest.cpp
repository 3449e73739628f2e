#include "flowpick/ingest.hpp"

#include <map>
#include <optional>

#include "flowpick/error.hpp"
#include "flowpick/prompt_slots.hpp"

namespace flowpick {

std::set<std::string> IngestOptions::default_core_blocks() {
    return {
        "CheckpointLoaderSimple", "CheckpointLoader", "CLIPTextEncode", "CLIPTextEncodeSDXL",
        "CLIPTextEncodeSDXLRefiner", "ConditioningCombine", "ConditioningConcat", "ConditioningSetArea",
        "EmptyLatentImage", "KSampler", "KSamplerAdvanced", "SamplerCustom", "VAEDecode", "VAEEncode",
        "VAELoader", "LoraLoader", "LoraLoaderModelOnly", "CLIPSetLastLayer", "SaveImage", "PreviewImage",
        "UpscaleModelLoader", "ImageUpscaleWithModel", "ImageScale", "ImageScaleBy", "LatentUpscale",
        "LatentUpscaleBy", "UNETLoader", "CLIPLoader", "DualCLIPLoader", "ModelSamplingDiscrete",
        "RescaleCFG", "FreeU_V2", "PrimitiveNode",
    };
}

namespace {

bool class_contains(const WorkflowGraph& graph, std::initializer_list<std::string_view> markers) {
    for (const auto& [_, node] : graph.nodes()) {
        for (auto m : markers) {
            if (node.class_type.find(m) != std::string::npos) return true;
        }
    }
    return false;
}

}  // namespace

bool is_video_flow(const WorkflowGraph& graph) {
    return class_contains(graph, {"VHS_", "Video", "AnimateDiff", "SVD_img2vid", "img2vid"});
}

bool takes_control_image(const WorkflowGraph& graph) {
    return class_contains(graph, {"LoadImage", "ControlNet", "IPAdapter"});
}

IngestResult filter_candidates(const std::vector<IngestCandidate>& candidates, const IngestOptions& options) {
    IngestResult result;
    std::vector<std::optional<WorkflowGraph>> parsed(candidates.size());
    result.verdicts.resize(candidates.size());

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& v = result.verdicts[i];
        v.id = candidates[i].id;
        try {
            auto g = parse_flow(candidates[i].json_text);
            if (is_video_flow(g)) {
                v.reason = "video flow";
            } else if (takes_control_image(g)) {
                v.reason = "takes a control image";
            } else if (candidates[i].json_text.size() > options.max_json_bytes) {
                v.reason = "JSON larger than " + std::to_string(options.max_json_bytes) + " bytes";
            } else {
                find_prompt_slots(g);
                parsed[i] = std::move(g);
            }
        } catch (const Error& e) {
            v.reason = e.what();
        }
    }

    // Block frequency is counted over flows that survived the other filters.
    std::map<std::string, std::size_t> frequency;
    for (const auto& g : parsed) {
        if (!g) continue;
        std::set<std::string> blocks;
        for (const auto& [_, node] : g->nodes()) blocks.insert(node.class_type);
        for (const auto& b : blocks) ++frequency[b];
    }

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!parsed[i]) continue;
        std::string rare;
        for (const auto& [_, node] : parsed[i]->nodes()) {
            if (!options.core_blocks.count(node.class_type) &&
                frequency[node.class_type] < options.min_block_frequency) {
                rare = node.class_type;
                break;
            }
        }
        if (!rare.empty()) {
            result.verdicts[i].reason = "community block '" + rare + "' appears in fewer than " +
                                        std::to_string(options.min_block_frequency) + " flows";
            continue;
        }
        result.verdicts[i].kept = true;
        result.kept.push_back({candidates[i].id, std::move(*parsed[i]), {candidates[i].id, {}}});
    }
    return result;
}

}  // namespace flowpick
