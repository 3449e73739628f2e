#include "flowpick/prompt_slots.hpp"

#include "flowpick/error.hpp"

namespace flowpick {

const PromptSlotRules& PromptSlotRules::defaults() {
    static const PromptSlotRules rules{
        {
            {"CLIPTextEncode", {"text"}},
            {"CLIPTextEncodeSDXL", {"text_g", "text_l"}},
            {"CLIPTextEncodeSDXLRefiner", {"text"}},
        },
        {"KSampler", "KSamplerAdvanced", "SamplerCustom"},
    };
    return rules;
}

namespace {

std::set<NodeId> downstream_of(const NodeId& start,
                               const std::map<NodeId, std::vector<NodeId>>& consumers) {
    std::set<NodeId> seen;
    std::vector<NodeId> todo{start};
    while (!todo.empty()) {
        NodeId at = std::move(todo.back());
        todo.pop_back();
        auto it = consumers.find(at);
        if (it == consumers.end()) continue;
        for (const auto& c : it->second) {
            if (seen.insert(c).second) todo.push_back(c);
        }
    }
    return seen;
}

}  // namespace

PromptSlots find_prompt_slots(const WorkflowGraph& graph, const PromptSlotRules& rules) {
    std::map<NodeId, std::vector<NodeId>> consumers;
    for (const auto& [id, node] : graph.nodes()) {
        for (const auto& [_, v] : node.inputs) {
            if (auto link = as_link(v)) consumers[link->node].push_back(id);
        }
    }

    PromptSlots slots;
    for (const auto& [id, node] : graph.nodes()) {
        auto rule = rules.text_inputs.find(node.class_type);
        if (rule == rules.text_inputs.end()) continue;

        const auto reach = downstream_of(id, consumers);
        bool any_positive = false;
        bool any_negative = false;
        for (const auto& [sid, sampler] : graph.nodes()) {
            if (!rules.samplers.count(sampler.class_type)) continue;
            for (const char* polarity : {"positive", "negative"}) {
                auto in = sampler.inputs.find(polarity);
                if (in == sampler.inputs.end()) continue;
                auto link = as_link(in->second);
                if (!link || (link->node != id && !reach.count(link->node))) continue;
                (polarity[0] == 'p' ? any_positive : any_negative) = true;
            }
        }
        if (any_positive == any_negative) continue;  // unreached or mixed

        for (const auto& input : rule->second) {
            auto in = node.inputs.find(input);
            if (in == node.inputs.end() || !as_string(in->second)) continue;
            (any_positive ? slots.positive : slots.negative).push_back({id, input});
        }
    }
    if (slots.positive.empty()) {
        throw Error(Errc::NoPromptSlot, "flow has no text input wired to a sampler's positive conditioning");
    }
    return slots;
}

}  // namespace flowpick
