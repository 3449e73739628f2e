#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowpick/graph.hpp"

namespace flowpick {

struct PromptSlot {
    NodeId node;
    std::string input;

    friend auto operator<=>(const PromptSlot&, const PromptSlot&) = default;
};

struct PromptSlots {
    std::vector<PromptSlot> positive;
    std::vector<PromptSlot> negative;
};

/// Which nodes encode text and which nodes consume conditioning.
struct PromptSlotRules {
    /// class_type -> string inputs that hold prompt text.
    std::map<std::string, std::vector<std::string>> text_inputs;
    /// class_types whose "positive"/"negative" inputs decide the polarity.
    std::set<std::string> samplers;

    static const PromptSlotRules& defaults();
};

/// Finds literal text inputs of text-encode nodes and classifies them by
/// reachability: a slot is positive iff every sampler it reaches is reached
/// through a "positive" input (negative likewise). Encoders that reach no
/// sampler, or reach samplers through both polarities, are not slots.
///
/// Throws Error(NoPromptSlot) when there is no positive slot.
PromptSlots find_prompt_slots(const WorkflowGraph& graph,
                              const PromptSlotRules& rules = PromptSlotRules::defaults());

}  // namespace flowpick
