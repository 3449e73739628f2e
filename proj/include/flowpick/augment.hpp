#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "flowpick/graph.hpp"
#include "flowpick/registry.hpp"

namespace flowpick {

struct SwapComponent {
    Category category;
};
struct ChangeGuidance {
    double min;
    double max;
};
struct ChangeSteps {
    std::int64_t min;
    std::int64_t max;
};
struct SwapSampler {};
struct SwapScheduler {};

using MutationKind = std::variant<SwapComponent, ChangeGuidance, ChangeSteps, SwapSampler, SwapScheduler>;

struct MutationSpec {
    MutationKind kind;
    std::uint64_t rng_seed = 0;
};

std::string describe(const MutationKind& kind);

/// Throws Error(InvalidArgument) for empty or inverted ranges.
void validate(const MutationSpec& spec);

struct MutationOutcome {
    WorkflowGraph graph;
    std::string log;  // "<node>.<input>: <old> -> <new>"
};

/// Applies one mutation to one matching input, chosen by the spec's seed.
/// Swaps only draw names from the slot's own registry category; guidance
/// draws are rounded to one decimal. Throws Error(NoMatchingSlot) when the
/// graph has no input covered by the relevant rules.
MutationOutcome apply_mutation_logged(const WorkflowGraph& graph, const MutationSpec& spec,
                                      const ComponentRegistry& registry);

inline WorkflowGraph apply_mutation(const WorkflowGraph& graph, const MutationSpec& spec,
                                    const ComponentRegistry& registry) {
    return apply_mutation_logged(graph, spec, registry).graph;
}

struct WeightedMutation {
    MutationKind kind;
    double weight = 1.0;
};

struct AugmentationPlan {
    Corpus templates;
    int mutations_per_template = 0;
    /// Mutations chained into each variant.
    int chain_length = 1;
    std::vector<WeightedMutation> mutation_mix;
    std::uint64_t seed = 0;
    bool dedup = true;
};

/// Default mix: model, LoRA, VAE, upscaler swaps, samplers, schedulers,
/// guidance in [3, 12] and steps in [15, 50].
std::vector<WeightedMutation> default_mutation_mix();

/// Templates followed by their variants. Variant ids are
/// "<template>~<index>" with a three-digit index; draws for variant i of
/// template t come from a generator keyed on (seed, t, i) only. With dedup,
/// variants whose canonical serialization was already emitted are dropped.
///
/// Errors: Error(TemplateInvalid) naming the template when it has no prompt
/// slot or the plan is malformed.
Corpus expand_corpus(const AugmentationPlan& plan, const ComponentRegistry& registry);

}  // namespace flowpick
