#include "flowpick/augment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "flowpick/error.hpp"
#include "flowpick/hashing.hpp"
#include "flowpick/prompt_slots.hpp"

namespace flowpick {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Slot {
    NodeId node;
    std::string input;
};

std::vector<Slot> component_slots(const WorkflowGraph& graph, const ComponentRegistry& registry,
                                  Category category) {
    std::vector<Slot> out;
    for (const auto& [id, node] : graph.nodes()) {
        for (const auto& [name, value] : node.inputs) {
            auto c = registry.slot_category(node.class_type, name);
            if (c && *c == category && as_string(value)) out.push_back({id, name});
        }
    }
    return out;
}

std::vector<Slot> parameter_slots(const WorkflowGraph& graph, const std::set<InputKey>& rules,
                                  bool integers_only) {
    std::vector<Slot> out;
    for (const auto& [id, node] : graph.nodes()) {
        for (const auto& [name, value] : node.inputs) {
            if (!rules.count({node.class_type, name})) continue;
            auto lit = as_literal(value);
            if (!lit) continue;
            bool is_int = std::holds_alternative<std::int64_t>(*lit);
            bool is_num = is_int || std::holds_alternative<double>(*lit);
            if (integers_only ? is_int : is_num) out.push_back({id, name});
        }
    }
    return out;
}

Category swap_category(const MutationKind& kind) {
    if (auto s = std::get_if<SwapComponent>(&kind)) return s->category;
    if (std::holds_alternative<SwapSampler>(kind)) return Category::Sampler;
    return Category::Scheduler;
}

std::string pad3(int i) {
    std::ostringstream os;
    os << std::setw(3) << std::setfill('0') << i;
    return os.str();
}

}  // namespace

std::string describe(const MutationKind& kind) {
    return std::visit(
        overloaded{
            [](const SwapComponent& s) { return "SwapComponent(" + std::string(category_name(s.category)) + ")"; },
            [](const ChangeGuidance& g) {
                return "ChangeGuidance(" + literal_text(g.min) + "," + literal_text(g.max) + ")";
            },
            [](const ChangeSteps& s) {
                return "ChangeSteps(" + std::to_string(s.min) + "," + std::to_string(s.max) + ")";
            },
            [](const SwapSampler&) { return std::string("SwapSampler"); },
            [](const SwapScheduler&) { return std::string("SwapScheduler"); },
        },
        kind);
}

void validate(const MutationSpec& spec) {
    if (auto g = std::get_if<ChangeGuidance>(&spec.kind)) {
        if (!std::isfinite(g->min) || !std::isfinite(g->max) || g->min > g->max) {
            throw Error(Errc::InvalidArgument, "bad guidance range in " + describe(spec.kind));
        }
    }
    if (auto s = std::get_if<ChangeSteps>(&spec.kind); s && (s->min > s->max || s->min < 1)) {
        throw Error(Errc::InvalidArgument, "bad steps range in " + describe(spec.kind));
    }
}

MutationOutcome apply_mutation_logged(const WorkflowGraph& graph, const MutationSpec& spec,
                                      const ComponentRegistry& registry) {
    validate(spec);
    CounterRng rng(spec.rng_seed);

    const bool is_guidance = std::holds_alternative<ChangeGuidance>(spec.kind);
    const bool is_steps = std::holds_alternative<ChangeSteps>(spec.kind);

    std::vector<Slot> slots;
    if (is_guidance) {
        slots = parameter_slots(graph, registry.guidance_inputs(), false);
    } else if (is_steps) {
        slots = parameter_slots(graph, registry.steps_inputs(), true);
    } else {
        slots = component_slots(graph, registry, swap_category(spec.kind));
    }
    if (slots.empty()) {
        throw Error(Errc::NoMatchingSlot, "no input matches " + describe(spec.kind));
    }

    const Slot& slot = slots[rng.index(slots.size())];
    const auto& old_value = *as_literal(graph.node(slot.node).inputs.at(slot.input));
    Literal replacement;

    if (auto g = std::get_if<ChangeGuidance>(&spec.kind)) {
        double v = g->min + rng.uniform() * (g->max - g->min);
        v = std::clamp(std::round(v * 10.0) / 10.0, g->min, g->max);
        replacement = v;
    } else if (auto s = std::get_if<ChangeSteps>(&spec.kind)) {
        replacement = rng.between(s->min, s->max);
    } else {
        const Category category = swap_category(spec.kind);
        const auto& current = std::get<std::string>(old_value);
        std::vector<std::string> candidates;
        for (auto& n : registry.names(category)) {
            if (n != current) candidates.push_back(std::move(n));
        }
        if (candidates.empty()) {
            replacement = current;
        } else {
            replacement = candidates[rng.index(candidates.size())];
        }
    }

    std::string log = describe(spec.kind) + " " + slot.node + "." + slot.input + ": " +
                      literal_text(old_value) + " -> " + literal_text(replacement);
    return {graph.with_literal(slot.node, slot.input, std::move(replacement)), std::move(log)};
}

std::vector<WeightedMutation> default_mutation_mix() {
    return {
        {SwapComponent{Category::BaseModel}, 3.0},
        {SwapComponent{Category::Lora}, 2.0},
        {SwapComponent{Category::Vae}, 0.5},
        {SwapComponent{Category::Upscaler}, 0.5},
        {SwapSampler{}, 1.0},
        {SwapScheduler{}, 0.5},
        {ChangeGuidance{3.0, 12.0}, 1.0},
        {ChangeSteps{15, 50}, 1.0},
    };
}

Corpus expand_corpus(const AugmentationPlan& plan, const ComponentRegistry& registry) {
    if (plan.mutations_per_template < 0 || plan.chain_length < 1) {
        throw Error(Errc::TemplateInvalid, "mutations_per_template must be >= 0 and chain_length >= 1");
    }
    double total_weight = 0.0;
    for (const auto& m : plan.mutation_mix) {
        if (!(m.weight > 0.0)) throw Error(Errc::TemplateInvalid, "mutation weights must be positive");
        validate(MutationSpec{m.kind, 0});
        total_weight += m.weight;
    }
    if (plan.mutations_per_template > 0 && plan.mutation_mix.empty()) {
        throw Error(Errc::TemplateInvalid, "mutations requested but the mutation mix is empty");
    }

    for (const auto& t : plan.templates) {
        try {
            find_prompt_slots(t.graph);
        } catch (const Error& e) {
            throw Error(Errc::TemplateInvalid, "template '" + t.id.str() + "': " + e.what(), t.id.str());
        }
    }

    Corpus out;
    std::set<std::string> seen;
    auto emit = [&](CorpusEntry entry) {
        if (plan.dedup && !seen.insert(serialize_flow(entry.graph)).second) return;
        out.push_back(std::move(entry));
    };

    for (const auto& t : plan.templates) {
        emit({t.id, t.graph, {t.id, {}}});
    }
    for (const auto& t : plan.templates) {
        for (int i = 0; i < plan.mutations_per_template; ++i) {
            CounterRng rng(hash_strings({t.id.str(), std::to_string(i)}, plan.seed));
            WorkflowGraph g = t.graph;
            std::vector<std::string> log;
            for (int step = 0; step < plan.chain_length; ++step) {
                double pick = rng.uniform() * total_weight;
                const WeightedMutation* chosen = &plan.mutation_mix.back();
                for (const auto& m : plan.mutation_mix) {
                    if (pick < m.weight) {
                        chosen = &m;
                        break;
                    }
                    pick -= m.weight;
                }
                try {
                    auto outcome = apply_mutation_logged(g, {chosen->kind, rng.next()}, registry);
                    g = std::move(outcome.graph);
                    log.push_back(std::move(outcome.log));
                } catch (const Error& e) {
                    if (e.code() != Errc::NoMatchingSlot) throw;
                }
            }
            if (log.empty()) continue;
            emit({FlowId(t.id.str() + "~" + pad3(i)), std::move(g), {t.id, std::move(log)}});
        }
    }
    return out;
}

}  // namespace flowpick
