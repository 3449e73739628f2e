#include "flowpick/clients.hpp"

#include <cstdio>

#include "flowpick/error.hpp"
#include "flowpick/hashing.hpp"

namespace flowpick {

ImageHandle MockExecutor::submit(const GenerationJob& job) {
    ++calls_;
    if (options_.fail_pairs.count({job.prompt_id, job.flow_id.str()})) {
        throw Error(Errc::ExecutionFailed, "injected failure for (" + job.prompt_id + ", " + job.flow_id.str() + ")",
                    job.resolved_graph.nodes().begin()->first);
    }
    if (!options_.available_models.empty()) {
        for (const auto& [id, node] : job.resolved_graph.nodes()) {
            for (const auto& [name, value] : node.inputs) {
                auto s = as_string(value);
                if (s && options_.model_inputs.count(name) && !options_.available_models.count(*s)) {
                    throw Error(Errc::ExecutionFailed, "node " + id + " (" + node.class_type + "): model '" + *s +
                                                           "' not found",
                                id);
                }
            }
        }
    }
    const auto h = hash_strings({job.prompt_text, serialize_flow(job.resolved_graph), std::to_string(job.seed)});
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return {std::string("mock://") + buf, job.prompt_id, job.flow_id, job.seed};
}

ScoreRange default_score_range(std::string_view scorer_name) {
    if (scorer_name == "aesthetic") return {4.0, 7.0};
    if (scorer_name == "image_reward") return {-2.0, 2.0};
    if (scorer_name == "hps" || scorer_name == "hps_v2") return {0.20, 0.32};
    if (scorer_name == "pickscore") return {18.0, 23.0};
    return {0.0, 1.0};
}

SyntheticScorer::SyntheticScorer(std::string name)
    : name_(std::move(name)), range_(default_score_range(name_)) {}

double SyntheticScorer::score(const ImageHandle& image, std::string_view) {
    if (offline_) throw Error(Errc::ScorerUnavailable, "scorer " + name_ + " is offline", name_);
    auto unit = [](std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; };
    const double flow_term = unit(hash_strings({"flow", image.flow_id.str(), name_}));
    const double pair_term = unit(hash_strings({"pair", image.prompt_id, image.flow_id.str(), name_}));
    return range_.lo + (range_.hi - range_.lo) * (0.5 * flow_term + 0.5 * pair_term);
}

}  // namespace flowpick
