#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "flowpick/graph.hpp"

namespace flowpick {

/// Corpus-ingest predicates for community flows: text-to-image only, bounded
/// size, and no rarely used community blocks.
struct IngestOptions {
    std::size_t max_json_bytes = 256 * 1024;
    /// Non-core blocks must appear in at least this many surviving flows.
    std::size_t min_block_frequency = 3;
    std::set<std::string> core_blocks = default_core_blocks();

    static std::set<std::string> default_core_blocks();
};

struct IngestCandidate {
    FlowId id;
    std::string json_text;
};

struct IngestVerdict {
    FlowId id;
    bool kept = false;
    std::string reason;  // empty when kept
};

struct IngestResult {
    Corpus kept;
    std::vector<IngestVerdict> verdicts;  // one per candidate, input order
};

bool is_video_flow(const WorkflowGraph& graph);
bool takes_control_image(const WorkflowGraph& graph);

IngestResult filter_candidates(const std::vector<IngestCandidate>& candidates, const IngestOptions& options = {});

}  // namespace flowpick
