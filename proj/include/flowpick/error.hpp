#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowpick {

enum class Errc {
    // graph_core
    MalformedJson,
    UnknownLinkTarget,
    CycleDetected,
    EmptyGraph,
    BadLinkShape,
    NoPromptSlot,
    EmptyCorpus,
    // registry_augment
    RegistryInvariant,
    NoMatchingSlot,
    TemplateInvalid,
    // score_pipeline
    ExecutorUnavailable,
    ExecutionFailed,
    Timeout,
    ScorerUnavailable,
    DegenerateScorer,
    MissingScorer,
    StoreCorrupt,
    // labeling_table
    NoLabelsAssigned,
    EmptyDataset,
    // selection
    LlmUnavailable,
    NoValidFlowId,
    MissingFlow,
    NoJsonFound,
    InvalidFlow,
    // plumbing
    InvalidArgument,
    Config,
    Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the library. `subject` names the offending item
/// (node id, scorer name, flow id, file) when there is one.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::string subject = {})
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          subject_(std::move(subject)) {}

    Errc code() const noexcept { return code_; }
    const std::string& subject() const noexcept { return subject_; }

private:
    Errc code_;
    std::string subject_;
};

}  // namespace flowpick
