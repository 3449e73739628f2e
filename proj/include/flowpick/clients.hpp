#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowpick/graph.hpp"

namespace flowpick {

/// Opaque reference to one generated image: a local path for live
/// executors, a synthetic id for the mock.
struct ImageHandle {
    std::string ref;
    std::string prompt_id;
    FlowId flow_id;
    std::uint64_t seed = 0;

    friend bool operator==(const ImageHandle&, const ImageHandle&) = default;
};

struct GenerationJob {
    std::string prompt_id;
    FlowId flow_id;
    WorkflowGraph resolved_graph;
    std::uint64_t seed = 0;
    std::string prompt_text;
};

/// Implementations must be safe for concurrent submit() calls.
class ExecutorClient {
public:
    virtual ~ExecutorClient() = default;
    /// Errors: ExecutorUnavailable, ExecutionFailed(node id), Timeout.
    virtual ImageHandle submit(const GenerationJob& job) = 0;
};

/// Implementations must be safe for concurrent score() calls.
class ScorerClient {
public:
    virtual ~ScorerClient() = default;
    virtual const std::string& name() const = 0;
    /// Errors: ScorerUnavailable(name).
    virtual double score(const ImageHandle& image, std::string_view prompt_text) = 0;
};

struct LlmRequest {
    std::optional<std::string> system;
    std::string user;
    int max_tokens = 4096;
    double temperature = 0.0;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Errors: LlmUnavailable.
    virtual std::string complete(const LlmRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Hermetic backends

/// Deterministic executor: the handle is a hash of (prompt text, canonical
/// flow, seed). Fails pairs listed in `fail_pairs`, and, when
/// `available_models` is non-empty, any loader input naming an unknown model
/// (reported against the loader's node id).
class MockExecutor final : public ExecutorClient {
public:
    struct Options {
        std::set<std::string> available_models;
        std::set<std::string> model_inputs{"ckpt_name", "lora_name", "vae_name", "model_name", "unet_name"};
        std::set<std::pair<std::string, std::string>> fail_pairs;  // (prompt_id, flow_id)
    };

    MockExecutor() = default;
    explicit MockExecutor(Options options) : options_(std::move(options)) {}

    ImageHandle submit(const GenerationJob& job) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    Options options_;
    std::atomic<std::size_t> calls_{0};
};

/// Plausible output range of a quality model.
struct ScoreRange {
    double lo;
    double hi;
};

ScoreRange default_score_range(std::string_view scorer_name);

/// Deterministic stand-in for a reward model: half a per-flow quality term
/// and half a per-(prompt, flow) term, both hashed, mapped into `range`.
class SyntheticScorer final : public ScorerClient {
public:
    explicit SyntheticScorer(std::string name);
    SyntheticScorer(std::string name, ScoreRange range) : name_(std::move(name)), range_(range) {}

    const std::string& name() const override { return name_; }
    double score(const ImageHandle& image, std::string_view prompt_text) override;

    void set_offline(bool offline) noexcept { offline_ = offline; }

private:
    std::string name_;
    ScoreRange range_;
    std::atomic<bool> offline_{false};
};

/// Wraps a callable; handy for scripted test responses.
class CallbackLlm final : public LlmClient {
public:
    explicit CallbackLlm(std::function<std::string(const LlmRequest&)> fn) : fn_(std::move(fn)) {}
    std::string complete(const LlmRequest& request) override { return fn_(request); }

private:
    std::function<std::string(const LlmRequest&)> fn_;
};

}  // namespace flowpick
