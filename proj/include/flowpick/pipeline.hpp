#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flowpick/clients.hpp"
#include "flowpick/error.hpp"
#include "flowpick/prompts.hpp"
#include "flowpick/triplet_store.hpp"

namespace flowpick {

/// Writes the prompt into every positive slot; negative slots holding an
/// empty string get `negative_default`, authored negatives stay as they are.
/// Errors: NoPromptSlot.
WorkflowGraph bind_prompt(const WorkflowGraph& graph, const PromptRecord& prompt, const std::string& negative_default);

/// Errors: InvalidArgument when a positive slot is still empty, plus
/// whatever the executor raises.
ImageHandle submit_generation(const GenerationJob& job, ExecutorClient& executor);

/// One finite value per scorer. Any scorer failure aborts the whole vector.
RawScoreVector score_image(const ImageHandle& image, std::string_view prompt_text,
                           const std::vector<ScorerClient*>& scorers);

struct PairFailure {
    std::string prompt_id;
    FlowId flow_id;
    Errc code;
    std::string reason;
};

struct RunOptions {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string negative_default;
    /// Jobs finished per store append.
    std::size_t batch_size = 32;
    std::function<std::string()> clock = utc_timestamp;
};

struct RunReport {
    std::size_t requested = 0;  // prompts x flows
    std::size_t skipped = 0;    // already in the store
    std::size_t completed = 0;  // appended this run
    std::vector<PairFailure> failures;
    bool fitted_standardization = false;
    EnsembleConfig config;  // the config the store's ensemble values follow
};

/// Generates and scores every (prompt, flow) pair missing from the store and
/// appends the triplets. Pairs run with `workers` threads; triplets are
/// appended in (prompt, flow) order, so reruns produce identical files.
///
/// The store's sidecar config wins when present. Otherwise, if `config` has
/// no standardization stats they are fitted over this run's vectors before
/// anything is written. Failed pairs are reported, never written.
///
/// Errors: StoreCorrupt; Config when the sidecar disagrees with `config`.
RunReport run_matrix(const std::vector<PromptRecord>& prompts, const Corpus& corpus, ExecutorClient& executor,
                     const std::vector<ScorerClient*>& scorers, const EnsembleConfig& config, const TripletStore& store,
                     const RunOptions& options = {});

}  // namespace flowpick
